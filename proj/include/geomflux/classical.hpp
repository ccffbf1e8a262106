#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "geomflux/hamiltonian_family.hpp"

namespace geomflux {

struct PhasePoint {
    RealVector r;
    RealVector p;
};

using ClassicalObservable = std::function<double(const PhasePoint&)>;

// Separable classical Hamiltonian h = sum_i p_i^2/(2 m_i) + V(r; R). The
// builtins couple to the parameters by rigid translation, V(r; R) = V0(r - R):
//   harmonic:         V0(x) = m w^2 x^2 / 2          (1 dof, 1 parameter)
//   quartic-coupled:  V0(x) = x1^2 x2^2 + beta (x1^4 + x2^4)/4  (2 dof, 2 parameters)
// For translation coupling dh/dR_i = -dV0/dx_i = (force_r)_i.
class ClassicalFastSystem {
public:
    enum class Kind { SeparableAnalytic, BuiltinHarmonic, BuiltinQuarticCoupled };

    using PotentialFn = std::function<double(const RealVector& r, const RealVector& R)>;
    using VectorFieldFn = std::function<RealVector(const RealVector& r, const RealVector& R)>;
    using MinimumFn = std::function<double(const RealVector& R)>;
    // Fills the centre and per-dof half-widths of the rejection box that
    // encloses the energy shell for the given target energy.
    using BoxFn = std::function<void(const RealVector& R, double energy,
                                     RealVector& r_center, RealVector& r_half,
                                     RealVector& p_half)>;

    static ClassicalFastSystem harmonic(double mass = 1.0, double omega = 1.0,
                                        double hbar = 1.0);
    static ClassicalFastSystem quartic_coupled(double beta = 0.05, double hbar = 1.0);
    static ClassicalFastSystem separable(int dof, int param_dim, PotentialFn potential,
                                         VectorFieldFn force_r, VectorFieldFn grad_R,
                                         MinimumFn minimum, BoxFn box,
                                         RealVector masses, double hbar = 1.0);

    double hamiltonian(const PhasePoint& z, const RealVector& R) const;
    double potential(const RealVector& r, const RealVector& R) const;
    RealVector force_r(const RealVector& r, const RealVector& R) const; // -dV/dr
    RealVector grad_R(const RealVector& r, const RealVector& R) const;  // +dh/dR
    double potential_minimum(const RealVector& R) const;
    void sampling_box(const RealVector& R, double energy, RealVector& r_center,
                      RealVector& r_half, RealVector& p_half) const;

    // Action-angle chart of the integrable builtin; NotIntegrable otherwise.
    PhasePoint torus_point(const RealVector& actions, const RealVector& angles,
                           const RealVector& R) const;

    Kind kind() const { return kind_; }
    int dof() const { return dof_; }
    int param_dim() const { return param_dim_; }
    const RealVector& masses() const { return masses_; }
    double hbar() const { return hbar_; }
    bool integrable() const { return kind_ == Kind::BuiltinHarmonic; }
    double harmonic_omega() const; // BuiltinHarmonic only
    double quartic_beta() const;   // BuiltinQuarticCoupled only

private:
    ClassicalFastSystem() = default;

    Kind kind_ = Kind::SeparableAnalytic;
    int dof_ = 0;
    int param_dim_ = 0;
    RealVector masses_;
    double hbar_ = 1.0;
    double omega_ = 1.0; // harmonic
    double beta_ = 0.05; // quartic
    PotentialFn potential_;
    VectorFieldFn force_r_;
    VectorFieldFn grad_r_big_;
    MinimumFn minimum_;
    BoxFn box_;
};

enum class WeightModel { EnergyShell, Torus };

struct ClassicalEnsemble {
    std::vector<PhasePoint> samples;
    WeightModel weight_model = WeightModel::EnergyShell;
    double energy = 0.0;          // EnergyShell
    RealVector actions;           // Torus
    std::uint64_t seed = 0;
    double shell_halfwidth = 0.0; // absolute half-width eta * energy
    RealVector r_coords;          // parameters the ensemble was sampled at
};

// Requested parameters of an ensemble, bundled for the higher-level checks.
struct EnsembleSpec {
    WeightModel kind = WeightModel::EnergyShell;
    double energy = 1.0;
    RealVector actions;
    std::size_t count = 1000;
    std::uint64_t seed = 1;
    double eta = 1e-3; // relative shell half-width
};

struct MeanStderr {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

// Uniform rejection sampling of the shell |h - E| <= eta*E from the per-dof
// box around the potential minimum. Sample k is drawn from its own RNG
// stream derived from (seed, k), so results do not depend on scheduling.
ClassicalEnsemble sample_energy_shell(const ClassicalFastSystem& sys, const RealVector& R,
                                      double energy, std::size_t count,
                                      std::uint64_t seed, double eta = 1e-3);

// Uniform angles on the torus of the integrable builtin at fixed actions.
ClassicalEnsemble sample_torus(const ClassicalFastSystem& sys, const RealVector& R,
                               const RealVector& actions, std::size_t count,
                               std::uint64_t seed);

MeanStderr microcanonical_average(const ClassicalFastSystem& sys, const RealVector& R,
                                  double energy, const ClassicalObservable& obs,
                                  std::size_t count, std::uint64_t seed,
                                  double eta = 1e-3);

// Velocity-Verlet integration through the monotone time grid, starting from
// `start` at t = 0. Intervals are cut into substeps of at most dt. Throws
// StepSizeTooLarge when the relative energy drift at any grid point exceeds
// 1e-6 (recommended dt for the builtins: 1e-3).
std::vector<PhasePoint> trajectory(const ClassicalFastSystem& sys, const RealVector& R,
                                   const PhasePoint& start, const RealVector& t_grid,
                                   double dt);

inline constexpr double kEnergyDriftTolerance = 1e-6;

struct ClassicalTrace {
    RealVector times;
    std::vector<RealVector> q;              // per direction
    std::vector<RealVector> stderr_of_mean; // per direction
};

// Monte Carlo estimate of Q_c,i(t) = <A(z(t)) B_i(z) - A(z) B_i(z(t))> over
// the ensemble, with per-time standard errors.
ClassicalTrace classical_correlation(const ClassicalFastSystem& sys, const RealVector& R,
                                     const ClassicalEnsemble& ensemble,
                                     const ClassicalObservable& a_obs,
                                     const std::vector<ClassicalObservable>& b_obs,
                                     const RealVector& times, double dt);

// Uniform angle-grid average over the torus at fixed actions; spectrally
// accurate for smooth observables (>= 256 angles per dof recommended).
double torus_average(const ClassicalFastSystem& sys, const RealVector& actions,
                     const ClassicalObservable& obs, int angles_per_dof,
                     const RealVector& R);

struct ClassicalTheoremReport {
    RealVector lhs;        // regularized integral of Q_c, extrapolated s->0
    RealVector lhs_stderr;
    RealVector rhs;        // -2 hbar lambda_c Var(B_generator_i)
    RealVector rhs_stderr;
    RealVector residuals;
    RealVector combined_stderr;
    RealVector generator_variance;
    RealVector generator_variance_stderr;
    double lambda_c = 1.0;
    std::vector<double> s_values;
    RealVector times;
    std::vector<RealVector> q;        // measured trace per direction
    std::vector<RealVector> q_stderr;
    double envelope_early = 0.0;    // max |Q_c| over the first fifth of the grid
    double envelope_late = 0.0;     // max |Q_c| over the last fifth
    double envelope_fraction = 0.0; // late / early
};

// Classical counterpart of the fluctuation-correlation check: compares the
// regularized time integral of Q_c against -2 hbar lambda_c Var(B_gen) under
// the ensemble named by spec.kind. lambda_c is a supplied constant (the
// correspondence scale is not fixed by the quantum side); both sides are
// reported with standard errors so the proportionality can be examined.
ClassicalTheoremReport classical_theorem_check(
    const ClassicalFastSystem& sys, const RealVector& R, const ClassicalObservable& a_obs,
    const std::vector<ClassicalObservable>& b_obs,
    const std::vector<ClassicalObservable>& b_generator, const EnsembleSpec& spec,
    const std::vector<double>& s_values, double lambda_c, const RealVector& times,
    double dt);

// Default A observable: Gaussian phase-space window exp(-|z-z0|^2/(2 sigma^2)).
ClassicalObservable gaussian_window(const PhasePoint& z0, double sigma);

// B observable for direction i: +dh/dR_i evaluated at the phase point.
ClassicalObservable force_observable(const ClassicalFastSystem& sys, const RealVector& R,
                                     int direction);
std::vector<ClassicalObservable> force_observables(const ClassicalFastSystem& sys,
                                                   const RealVector& R);

// Generator observable for the translation-coupled builtins: -p_i / hbar.
ClassicalObservable translation_generator(const ClassicalFastSystem& sys, int direction);

} // namespace geomflux
