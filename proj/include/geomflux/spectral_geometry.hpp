#pragma once

#include <optional>
#include <vector>

#include "geomflux/hamiltonian_family.hpp"

namespace geomflux {

// Real multivariate polynomial alpha(R) = sum_t coeff_t prod_i R_i^{e_ti},
// with its analytic gradient. Used as a smooth phase field for gauge checks.
struct PolynomialField {
    struct Term {
        double coeff;
        std::vector<int> exponents; // one entry per parameter direction
    };
    std::vector<Term> terms;
    int dims = 0;

    double value(const RealVector& r) const;
    RealVector grad(const RealVector& r) const;
};

// Optional diagnostic rephasing of the eigenvector section: every eigenvector
// produced at R is multiplied by exp(i alpha(R)). Physical outputs must not
// depend on it; the gauge-invariance tests switch it on.
struct GaugeField {
    PolynomialField alpha;
};

struct LabeledEigenpair {
    int level = 0;
    double energy = 0.0;
    Vector state; // unit norm, gauge fixed: largest-|.| entry real positive
};

struct ReferenceEigenstate {
    ParameterPoint base_point;
    Vector state; // |chi_n(R)>; <chi_n(R)|n(R0)> is real positive
    Complex overlap; // <n(R0)|n(R)> in the fixed gauge
};

// A, P and Omega = A - P, one real entry per parameter direction.
struct GaugePotentials {
    RealVector A;
    RealVector P;
    RealVector Omega;
};

// Per-direction fluctuation data of the derivative generator at (R, R0, n).
struct FluctuationData {
    std::vector<Matrix> b_ops;                  // Hermitian B_i
    RealVector mean_b;                          // <n|B_i|n> (= -A_i)
    RealVector delta_b;                         // sqrt(<B_i^2> - <B_i>^2)
    RealVector lambda;                          // Re(<n(R0)|n_perp_i><n(R)|n(R0)>), 0 where delta_b ~ 0
    std::vector<std::optional<Vector>> perp_states; // set only where delta_b > threshold
    std::vector<bool> degenerate_direction;     // true where delta_b <= threshold
    Complex overlap;                            // <n(R0)|n(R)>

    static constexpr double kDeltaBFloor = 1e-10;
};

// Quantum geometric tensor split into metric (symmetric) and curvature
// (antisymmetric) parts: T_ij = g_ij + i v_ij.
struct GeometricTensor {
    RealMatrix g;
    RealMatrix v;
};

// Ordered parameter samples; closed paths repeat the first point last.
struct ParameterPath {
    ParameterPath(std::vector<ParameterPoint> pts, bool closed_loop);

    const std::vector<ParameterPoint>& samples() const { return samples_; }
    bool closed() const { return closed_; }
    std::size_t size() const { return samples_.size(); }

private:
    std::vector<ParameterPoint> samples_;
    bool closed_;
};

enum class OmegaRoute {
    AP,            // A and P from finite-difference derivatives of |n>
    Fluctuation,   // lambda_i delta_b_i / |overlap|^2
    SumOverStates, // energy-denominator mode sum over m != n
    Metric,        // (lambda_i / |overlap|^2) sqrt(g_ii)
};

enum class MetricRoute {
    Derivative,  // finite differences of the gauge-fixed eigenvectors
    ForceStates, // mode sum over <n|dh|m><m|dh|n> / gap^2
};

// Eigenpair at level n (ascending energies) with the deterministic gauge fix.
// Throws DegenerateSpectrum when the gap at n is below 1e-8 * spectral scale.
LabeledEigenpair eigen_at(const HamiltonianFamily& family, const ParameterPoint& R,
                          int n, const GaugeField* gauge = nullptr);

// Full eigensystem at R with the deterministic gauge fix (and the optional
// diagnostic rephasing) applied to every column. No degeneracy check.
EigenDecomposition fixed_eigensystem_at(const HamiltonianFamily& family,
                                        const ParameterPoint& R,
                                        const GaugeField* gauge = nullptr);

// |chi_n(R)> = (<n(R)|n(R0)>/|<n(R)|n(R0)>|) |n(R)>.
// Throws ReferenceOverlapVanishing when |overlap| <= 1e-6.
ReferenceEigenstate reference_state(const HamiltonianFamily& family,
                                    const ParameterPoint& R, const ParameterPoint& R0,
                                    int n, const GaugeField* gauge = nullptr);

// A_n = i <n|grad n> from Richardson-refined central differences of the
// gauge-fixed eigenvectors. Convention dependent by construction.
RealVector berry_connection(const HamiltonianFamily& family, const ParameterPoint& R,
                            int n, const GaugeField* gauge = nullptr);

// B_i = -i (d_i U) U^dagger with U(R) = sum_m |m(R)><m(R_ref)|.
// Requires a fully nondegenerate spectrum at R.
std::vector<Matrix> b_operator(const HamiltonianFamily& family, const ParameterPoint& R,
                               const ParameterPoint& basis_ref,
                               const GaugeField* gauge = nullptr);

FluctuationData fluctuation_data(const HamiltonianFamily& family,
                                 const ParameterPoint& R, const ParameterPoint& R0,
                                 int n, const GaugeField* gauge = nullptr);

GaugePotentials gauge_potentials(const HamiltonianFamily& family,
                                 const ParameterPoint& R, const ParameterPoint& R0,
                                 int n, OmegaRoute route, const GaugeField* gauge = nullptr);

GeometricTensor metric_and_geometric_tensor(const HamiltonianFamily& family,
                                            const ParameterPoint& R, int n,
                                            MetricRoute route,
                                            const GaugeField* gauge = nullptr);

struct PathPhase {
    double phase = 0.0;          // radians
    double error_estimate = 0.0; // Richardson estimate from midpoint refinement
};

// Line integral of Omega (chosen route) along the path, referenced to the
// path start. Checks level tracking and reference overlap at every sample.
PathPhase open_path_phase(const HamiltonianFamily& family, const ParameterPath& path,
                          int n, OmegaRoute route, const GaugeField* gauge = nullptr,
                          bool refine = true);

// Holonomy of the closed loop: sum over segments of -arg<n(R_k)|n(R_k+1)>.
// Internally cross-checked against -arg prod_k <n(R_k)|n(R_k+1)> mod 2pi.
double cyclic_berry_phase(const HamiltonianFamily& family, const ParameterPath& loop,
                          int n, const GaugeField* gauge = nullptr);

struct GaugeCheckReport {
    double max_a_deviation = 0.0;     // |A' - (A - grad alpha)|_inf
    double max_p_deviation = 0.0;     // |P' - (P - grad alpha)|_inf
    double max_omega_deviation = 0.0; // |Omega' - Omega|_inf
};

// Applies the polynomial phase field and verifies the compensation law.
GaugeCheckReport gauge_transform_check(const HamiltonianFamily& family,
                                       const ParameterPoint& R, const ParameterPoint& R0,
                                       int n, const PolynomialField& alpha);

// Shared constants for this module.
inline constexpr double kDegeneracyTolerance = 1e-8;   // relative to spectral scale
inline constexpr double kReferenceOverlapTolerance = 1e-6;
inline constexpr double kLevelTrackingThreshold = 0.5; // on |<n_k|n_k+1>|^2

} // namespace geomflux
