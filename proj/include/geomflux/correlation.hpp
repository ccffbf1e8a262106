#pragma once

#include <vector>

#include "geomflux/spectral_geometry.hpp"

namespace geomflux {

// Heisenberg evolution at fixed parameters: matrix elements between
// eigenvectors j and k pick up exp(i (e_j - e_k) t / hbar). The operator is
// supplied and returned in the original basis.
Matrix heisenberg_operator(const EigenDecomposition& eigensys, const Matrix& op,
                           double t, double hbar);

// Spectral content of the two-point functions of A = |n(R0)><n(R0)| and
// B_i = d_i h at fixed R in the state |n(R)>:
//   C_AB,i(t) = sum_m Re(M_im e^{+i w_m t})   (B evolved to -t)
//   C_BA,i(t) = sum_m Re(M_im e^{-i w_m t})   (B evolved to +t)
//   Q_i(t)    = C_AB,i - C_BA,i = -2 sum_m Im(M_im) sin(w_m t)
// with M_im = <n|A|m><m|d_i h|n> and w_m = (e_n - e_m)/hbar. The m = n term
// has frequency zero and enters only the C sequences.
struct CorrelationModes {
    RealVector omegas;                  // w_m over m != n, ascending level order
    std::vector<Vector> coeffs;         // per direction i: M_im over m != n
    std::vector<Complex> static_coeffs; // per direction: M_in
    double hbar = 1.0;
    int level = 0;
    Complex overlap;                    // <n(R0)|n(R)>

    int directions() const { return static_cast<int>(coeffs.size()); }
};

CorrelationModes correlation_modes(const HamiltonianFamily& family,
                                   const ParameterPoint& R, const ParameterPoint& R0,
                                   int n, const GaugeField* gauge = nullptr);

enum class QForm {
    Heisenberg, // literal time-evolved operators and expectation values
    Spectral,   // mode sums from CorrelationModes
};

struct CorrelationTrace {
    RealVector times;
    std::vector<RealVector> q;    // per direction
    std::vector<RealVector> c_ab; // per direction
    std::vector<RealVector> c_ba; // per direction
    int level = 0;
    RealVector r_coords;
    RealVector r0_coords;
};

// Both forms agree pointwise within 1e-10; each trace value is checked to be
// real within 1e-10 before the imaginary residue is discarded.
CorrelationTrace q_correlation(const HamiltonianFamily& family, const ParameterPoint& R,
                               const ParameterPoint& R0, int n, const RealVector& times,
                               QForm form, const GaugeField* gauge = nullptr);

enum class IntegralMethod { ModeSum, Quadrature };

struct RegularizedIntegral {
    RealVector value;          // per direction
    RealVector error_estimate; // refinement difference + tail bound; 0 for mode sum
};

// integral_0^inf e^{-st} Q_i(t) dt. The mode sum uses the closed form
// -2 sum_m Im(M_im) w_m/(s^2 + w_m^2); quadrature integrates the sampled
// series with composite Gauss-Legendre panels, at least 20 points per
// shortest oscillation period, truncated where the damping factor reaches
// 1e-10 of its initial value.
RegularizedIntegral regularized_time_integral(const CorrelationModes& modes, double s,
                                              IntegralMethod method);

// Exact s->0 limit of the integral above: -2 sum_m Im(M_im)/w_m.
RealVector regularized_integral_limit(const CorrelationModes& modes);

struct TheoremSample {
    double s = 0.0;
    RealVector mode_sum;         // closed-form integral at this s
    RealVector quadrature;       // panel-quadrature integral at this s
    RealVector quadrature_error; // reported estimate for the quadrature value
};

// Verifies -(1/(2 hbar)) integral Q_i dt = lambda_i delta_b_i. The lhs uses
// the exact s->0 mode-sum limit; the s_values drive the independent
// quadrature cross-check and its Richardson extrapolation toward s = 0.
struct TheoremReport {
    int level = 0;
    Complex overlap;
    RealVector lhs;
    RealVector rhs;
    RealVector residuals; // |lhs - rhs| componentwise
    RealVector lambda;
    RealVector delta_b;
    std::vector<double> s_values;
    std::vector<TheoremSample> samples;
    RealVector quadrature_limit;       // extrapolated from the two smallest s
    RealVector quadrature_limit_error; // propagated estimate incl. extrapolation truncation
    IntegralMethod method = IntegralMethod::ModeSum; // route behind lhs
};

TheoremReport theorem_check(const HamiltonianFamily& family, const ParameterPoint& R,
                            const ParameterPoint& R0, int n,
                            const std::vector<double>& s_values = {0.2, 0.1, 0.05},
                            const GaugeField* gauge = nullptr);

// Laplace transforms chi_AB(z) = L[C_AB](z) and chi_BA(z) = L[C_BA](z) by
// mode sum, plus the exact z->0 limit of their difference, which equals the
// regularized integral of Q and hence -2 hbar lambda_i delta_b_i.
struct SusceptibilityReport {
    std::vector<double> z_values;
    std::vector<std::vector<Complex>> chi_ab; // [z index][direction]
    std::vector<std::vector<Complex>> chi_ba; // [z index][direction]
    RealVector extrapolated_difference;
    RealVector theorem_rhs; // -2 hbar lambda_i delta_b_i
    int level = 0;
};

SusceptibilityReport susceptibility(const HamiltonianFamily& family,
                                    const ParameterPoint& R, const ParameterPoint& R0,
                                    int n, const std::vector<double>& z_values,
                                    const GaugeField* gauge = nullptr);

// Diagonal metric entries from the connected force-force correlation:
// -(1/(2 hbar^2)) integral_0^inf t e^{-st} [<n|(d_i h)_t (d_i h)|n> +
// <n|(d_i h)(d_i h)_t|n>]_connected dt by mode sum, with the exact s->0
// limit -1/w^2 of the t cos(wt) transform. Returns the limit; `finite_s`
// receives the closed-form value at the supplied s when non-null.
RealVector gii_from_force_correlation(const HamiltonianFamily& family,
                                      const ParameterPoint& R, int n, double s,
                                      RealVector* finite_s = nullptr);

} // namespace geomflux
