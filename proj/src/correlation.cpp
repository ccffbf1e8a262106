#include "geomflux/correlation.hpp"

#include <algorithm>
#include <cmath>

namespace geomflux {

namespace {

const Complex kI(0.0, 1.0);

// 10-point Gauss-Legendre rule on [-1, 1], symmetric halves.
constexpr double kGlNode[5] = {0.1488743389816312, 0.4333953941292472,
                               0.6794095682990244, 0.8650633666889845,
                               0.9739065285171717};
constexpr double kGlWeight[5] = {0.2955242247147529, 0.2692667193099963,
                                 0.2190863625159820, 0.1494513491505806,
                                 0.0666713443086881};

// Damping factor at the truncation point relative to t = 0.
constexpr double kTailRatio = 1e-10;

void check_positive(double x, const char* name) {
    if (!(x > 0.0)) {
        throw Error(std::string(name) + " must be positive");
    }
}

// Q_i(t) accumulated into acc[i] with weight w.
void accumulate_q(const CorrelationModes& modes, double t, double w, RealVector& acc) {
    const Eigen::Index mode_count = modes.omegas.size();
    for (Eigen::Index m = 0; m < mode_count; ++m) {
        const double sm = std::sin(modes.omegas[m] * t);
        for (int i = 0; i < modes.directions(); ++i)
            acc[i] += w * (-2.0 * std::imag(modes.coeffs[static_cast<std::size_t>(i)][m]) * sm);
    }
}

RealVector panel_quadrature(const CorrelationModes& modes, double s, double t_max,
                            long panels) {
    RealVector acc = RealVector::Zero(modes.directions());
    const double h = t_max / static_cast<double>(panels);
    for (long p = 0; p < panels; ++p) {
        const double mid = (static_cast<double>(p) + 0.5) * h;
        const double half = 0.5 * h;
        for (int j = 0; j < 5; ++j) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const double t = mid + sign * half * kGlNode[j];
                const double w = half * kGlWeight[j] * std::exp(-s * t);
                accumulate_q(modes, t, w, acc);
            }
        }
    }
    return acc;
}

} // namespace

Matrix heisenberg_operator(const EigenDecomposition& eigensys, const Matrix& op,
                           double t, double hbar) {
    check_positive(hbar, "heisenberg_operator: hbar");
    const Eigen::Index dim = eigensys.eigenvalues.size();
    if (op.rows() != dim || op.cols() != dim)
        throw DimensionMismatch("heisenberg_operator: operator shape does not match eigensystem");
    if (t == 0.0) return op;
    const Matrix& v = eigensys.eigenvectors;
    Matrix tilde = v.adjoint() * op * v;
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index k = 0; k < dim; ++k)
            tilde(j, k) *= std::exp(kI * ((eigensys.eigenvalues[j] - eigensys.eigenvalues[k]) * t / hbar));
    return v * tilde * v.adjoint();
}

CorrelationModes correlation_modes(const HamiltonianFamily& family,
                                   const ParameterPoint& R, const ParameterPoint& R0,
                                   int n, const GaugeField* gauge) {
    if (n < 0 || n >= family.dim())
        throw DimensionMismatch("correlation_modes: level index out of range");
    const EigenDecomposition sys = fixed_eigensystem_at(family, R, gauge);
    if (sys.min_gap_at(n) < kDegeneracyTolerance * sys.spectral_scale())
        throw DegenerateSpectrum("correlation_modes: spectrum degenerate at requested level");
    const Vector n0 = eigen_at(family, R0, n, gauge).state;
    const Vector n_state = sys.eigenvectors.col(n);
    const Complex overlap = n0.dot(n_state); // <n(R0)|n(R)>
    const Complex bra_n_n0 = std::conj(overlap);
    const GradientSet grad = family.gradient(R);

    const Eigen::Index dim = sys.eigenvalues.size();
    const int d = family.param_dim();
    const double hbar = family.hbar();

    CorrelationModes modes;
    modes.hbar = hbar;
    modes.level = n;
    modes.overlap = overlap;
    modes.omegas.resize(dim - 1);
    modes.coeffs.assign(static_cast<std::size_t>(d), Vector(dim - 1));
    modes.static_coeffs.assign(static_cast<std::size_t>(d), Complex(0.0, 0.0));

    std::vector<Vector> f;
    f.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
        f.push_back(sys.eigenvectors.adjoint() *
                    (grad.components[static_cast<std::size_t>(i)] * n_state));

    Eigen::Index idx = 0;
    for (Eigen::Index m = 0; m < dim; ++m) {
        const Complex a_nm = bra_n_n0 * n0.dot(sys.eigenvectors.col(m)); // <n|A|m>
        if (m == n) {
            for (int i = 0; i < d; ++i)
                modes.static_coeffs[static_cast<std::size_t>(i)] =
                    a_nm * f[static_cast<std::size_t>(i)][m];
            continue;
        }
        modes.omegas[idx] = (sys.eigenvalues[n] - sys.eigenvalues[m]) / hbar;
        for (int i = 0; i < d; ++i)
            modes.coeffs[static_cast<std::size_t>(i)][idx] =
                a_nm * f[static_cast<std::size_t>(i)][m];
        ++idx;
    }
    return modes;
}

CorrelationTrace q_correlation(const HamiltonianFamily& family, const ParameterPoint& R,
                               const ParameterPoint& R0, int n, const RealVector& times,
                               QForm form, const GaugeField* gauge) {
    if (times.size() < 1)
        throw DimensionMismatch("q_correlation: need at least one time sample");
    const int d = family.param_dim();
    CorrelationTrace trace;
    trace.times = times;
    trace.level = n;
    trace.r_coords = R.coords();
    trace.r0_coords = R0.coords();
    trace.q.assign(static_cast<std::size_t>(d), RealVector::Zero(times.size()));
    trace.c_ab.assign(static_cast<std::size_t>(d), RealVector::Zero(times.size()));
    trace.c_ba.assign(static_cast<std::size_t>(d), RealVector::Zero(times.size()));

    if (form == QForm::Spectral) {
        const CorrelationModes modes = correlation_modes(family, R, R0, n, gauge);
        const Eigen::Index mode_count = modes.omegas.size();
        for (Eigen::Index k = 0; k < times.size(); ++k) {
            const double t = times[k];
            for (int i = 0; i < d; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                double ab = std::real(modes.static_coeffs[ui]);
                double ba = ab;
                for (Eigen::Index m = 0; m < mode_count; ++m) {
                    const double c = std::cos(modes.omegas[m] * t);
                    const double sn = std::sin(modes.omegas[m] * t);
                    const double re = std::real(modes.coeffs[ui][m]);
                    const double im = std::imag(modes.coeffs[ui][m]);
                    ab += re * c - im * sn;
                    ba += re * c + im * sn;
                }
                trace.c_ab[ui][k] = ab;
                trace.c_ba[ui][k] = ba;
                trace.q[ui][k] = ab - ba;
            }
        }
        return trace;
    }

    const EigenDecomposition sys = fixed_eigensystem_at(family, R, gauge);
    if (n < 0 || n >= family.dim())
        throw DimensionMismatch("q_correlation: level index out of range");
    if (sys.min_gap_at(n) < kDegeneracyTolerance * sys.spectral_scale())
        throw DegenerateSpectrum("q_correlation: spectrum degenerate at requested level");
    const Vector n0 = eigen_at(family, R0, n, gauge).state;
    const Vector n_state = sys.eigenvectors.col(n);
    const Matrix a_op = n0 * n0.adjoint();
    const GradientSet grad = family.gradient(R);
    const double hbar = family.hbar();

    auto symmetrized = [&](const Matrix& x) -> double {
        const Complex z = 0.5 * (n_state.dot(a_op * (x * n_state)) +
                                 n_state.dot(x * (a_op * n_state)));
        if (std::abs(std::imag(z)) > 1e-10)
            throw Error("q_correlation: imaginary residue above tolerance");
        return std::real(z);
    };

    for (Eigen::Index k = 0; k < times.size(); ++k) {
        const double t = times[k];
        for (int i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const Matrix& b = grad.components[ui];
            const Matrix b_minus = heisenberg_operator(sys, b, -t, hbar);
            const Matrix b_plus = heisenberg_operator(sys, b, t, hbar);
            trace.c_ab[ui][k] = symmetrized(b_minus);
            trace.c_ba[ui][k] = symmetrized(b_plus);
            trace.q[ui][k] = trace.c_ab[ui][k] - trace.c_ba[ui][k];
        }
    }
    return trace;
}

RegularizedIntegral regularized_time_integral(const CorrelationModes& modes, double s,
                                              IntegralMethod method) {
    check_positive(s, "regularized_time_integral: s");
    const int d = modes.directions();
    RegularizedIntegral out;
    out.value = RealVector::Zero(d);
    out.error_estimate = RealVector::Zero(d);
    const Eigen::Index mode_count = modes.omegas.size();
    if (mode_count == 0) return out;

    if (method == IntegralMethod::ModeSum) {
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (Eigen::Index m = 0; m < mode_count; ++m) {
                const double w = modes.omegas[m];
                acc += -2.0 * std::imag(modes.coeffs[static_cast<std::size_t>(i)][m]) * w /
                       (s * s + w * w);
            }
            out.value[i] = acc;
        }
        return out;
    }

    const double t_max = -std::log(kTailRatio) / s;
    const double w_max = modes.omegas.cwiseAbs().maxCoeff();
    const double panel_width = M_PI / w_max; // half the shortest period
    long panels = static_cast<long>(std::ceil(t_max / panel_width));
    panels = std::clamp(panels, 2L, 2000000L);

    const RealVector coarse = panel_quadrature(modes, s, t_max, panels);
    const RealVector fine = panel_quadrature(modes, s, t_max, 2 * panels);
    out.value = fine;
    for (int i = 0; i < d; ++i) {
        double envelope = 0.0; // sup|Q_i| <= 2 sum_m |Im M_im|
        for (Eigen::Index m = 0; m < mode_count; ++m)
            envelope += 2.0 * std::abs(std::imag(modes.coeffs[static_cast<std::size_t>(i)][m]));
        const double tail = std::exp(-s * t_max) / s * envelope;
        out.error_estimate[i] = std::abs(fine[i] - coarse[i]) + tail;
    }
    return out;
}

RealVector regularized_integral_limit(const CorrelationModes& modes) {
    const int d = modes.directions();
    RealVector out = RealVector::Zero(d);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (Eigen::Index m = 0; m < modes.omegas.size(); ++m)
            acc += -2.0 * std::imag(modes.coeffs[static_cast<std::size_t>(i)][m]) /
                   modes.omegas[m];
        out[i] = acc;
    }
    return out;
}

TheoremReport theorem_check(const HamiltonianFamily& family, const ParameterPoint& R,
                            const ParameterPoint& R0, int n,
                            const std::vector<double>& s_values, const GaugeField* gauge) {
    const CorrelationModes modes = correlation_modes(family, R, R0, n, gauge);
    const FluctuationData fd = fluctuation_data(family, R, R0, n, gauge);
    const int d = family.param_dim();
    const double hbar = family.hbar();

    TheoremReport rep;
    rep.level = n;
    rep.overlap = modes.overlap;
    rep.lambda = fd.lambda;
    rep.delta_b = fd.delta_b;
    rep.s_values = s_values;

    const RealVector limit = regularized_integral_limit(modes);
    rep.lhs = (-0.5 / hbar) * limit;
    rep.rhs = RealVector::Zero(d);
    for (int i = 0; i < d; ++i) rep.rhs[i] = fd.lambda[i] * fd.delta_b[i];
    rep.residuals = (rep.lhs - rep.rhs).cwiseAbs();

    rep.samples.reserve(s_values.size());
    for (double s : s_values) {
        TheoremSample sample;
        sample.s = s;
        sample.mode_sum = regularized_time_integral(modes, s, IntegralMethod::ModeSum).value;
        const RegularizedIntegral quad =
            regularized_time_integral(modes, s, IntegralMethod::Quadrature);
        sample.quadrature = quad.value;
        sample.quadrature_error = quad.error_estimate;
        rep.samples.push_back(std::move(sample));
    }

    if (!rep.samples.empty()) {
        // Richardson extrapolation in s^2 from the two smallest s values; the
        // truncation term is computable exactly from the closed-form sums.
        std::size_t i2 = 0;
        for (std::size_t i = 1; i < rep.samples.size(); ++i)
            if (rep.samples[i].s < rep.samples[i2].s) i2 = i;
        if (rep.samples.size() == 1) {
            const TheoremSample& a = rep.samples[0];
            rep.quadrature_limit = a.quadrature;
            rep.quadrature_limit_error =
                a.quadrature_error + (a.mode_sum - limit).cwiseAbs();
        } else {
            std::size_t i1 = (i2 == 0) ? 1 : 0;
            for (std::size_t i = 0; i < rep.samples.size(); ++i)
                if (i != i2 && rep.samples[i].s < rep.samples[i1].s) i1 = i;
            const TheoremSample& a1 = rep.samples[i1]; // larger s
            const TheoremSample& a2 = rep.samples[i2]; // smaller s
            const double k = a2.s * a2.s / (a1.s * a1.s - a2.s * a2.s);
            rep.quadrature_limit = (1.0 + k) * a2.quadrature - k * a1.quadrature;
            const RealVector trunc =
                ((1.0 + k) * a2.mode_sum - k * a1.mode_sum - limit).cwiseAbs();
            rep.quadrature_limit_error =
                (1.0 + k) * a2.quadrature_error + k * a1.quadrature_error + trunc;
        }
    }
    return rep;
}

SusceptibilityReport susceptibility(const HamiltonianFamily& family,
                                    const ParameterPoint& R, const ParameterPoint& R0,
                                    int n, const std::vector<double>& z_values,
                                    const GaugeField* gauge) {
    const CorrelationModes modes = correlation_modes(family, R, R0, n, gauge);
    const FluctuationData fd = fluctuation_data(family, R, R0, n, gauge);
    const int d = family.param_dim();
    const double hbar = family.hbar();

    SusceptibilityReport rep;
    rep.level = n;
    rep.z_values = z_values;
    rep.chi_ab.resize(z_values.size());
    rep.chi_ba.resize(z_values.size());
    for (std::size_t zi = 0; zi < z_values.size(); ++zi) {
        const double z = z_values[zi];
        check_positive(z, "susceptibility: z");
        rep.chi_ab[zi].resize(static_cast<std::size_t>(d));
        rep.chi_ba[zi].resize(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double stat = std::real(modes.static_coeffs[ui]) / z;
            double ab = stat;
            double ba = stat;
            for (Eigen::Index m = 0; m < modes.omegas.size(); ++m) {
                const double w = modes.omegas[m];
                const double re = std::real(modes.coeffs[ui][m]);
                const double im = std::imag(modes.coeffs[ui][m]);
                const double denom = z * z + w * w;
                ab += (re * z - im * w) / denom;
                ba += (re * z + im * w) / denom;
            }
            rep.chi_ab[zi][ui] = Complex(ab, 0.0);
            rep.chi_ba[zi][ui] = Complex(ba, 0.0);
        }
    }
    rep.extrapolated_difference = regularized_integral_limit(modes);
    rep.theorem_rhs = RealVector::Zero(d);
    for (int i = 0; i < d; ++i)
        rep.theorem_rhs[i] = -2.0 * hbar * fd.lambda[i] * fd.delta_b[i];
    return rep;
}

RealVector gii_from_force_correlation(const HamiltonianFamily& family,
                                      const ParameterPoint& R, int n, double s,
                                      RealVector* finite_s) {
    check_positive(s, "gii_from_force_correlation: s");
    if (n < 0 || n >= family.dim())
        throw DimensionMismatch("gii_from_force_correlation: level index out of range");
    const EigenDecomposition sys = fixed_eigensystem_at(family, R);
    if (sys.min_gap_at(n) < kDegeneracyTolerance * sys.spectral_scale())
        throw DegenerateSpectrum("gii_from_force_correlation: spectrum degenerate at level");

    const GradientSet grad = family.gradient(R);
    const Vector n_state = sys.eigenvectors.col(n);
    const int d = family.param_dim();
    const double hbar = family.hbar();
    RealVector limit = RealVector::Zero(d);
    RealVector at_s = RealVector::Zero(d);
    for (int i = 0; i < d; ++i) {
        const Vector f = sys.eigenvectors.adjoint() *
                         (grad.components[static_cast<std::size_t>(i)] * n_state);
        double lim_acc = 0.0;
        double s_acc = 0.0;
        for (Eigen::Index m = 0; m < sys.eigenvalues.size(); ++m) {
            if (m == n) continue; // connected correlator: mean term removed
            const double w = (sys.eigenvalues[n] - sys.eigenvalues[m]) / hbar;
            const double f2 = std::norm(f[m]);
            lim_acc += f2 / (w * w);
            const double denom = s * s + w * w;
            s_acc += -f2 * (s * s - w * w) / (denom * denom);
        }
        limit[i] = lim_acc / (hbar * hbar);
        at_s[i] = s_acc / (hbar * hbar);
    }
    if (finite_s) *finite_s = at_s;
    return limit;
}

} // namespace geomflux
