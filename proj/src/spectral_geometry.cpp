#include "geomflux/spectral_geometry.hpp"

#include <cmath>
#include <sstream>

namespace geomflux {

namespace {

const Complex kI(0.0, 1.0);

double pow_int(double x, int e) {
    double acc = 1.0;
    for (int k = 0; k < e; ++k) acc *= x;
    return acc;
}

// Index of the largest-modulus entry; strict comparison keeps the lowest
// index on exact ties.
Eigen::Index argmax_modulus(const Vector& v) {
    Eigen::Index best = 0;
    double best_abs = std::abs(v[0]);
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

// Rotates v so entry `anchor` is real positive.
void phase_fix(Vector& v, Eigen::Index anchor) {
    const Complex z = v[anchor];
    const double a = std::abs(z);
    if (a == 0.0)
        throw Error("gauge fix: anchor entry vanishes");
    v *= std::conj(z) / a;
}

struct FixedSystem {
    EigenDecomposition decomp; // eigenvectors already gauge fixed
    std::vector<Eigen::Index> anchors;
    double scale = 0.0;
};

// Eigensystem with every column phase fixed. When `anchors` is supplied the
// anchor entries are reused instead of re-selected; finite-difference
// stencils freeze the anchors chosen at the stencil centre so the section
// stays smooth even when two entry magnitudes are nearly tied.
FixedSystem fixed_eigensystem(const HamiltonianFamily& family, const RealVector& r,
                              const GaugeField* gauge,
                              const std::vector<Eigen::Index>* anchors = nullptr) {
    FixedSystem out;
    const ParameterPoint p{r};
    out.decomp = hermitian_eigendecomposition(family.evaluate(p));
    out.scale = out.decomp.spectral_scale();
    const Eigen::Index dim = out.decomp.eigenvectors.cols();
    out.anchors.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index k = 0; k < dim; ++k) {
        Vector col = out.decomp.eigenvectors.col(k);
        const Eigen::Index a = anchors ? (*anchors)[static_cast<std::size_t>(k)]
                                       : argmax_modulus(col);
        phase_fix(col, a);
        out.anchors[static_cast<std::size_t>(k)] = a;
        out.decomp.eigenvectors.col(k) = col;
    }
    if (gauge) {
        const Complex phase = std::exp(kI * gauge->alpha.value(r));
        out.decomp.eigenvectors *= phase;
    }
    return out;
}

void check_level(const HamiltonianFamily& family, int n) {
    if (n < 0 || n >= family.dim()) {
        std::ostringstream os;
        os << "level index " << n << " out of range for dimension " << family.dim();
        throw DimensionMismatch(os.str());
    }
}

void check_gap_at(const EigenDecomposition& d, int n, const char* where) {
    if (d.min_gap_at(n) < kDegeneracyTolerance * d.spectral_scale()) {
        std::ostringstream os;
        os << where << ": spectrum degenerate at level " << n
           << " (gap " << d.min_gap_at(n) << ")";
        throw DegenerateSpectrum(os.str());
    }
}

void check_gap_full(const EigenDecomposition& d, const char* where) {
    if (d.min_gap() < kDegeneracyTolerance * d.spectral_scale()) {
        std::ostringstream os;
        os << where << ": spectrum has a degenerate pair (min gap " << d.min_gap() << ")";
        throw DegenerateSpectrum(os.str());
    }
}

double fd_step(double coord) { return 1e-4 * std::max(1.0, std::abs(coord)); }

// Richardson-refined central difference of the gauge-fixed eigenvector
// matrix along direction i, anchors frozen at the stencil centre.
Matrix eigvec_matrix_derivative(const HamiltonianFamily& family, const RealVector& r,
                                int i, const GaugeField* gauge,
                                const std::vector<Eigen::Index>& anchors) {
    const double eps = fd_step(r[i]);
    auto vecs = [&](double h) -> Matrix {
        RealVector rs = r;
        rs[i] += h;
        return fixed_eigensystem(family, rs, gauge, &anchors).decomp.eigenvectors;
    };
    const Matrix c1 = (vecs(eps) - vecs(-eps)) / (2.0 * eps);
    const Matrix c2 = (vecs(0.5 * eps) - vecs(-0.5 * eps)) / eps;
    return (4.0 * c2 - c1) / 3.0;
}

Vector state_derivative(const HamiltonianFamily& family, const RealVector& r,
                        int n, int i, const GaugeField* gauge,
                        const std::vector<Eigen::Index>& anchors) {
    return eigvec_matrix_derivative(family, r, i, gauge, anchors).col(n);
}

// Matrix element column f[m] = <m(R)|G|n(R)>.
Vector bra_column(const Matrix& eigvecs, const Matrix& g, const Vector& n_state) {
    return eigvecs.adjoint() * (g * n_state);
}

RealVector omega_sum_over_states(const FixedSystem& sys, const GradientSet& grad,
                                 const Vector& n0, int n, Complex overlap) {
    const Eigen::Index dim = sys.decomp.eigenvalues.size();
    const int d = static_cast<int>(grad.components.size());
    const double abs2 = std::norm(overlap);
    const Vector n_state = sys.decomp.eigenvectors.col(n);
    RealVector omega(d);
    for (int i = 0; i < d; ++i) {
        const Vector f = bra_column(sys.decomp.eigenvectors, grad.components[static_cast<std::size_t>(i)], n_state);
        Complex s(0.0, 0.0);
        for (Eigen::Index m = 0; m < dim; ++m) {
            if (m == n) continue;
            const Complex n0_m = n0.dot(sys.decomp.eigenvectors.col(m));
            s += n0_m * f[m] / (sys.decomp.eigenvalues[n] - sys.decomp.eigenvalues[m]);
        }
        omega[i] = std::imag(s * std::conj(overlap)) / abs2;
    }
    return omega;
}

} // namespace

double PolynomialField::value(const RealVector& r) const {
    double acc = 0.0;
    for (const auto& t : terms) {
        if (static_cast<Eigen::Index>(t.exponents.size()) != r.size())
            throw DimensionMismatch("PolynomialField: term arity does not match point dimension");
        double term = t.coeff;
        for (Eigen::Index i = 0; i < r.size(); ++i)
            term *= pow_int(r[i], t.exponents[static_cast<std::size_t>(i)]);
        acc += term;
    }
    return acc;
}

RealVector PolynomialField::grad(const RealVector& r) const {
    RealVector g = RealVector::Zero(r.size());
    for (const auto& t : terms) {
        if (static_cast<Eigen::Index>(t.exponents.size()) != r.size())
            throw DimensionMismatch("PolynomialField: term arity does not match point dimension");
        for (Eigen::Index k = 0; k < r.size(); ++k) {
            const int ek = t.exponents[static_cast<std::size_t>(k)];
            if (ek == 0) continue;
            double term = t.coeff * ek * pow_int(r[k], ek - 1);
            for (Eigen::Index i = 0; i < r.size(); ++i) {
                if (i == k) continue;
                term *= pow_int(r[i], t.exponents[static_cast<std::size_t>(i)]);
            }
            g[k] += term;
        }
    }
    return g;
}

ParameterPath::ParameterPath(std::vector<ParameterPoint> pts, bool closed_loop)
    : samples_(std::move(pts)), closed_(closed_loop) {
    if (samples_.size() < 2)
        throw DimensionMismatch("ParameterPath: need at least two samples");
    const Eigen::Index d = samples_.front().dim();
    for (const auto& p : samples_)
        if (p.dim() != d)
            throw DimensionMismatch("ParameterPath: inconsistent sample dimensions");
    if (closed_) {
        const double gap = (samples_.front().coords() - samples_.back().coords()).norm();
        if (gap > 1e-12)
            throw PathNotClosed("ParameterPath: closed flag set but endpoints differ");
    }
}

EigenDecomposition fixed_eigensystem_at(const HamiltonianFamily& family,
                                        const ParameterPoint& R, const GaugeField* gauge) {
    return fixed_eigensystem(family, R.coords(), gauge).decomp;
}

LabeledEigenpair eigen_at(const HamiltonianFamily& family, const ParameterPoint& R,
                          int n, const GaugeField* gauge) {
    check_level(family, n);
    const FixedSystem sys = fixed_eigensystem(family, R.coords(), gauge);
    check_gap_at(sys.decomp, n, "eigen_at");
    LabeledEigenpair out;
    out.level = n;
    out.energy = sys.decomp.eigenvalues[n];
    out.state = sys.decomp.eigenvectors.col(n);
    return out;
}

ReferenceEigenstate reference_state(const HamiltonianFamily& family,
                                    const ParameterPoint& R, const ParameterPoint& R0,
                                    int n, const GaugeField* gauge) {
    const LabeledEigenpair at_r = eigen_at(family, R, n, gauge);
    const LabeledEigenpair at_r0 = eigen_at(family, R0, n, gauge);
    const Complex overlap = at_r0.state.dot(at_r.state); // <n(R0)|n(R)>
    if (std::abs(overlap) <= kReferenceOverlapTolerance)
        throw ReferenceOverlapVanishing("reference_state: overlap with base point vanishes");
    ReferenceEigenstate out{R0, Vector(), overlap};
    // chi = (<n(R)|n(R0)> / |.|) |n(R)>
    out.state = (std::conj(overlap) / std::abs(overlap)) * at_r.state;
    return out;
}

RealVector berry_connection(const HamiltonianFamily& family, const ParameterPoint& R,
                            int n, const GaugeField* gauge) {
    check_level(family, n);
    const FixedSystem centre = fixed_eigensystem(family, R.coords(), gauge);
    check_gap_at(centre.decomp, n, "berry_connection");
    const Vector n_state = centre.decomp.eigenvectors.col(n);
    RealVector a(family.param_dim());
    for (int i = 0; i < family.param_dim(); ++i) {
        const Vector dn = state_derivative(family, R.coords(), n, i, gauge, centre.anchors);
        // A_i = i<n|d_i n>; the real part of <n|d_i n> is norm drift noise.
        a[i] = -std::imag(n_state.dot(dn));
    }
    return a;
}

std::vector<Matrix> b_operator(const HamiltonianFamily& family, const ParameterPoint& R,
                               const ParameterPoint& basis_ref, const GaugeField* gauge) {
    const FixedSystem centre = fixed_eigensystem(family, R.coords(), gauge);
    check_gap_full(centre.decomp, "b_operator");
    const FixedSystem ref = fixed_eigensystem(family, basis_ref.coords(), gauge);
    check_gap_full(ref.decomp, "b_operator (reference basis)");
    const Matrix ref_adj = ref.decomp.eigenvectors.adjoint();
    const Matrix u_centre_adj = (centre.decomp.eigenvectors * ref_adj).adjoint();

    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(family.param_dim()));
    for (int i = 0; i < family.param_dim(); ++i) {
        const Matrix dv = eigvec_matrix_derivative(family, R.coords(), i, gauge, centre.anchors);
        const Matrix du = dv * ref_adj;
        Matrix b = -kI * (du * u_centre_adj);
        // (d_i U) U^dag is anti-Hermitian up to the finite-difference
        // truncation; reject anything past the contract and symmetrize.
        double max_abs = 1.0, defect = 0.0;
        for (Eigen::Index p = 0; p < b.rows(); ++p)
            for (Eigen::Index q = 0; q < b.cols(); ++q) {
                max_abs = std::max(max_abs, std::abs(b(p, q)));
                defect = std::max(defect, std::abs(b(p, q) - std::conj(b(q, p))));
            }
        if (defect > 1e-8 * max_abs)
            throw Error("b_operator: Hermiticity defect above tolerance");
        out.push_back(0.5 * (b + b.adjoint().eval()));
    }
    return out;
}

FluctuationData fluctuation_data(const HamiltonianFamily& family,
                                 const ParameterPoint& R, const ParameterPoint& R0,
                                 int n, const GaugeField* gauge) {
    check_level(family, n);
    const LabeledEigenpair at_r = eigen_at(family, R, n, gauge);
    const LabeledEigenpair at_r0 = eigen_at(family, R0, n, gauge);
    const Complex overlap = at_r0.state.dot(at_r.state);
    if (std::abs(overlap) <= kReferenceOverlapTolerance)
        throw ReferenceOverlapVanishing("fluctuation_data: overlap with R0 vanishes");

    FluctuationData fd;
    fd.overlap = overlap;
    fd.b_ops = b_operator(family, R, R, gauge);
    const int d = family.param_dim();
    fd.mean_b.resize(d);
    fd.delta_b.resize(d);
    fd.lambda.resize(d);
    fd.perp_states.resize(static_cast<std::size_t>(d));
    fd.degenerate_direction.assign(static_cast<std::size_t>(d), false);
    for (int i = 0; i < d; ++i) {
        const Matrix& b = fd.b_ops[static_cast<std::size_t>(i)];
        const Vector bn = b * at_r.state;
        const double mean = std::real(at_r.state.dot(bn));
        fd.mean_b[i] = mean;
        // Residual after removing the mean; its norm is the uncertainty and
        // its direction is the orthogonal state, so <n|n_perp> = 0 exactly.
        const Vector w = bn - mean * at_r.state;
        const double db = w.norm();
        fd.delta_b[i] = db;
        if (db > FluctuationData::kDeltaBFloor) {
            const Vector perp = w / db;
            fd.perp_states[static_cast<std::size_t>(i)] = perp;
            fd.lambda[i] = std::real(at_r0.state.dot(perp) * std::conj(overlap));
        } else {
            fd.degenerate_direction[static_cast<std::size_t>(i)] = true;
            fd.lambda[i] = 0.0;
        }
    }
    return fd;
}

GaugePotentials gauge_potentials(const HamiltonianFamily& family,
                                 const ParameterPoint& R, const ParameterPoint& R0,
                                 int n, OmegaRoute route, const GaugeField* gauge) {
    check_level(family, n);
    const FixedSystem sys = fixed_eigensystem(family, R.coords(), gauge);
    check_gap_at(sys.decomp, n, "gauge_potentials");
    const LabeledEigenpair at_r0 = eigen_at(family, R0, n, gauge);
    const Vector n_state = sys.decomp.eigenvectors.col(n);
    const Complex overlap = at_r0.state.dot(n_state);
    if (std::abs(overlap) <= kReferenceOverlapTolerance)
        throw ReferenceOverlapVanishing("gauge_potentials: overlap with R0 vanishes");
    const double abs2 = std::norm(overlap);
    const int d = family.param_dim();

    GaugePotentials out;
    out.A.resize(d);
    out.P.resize(d);
    out.Omega.resize(d);

    if (route == OmegaRoute::AP) {
        for (int i = 0; i < d; ++i) {
            const Vector dn = state_derivative(family, R.coords(), n, i, gauge, sys.anchors);
            out.A[i] = -std::imag(n_state.dot(dn));
            out.P[i] = -std::imag(at_r0.state.dot(dn) * std::conj(overlap)) / abs2;
            out.Omega[i] = out.A[i] - out.P[i];
        }
        return out;
    }

    if (route == OmegaRoute::SumOverStates) {
        out.Omega = omega_sum_over_states(sys, family.gradient(R), at_r0.state, n, overlap);
    } else if (route == OmegaRoute::Fluctuation || route == OmegaRoute::Metric) {
        const FluctuationData fd = fluctuation_data(family, R, R0, n, gauge);
        RealVector scale(d);
        if (route == OmegaRoute::Fluctuation) {
            for (int i = 0; i < d; ++i) scale[i] = fd.delta_b[i];
        } else {
            const GeometricTensor t =
                metric_and_geometric_tensor(family, R, n, MetricRoute::ForceStates, gauge);
            for (int i = 0; i < d; ++i) scale[i] = std::sqrt(std::max(t.g(i, i), 0.0));
        }
        bool need_fallback = false;
        for (int i = 0; i < d; ++i) {
            out.Omega[i] = fd.lambda[i] * scale[i] / abs2;
            if (fd.degenerate_direction[static_cast<std::size_t>(i)]) need_fallback = true;
        }
        if (need_fallback) {
            // Directions with vanishing delta_b carry no fluctuation signal;
            // fill them from the energy-denominator sum instead.
            const RealVector sos =
                omega_sum_over_states(sys, family.gradient(R), at_r0.state, n, overlap);
            for (int i = 0; i < d; ++i)
                if (fd.degenerate_direction[static_cast<std::size_t>(i)]) out.Omega[i] = sos[i];
        }
    }

    out.A = berry_connection(family, R, n, gauge);
    out.P = out.A - out.Omega;
    return out;
}

GeometricTensor metric_and_geometric_tensor(const HamiltonianFamily& family,
                                            const ParameterPoint& R, int n,
                                            MetricRoute route, const GaugeField* gauge) {
    check_level(family, n);
    const FixedSystem sys = fixed_eigensystem(family, R.coords(), gauge);
    check_gap_at(sys.decomp, n, "metric_and_geometric_tensor");
    const int d = family.param_dim();
    const Vector n_state = sys.decomp.eigenvectors.col(n);
    Eigen::MatrixXcd t(d, d);

    if (route == MetricRoute::Derivative) {
        std::vector<Vector> dn;
        dn.reserve(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            dn.push_back(state_derivative(family, R.coords(), n, i, gauge, sys.anchors));
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                const Complex tij = dn[static_cast<std::size_t>(i)].dot(dn[static_cast<std::size_t>(j)]) -
                                    dn[static_cast<std::size_t>(i)].dot(n_state) *
                                        n_state.dot(dn[static_cast<std::size_t>(j)]);
                t(i, j) = tij;
                t(j, i) = std::conj(tij);
            }
        }
    } else {
        const GradientSet grad = family.gradient(R);
        const Eigen::Index dim = sys.decomp.eigenvalues.size();
        std::vector<Vector> f;
        f.reserve(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            f.push_back(bra_column(sys.decomp.eigenvectors,
                                   grad.components[static_cast<std::size_t>(i)], n_state));
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                Complex acc(0.0, 0.0);
                for (Eigen::Index m = 0; m < dim; ++m) {
                    if (m == n) continue;
                    const double gap = sys.decomp.eigenvalues[n] - sys.decomp.eigenvalues[m];
                    acc += std::conj(f[static_cast<std::size_t>(i)][m]) *
                           f[static_cast<std::size_t>(j)][m] / (gap * gap);
                }
                t(i, j) = acc;
                t(j, i) = std::conj(acc);
            }
        }
    }

    GeometricTensor out;
    out.g = t.real();
    out.v = t.imag();
    return out;
}

namespace {

// Omega vector at one path sample for the chosen route.
RealVector omega_at(const HamiltonianFamily& family, const ParameterPoint& R,
                    const ParameterPoint& R0, int n, OmegaRoute route,
                    const GaugeField* gauge) {
    return gauge_potentials(family, R, R0, n, route, gauge).Omega;
}

struct PathData {
    std::vector<RealVector> omegas;
    std::vector<double> arc; // cumulative arc length at each sample
};

PathData path_omegas(const HamiltonianFamily& family,
                     const std::vector<ParameterPoint>& pts, int n, OmegaRoute route,
                     const GaugeField* gauge) {
    PathData out;
    out.omegas.resize(pts.size());
    out.arc.resize(pts.size(), 0.0);
    for (std::size_t k = 1; k < pts.size(); ++k)
        out.arc[k] = out.arc[k - 1] + (pts[k].coords() - pts[k - 1].coords()).norm();

    // Tracking check between consecutive samples.
    Vector prev = eigen_at(family, pts[0], n, gauge).state;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const Vector cur = eigen_at(family, pts[k], n, gauge).state;
        if (std::norm(prev.dot(cur)) <= kLevelTrackingThreshold) {
            std::ostringstream os;
            os << "open_path_phase: level tracking lost between samples "
               << (k - 1) << " and " << k;
            throw LevelTrackingLost(os.str());
        }
        prev = cur;
    }

    const ParameterPoint& r0 = pts[0];
    for (std::size_t k = 0; k < pts.size(); ++k) {
        try {
            out.omegas[k] = omega_at(family, pts[k], r0, n, route, gauge);
        } catch (const ReferenceOverlapVanishing&) {
            std::ostringstream os;
            os << "open_path_phase: reference overlap vanishes at arc length " << out.arc[k];
            throw ReferenceOverlapVanishing(os.str(), out.arc[k]);
        }
    }
    return out;
}

double trapezoid_line_integral(const std::vector<ParameterPoint>& pts,
                               const std::vector<RealVector>& omegas) {
    std::vector<double> contributions;
    contributions.reserve(pts.size());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const RealVector dr = pts[k + 1].coords() - pts[k].coords();
        contributions.push_back(0.5 * (omegas[k] + omegas[k + 1]).dot(dr));
    }
    return pairwise_sum(contributions);
}

std::vector<ParameterPoint> midpoint_refine(const std::vector<ParameterPoint>& pts) {
    std::vector<ParameterPoint> out;
    out.reserve(2 * pts.size() - 1);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        out.push_back(pts[k]);
        out.push_back(ParameterPoint(RealVector(
            0.5 * (pts[k].coords() + pts[k + 1].coords()))));
    }
    out.push_back(pts.back());
    return out;
}

} // namespace

PathPhase open_path_phase(const HamiltonianFamily& family, const ParameterPath& path,
                          int n, OmegaRoute route, const GaugeField* gauge, bool refine) {
    const auto& pts = path.samples();
    const PathData base = path_omegas(family, pts, n, route, gauge);
    const double coarse = trapezoid_line_integral(pts, base.omegas);
    PathPhase out;
    if (!refine) {
        out.phase = coarse;
        out.error_estimate = std::abs(coarse) * 1e-3 + 1e-12; // no refinement data
        return out;
    }
    const std::vector<ParameterPoint> fine_pts = midpoint_refine(pts);
    const PathData fine = path_omegas(family, fine_pts, n, route, gauge);
    const double halved = trapezoid_line_integral(fine_pts, fine.omegas);
    out.phase = (4.0 * halved - coarse) / 3.0;
    out.error_estimate = std::abs(halved - coarse) / 3.0 + 1e-14;
    return out;
}

double cyclic_berry_phase(const HamiltonianFamily& family, const ParameterPath& loop,
                          int n, const GaugeField* gauge) {
    if (!loop.closed())
        throw PathNotClosed("cyclic_berry_phase: path is not a closed loop");
    const auto& pts = loop.samples();

    std::vector<double> segment_phases;
    segment_phases.reserve(pts.size());
    Complex product(1.0, 0.0);
    Vector prev = eigen_at(family, pts[0], n, gauge).state;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const Vector cur = eigen_at(family, pts[k], n, gauge).state;
        const Complex ov = prev.dot(cur);
        if (std::norm(ov) <= kLevelTrackingThreshold) {
            std::ostringstream os;
            os << "cyclic_berry_phase: level tracking lost between samples "
               << (k - 1) << " and " << k;
            throw LevelTrackingLost(os.str());
        }
        segment_phases.push_back(-std::arg(ov));
        product *= ov / std::abs(ov);
        prev = cur;
    }
    const double phase = pairwise_sum(segment_phases);
    // The folded overlap product must agree with the accumulated transport
    // phase modulo 2pi; a mismatch would mean a bookkeeping bug.
    const double folded = -std::arg(product);
    if (angle_distance(phase, folded) > 1e-6)
        throw Error("cyclic_berry_phase: transport sum and overlap product disagree");
    return phase;
}

GaugeCheckReport gauge_transform_check(const HamiltonianFamily& family,
                                       const ParameterPoint& R, const ParameterPoint& R0,
                                       int n, const PolynomialField& alpha) {
    const GaugePotentials plain = gauge_potentials(family, R, R0, n, OmegaRoute::AP);
    const GaugeField gf{alpha};
    const GaugePotentials rotated = gauge_potentials(family, R, R0, n, OmegaRoute::AP, &gf);
    const RealVector shift = alpha.grad(R.coords());
    GaugeCheckReport rep;
    for (int i = 0; i < family.param_dim(); ++i) {
        rep.max_a_deviation = std::max(rep.max_a_deviation,
                                       std::abs(rotated.A[i] - (plain.A[i] - shift[i])));
        rep.max_p_deviation = std::max(rep.max_p_deviation,
                                       std::abs(rotated.P[i] - (plain.P[i] - shift[i])));
        rep.max_omega_deviation = std::max(rep.max_omega_deviation,
                                           std::abs(rotated.Omega[i] - plain.Omega[i]));
    }
    return rep;
}

} // namespace geomflux
