#include "geomflux/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "geomflux/classical.hpp"
#include "geomflux/correlation.hpp"
#include "geomflux/spectral_geometry.hpp"
#include "geomflux/util.hpp"

namespace geomflux {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Portable normal deviates: Box-Muller on top of raw engine words, so the
// streams are identical on every platform.
struct NormalStream {
    std::mt19937_64 rng;
    double cached = 0.0;
    bool have_cached = false;

    explicit NormalStream(std::uint64_t s) : rng(s) {}

    double uniform() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

    double next() {
        if (have_cached) {
            have_cached = false;
            return cached;
        }
        const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        cached = mag * std::sin(2.0 * kPi * u2);
        have_cached = true;
        return mag * std::cos(2.0 * kPi * u2);
    }
};

RealVector normal_point(NormalStream& ns, int dims, double scale) {
    RealVector out(dims);
    for (int i = 0; i < dims; ++i) out[i] = scale * ns.next();
    return out;
}

ParameterPath spin_circle(double theta0, long count) {
    std::vector<ParameterPoint> pts;
    pts.reserve(static_cast<std::size_t>(count) + 1);
    for (long k = 0; k < count; ++k) {
        const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(count);
        pts.push_back(ParameterPoint{std::sin(theta0) * std::cos(phi),
                                     std::sin(theta0) * std::sin(phi), std::cos(theta0)});
    }
    pts.push_back(pts.front());
    return ParameterPath(std::move(pts), true);
}

ParameterPath param_circle(const RealVector& center, double radius, int axis_a, int axis_b,
                           long count) {
    std::vector<ParameterPoint> pts;
    pts.reserve(static_cast<std::size_t>(count) + 1);
    for (long k = 0; k < count; ++k) {
        const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(count);
        RealVector r = center;
        r[axis_a] += radius * std::cos(phi);
        r[axis_b] += radius * std::sin(phi);
        pts.emplace_back(std::move(r));
    }
    pts.push_back(pts.front());
    return ParameterPath(std::move(pts), true);
}

ParameterPath segment_path(const RealVector& a, const RealVector& b, long count) {
    std::vector<ParameterPoint> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(count - 1);
        pts.emplace_back(RealVector(a + f * (b - a)));
    }
    return ParameterPath(std::move(pts), false);
}

// Independent discrete holonomy oracle: product of raw eigenvector overlaps
// around the loop. Arbitrary per-point eigenvector phases cancel because each
// state enters once as bra and once as ket.
double overlap_product_phase(const HamiltonianFamily& family, const ParameterPath& loop,
                             int n) {
    const std::size_t distinct = loop.size() - 1; // closing duplicate excluded
    std::vector<Vector> states(distinct);
    for (std::size_t k = 0; k < distinct; ++k) {
        const EigenDecomposition decomp =
            hermitian_eigendecomposition(family.evaluate(loop.samples()[k]));
        states[k] = decomp.eigenvectors.col(n);
    }
    Complex product(1.0, 0.0);
    for (std::size_t k = 0; k < distinct; ++k) {
        Complex step = states[k].dot(states[(k + 1) % distinct]);
        product *= step / std::abs(step);
    }
    return -std::arg(product);
}

std::string brief(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// ---- shared random ensemble (criteria 3, 5, 7, 8) ----

struct EnsemblePair {
    int family_index = 0;
    RealVector r;
    RealVector r0;
};

constexpr int kEnsembleFamilies = 20;
constexpr int kPairsPerFamily = 20;
constexpr int kEnsembleLevel = 2; // middle level of the 5x5 families

std::vector<HamiltonianFamily> ensemble_families() {
    std::vector<HamiltonianFamily> families;
    families.reserve(kEnsembleFamilies);
    for (int f = 0; f < kEnsembleFamilies; ++f)
        families.push_back(
            HamiltonianFamily::seeded_random_polynomial(5, 3, 100 + static_cast<unsigned>(f)));
    return families;
}

// Draw conditions: both endpoints keep every eigenvalue gap above 5% of the
// spectral scale (the operator construction needs a fully nondegenerate
// basis), and the level-n overlap stays above 1e-3.
std::vector<EnsemblePair> draw_ensemble(const std::vector<HamiltonianFamily>& families,
                                        std::uint64_t seed) {
    std::vector<EnsemblePair> pairs;
    pairs.reserve(static_cast<std::size_t>(kEnsembleFamilies * kPairsPerFamily));
    for (int f = 0; f < kEnsembleFamilies; ++f) {
        NormalStream ns(stream_seed(seed, 5000 + static_cast<std::uint64_t>(f)));
        int accepted = 0;
        while (accepted < kPairsPerFamily) {
            EnsemblePair pair;
            pair.family_index = f;
            pair.r = normal_point(ns, 3, 0.5);
            pair.r0 = normal_point(ns, 3, 0.5);
            const EigenDecomposition at_r =
                hermitian_eigendecomposition(families[static_cast<std::size_t>(f)].evaluate(
                    ParameterPoint(pair.r)));
            const EigenDecomposition at_r0 =
                hermitian_eigendecomposition(families[static_cast<std::size_t>(f)].evaluate(
                    ParameterPoint(pair.r0)));
            if (at_r.min_gap() < 0.05 * at_r.spectral_scale()) continue;
            if (at_r0.min_gap() < 0.05 * at_r0.spectral_scale()) continue;
            const double overlap =
                std::abs(at_r0.eigenvectors.col(kEnsembleLevel)
                             .dot(at_r.eigenvectors.col(kEnsembleLevel)));
            if (overlap <= 1e-3) continue;
            pairs.push_back(std::move(pair));
            ++accepted;
        }
    }
    return pairs;
}

// ---- criteria ----

CriterionResult criterion_solid_angle() {
    CriterionResult res;
    res.id = 1;
    res.name = "spin cyclic phase vs solid-angle closed form";
    res.tolerance = 1e-6;
    const HamiltonianFamily family = HamiltonianFamily::spin(0.5);
    const long samples = 2048;
    double worst = 0.0;
    for (double theta0 : {0.5, kPi / 2.0, 2.0}) {
        const ParameterPath loop = spin_circle(theta0, samples);
        const double magnitude = kPi * (1.0 - std::cos(theta0)); // half the solid angle
        for (int n : {0, 1}) {
            const double phase = cyclic_berry_phase(family, loop, n);
            const double oracle = overlap_product_phase(family, loop, n);
            const double sign =
                std::abs(wrap_angle(oracle - magnitude)) <=
                        std::abs(wrap_angle(oracle + magnitude))
                    ? 1.0
                    : -1.0;
            worst = std::max(worst, std::abs(wrap_angle(phase - sign * magnitude)));
        }
    }
    res.max_residual = worst;
    res.passed = worst <= res.tolerance;
    res.detail = "3 colatitudes x 2 levels at 2048 samples";
    return res;
}

CriterionResult criterion_open_equals_cyclic() {
    CriterionResult res;
    res.id = 2;
    res.name = "open-path phase on closed loops equals cyclic phase mod 2pi";
    res.tolerance = 1e-6;
    const long samples = 2048;
    double worst = 0.0;
    int cases = 0;

    auto check = [&](const HamiltonianFamily& family, const ParameterPath& loop, int n) {
        const PathPhase open = open_path_phase(family, loop, n, OmegaRoute::AP);
        const double cyc = cyclic_berry_phase(family, loop, n);
        worst = std::max(worst, std::abs(wrap_angle(open.phase - cyc)));
        ++cases;
    };

    const HamiltonianFamily spin = HamiltonianFamily::spin(0.5);
    check(spin, spin_circle(0.5, samples), 0);
    check(spin, spin_circle(2.0, samples), 0);

    RealVector center(3);
    center << 0.8, 0.15, -0.4;
    const HamiltonianFamily random_a = HamiltonianFamily::seeded_random_polynomial(4, 3, 7);
    check(random_a, param_circle(center, 0.35, 0, 1, samples), 1);
    RealVector center_b(3);
    center_b << -0.3, 0.6, 0.2;
    const HamiltonianFamily random_b = HamiltonianFamily::seeded_random_polynomial(4, 3, 8);
    check(random_b, param_circle(center_b, 0.3, 1, 2, samples), 2);

    res.max_residual = worst;
    res.passed = worst <= res.tolerance;
    std::ostringstream os;
    os << cases << " loops at " << samples << " samples";
    res.detail = os.str();
    return res;
}

CriterionResult criterion_omega_routes(const std::vector<HamiltonianFamily>& families,
                                       const std::vector<EnsemblePair>& pairs) {
    CriterionResult res;
    res.id = 3;
    res.name = "omega route equivalence over the random ensemble";
    res.tolerance = 1e-7;
    double worst = 0.0;
    for (const EnsemblePair& pair : pairs) {
        const HamiltonianFamily& family =
            families[static_cast<std::size_t>(pair.family_index)];
        const ParameterPoint r(pair.r), r0(pair.r0);
        const RealVector base =
            gauge_potentials(family, r, r0, kEnsembleLevel, OmegaRoute::AP).Omega;
        for (OmegaRoute route : {OmegaRoute::Fluctuation, OmegaRoute::SumOverStates,
                                 OmegaRoute::Metric}) {
            const RealVector other =
                gauge_potentials(family, r, r0, kEnsembleLevel, route).Omega;
            worst = std::max(worst, (base - other).cwiseAbs().maxCoeff());
        }
    }
    res.max_residual = worst;
    res.passed = worst <= res.tolerance;
    std::ostringstream os;
    os << pairs.size() << " (R, R0) pairs, 4 routes";
    res.detail = os.str();
    return res;
}

PolynomialField random_polynomial_field(int dims, std::uint64_t seed) {
    NormalStream ns(seed);
    PolynomialField field;
    field.dims = dims;
    field.terms.push_back({0.5 * ns.next(), std::vector<int>(static_cast<std::size_t>(dims), 0)});
    for (int i = 0; i < dims; ++i) {
        std::vector<int> exps(static_cast<std::size_t>(dims), 0);
        exps[static_cast<std::size_t>(i)] = 1;
        field.terms.push_back({0.5 * ns.next(), exps});
    }
    for (int i = 0; i < dims; ++i)
        for (int j = i; j < dims; ++j) {
            std::vector<int> exps(static_cast<std::size_t>(dims), 0);
            exps[static_cast<std::size_t>(i)] += 1;
            exps[static_cast<std::size_t>(j)] += 1;
            field.terms.push_back({0.25 * ns.next(), exps});
        }
    return field;
}

CriterionResult criterion_gauge_invariance(std::uint64_t seed) {
    CriterionResult res;
    res.id = 4;
    res.name = "gauge invariance of omega and both phases";
    res.tolerance = 1e-9;

    struct Case {
        HamiltonianFamily family;
        RealVector r, r0, arc_end;
        int level;
    };
    std::vector<Case> cases;
    {
        RealVector r(3), r0(3), end(3);
        r << 0.7, -0.4, 0.6;
        r0 << 0.2, 0.5, 0.9;
        end << 0.1, 0.8, 0.5;
        cases.push_back({HamiltonianFamily::spin(0.5), r, r0, end, 0});
    }
    {
        RealVector r(2), r0(2), end(2);
        r << 0.7, 0.4;
        r0 << 0.3, -0.5;
        end << -0.2, 0.8;
        cases.push_back({HamiltonianFamily::avoided_crossing(0.3), r, r0, end, 0});
    }
    {
        RealVector r(2), r0(2), end(2);
        r << 0.4, -0.6;
        r0 << -0.2, 0.3;
        end << 0.9, 0.1;
        cases.push_back({HamiltonianFamily::seeded_random_polynomial(4, 2, 21), r, r0, end, 1});
    }

    double worst = 0.0;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const Case& one = cases[ci];
        const int dims = static_cast<int>(one.r.size());
        const ParameterPath arc = segment_path(one.r0, one.arc_end, 64);
        RealVector loop_center = one.r;
        const ParameterPath loop = param_circle(loop_center, 0.25, 0, 1, 128);

        const double open_base =
            open_path_phase(one.family, arc, one.level, OmegaRoute::AP).phase;
        const double cyclic_base = cyclic_berry_phase(one.family, loop, one.level);

        for (int t = 0; t < 10; ++t) {
            const PolynomialField alpha = random_polynomial_field(
                dims, stream_seed(seed, 7000 + ci * 16 + static_cast<std::uint64_t>(t)));
            const GaugeCheckReport gc = gauge_transform_check(
                one.family, ParameterPoint(one.r), ParameterPoint(one.r0), one.level, alpha);
            worst = std::max({worst, gc.max_a_deviation, gc.max_p_deviation,
                              gc.max_omega_deviation});

            const GaugeField gauge{alpha};
            const double open_gauged =
                open_path_phase(one.family, arc, one.level, OmegaRoute::AP, &gauge).phase;
            worst = std::max(worst, std::abs(open_gauged - open_base));
            const double cyclic_gauged =
                cyclic_berry_phase(one.family, loop, one.level, &gauge);
            worst = std::max(worst, std::abs(wrap_angle(cyclic_gauged - cyclic_base)));
        }
    }
    res.max_residual = worst;
    res.passed = worst <= res.tolerance;
    res.detail = "3 families x 10 polynomial phase fields";
    return res;
}

CriterionResult criterion_theorem(const std::vector<HamiltonianFamily>& families,
                                  const std::vector<EnsemblePair>& pairs) {
    CriterionResult res;
    res.id = 5;
    res.name = "fluctuation-correlation theorem and quadrature cross-check";
    res.tolerance = 1.0; // normalized: parts are value / part-tolerance
    const std::vector<double> s_values = {0.2, 0.1, 0.05};
    double worst_residual = 0.0; // tolerance 1e-8
    double worst_ratio = 0.0;    // tolerance 1 (reported-error units)
    for (const EnsemblePair& pair : pairs) {
        const HamiltonianFamily& family =
            families[static_cast<std::size_t>(pair.family_index)];
        const TheoremReport rep = theorem_check(family, ParameterPoint(pair.r),
                                                ParameterPoint(pair.r0), kEnsembleLevel,
                                                s_values);
        worst_residual = std::max(worst_residual, rep.residuals.maxCoeff());
        for (const TheoremSample& sample : rep.samples)
            for (Eigen::Index i = 0; i < sample.mode_sum.size(); ++i)
                worst_ratio = std::max(
                    worst_ratio, std::abs(sample.quadrature[i] - sample.mode_sum[i]) /
                                     std::max(sample.quadrature_error[i], 1e-300));
    }
    res.max_residual = std::max(worst_residual / 1e-8, worst_ratio / 1.0);
    res.passed = res.max_residual <= res.tolerance;
    res.detail = "residual " + brief(worst_residual) + " (tol 1e-8); quadrature ratio " +
                 brief(worst_ratio) + " (tol 1)";
    return res;
}

CriterionResult criterion_q_forms() {
    CriterionResult res;
    res.id = 6;
    res.name = "spectral vs Heisenberg correlation difference";
    res.tolerance = 1e-10;
    RealVector times(100);
    for (int j = 0; j < 100; ++j) times[j] = 20.0 * j / 99.0;

    struct Case {
        HamiltonianFamily family;
        RealVector r, r0;
        int level;
    };
    std::vector<Case> cases;
    {
        RealVector r(3), r0(3);
        r << 0.6, -0.3, 0.8;
        r0 << 0.1, 0.4, 0.9;
        cases.push_back({HamiltonianFamily::spin(0.5), r, r0, 0});
    }
    {
        RealVector r(2), r0(2);
        r << 0.7, 0.4;
        r0 << 0.3, -0.5;
        cases.push_back({HamiltonianFamily::avoided_crossing(0.25), r, r0, 1});
    }
    {
        RealVector r(3), r0(3);
        r << 0.4, 0.2, -0.5;
        r0 << -0.1, 0.6, 0.3;
        cases.push_back({HamiltonianFamily::seeded_random_polynomial(5, 3, 31), r, r0, 2});
    }

    double worst = 0.0;
    for (const Case& one : cases) {
        const CorrelationTrace spectral = q_correlation(
            one.family, ParameterPoint(one.r), ParameterPoint(one.r0), one.level, times,
            QForm::Spectral);
        const CorrelationTrace heisenberg = q_correlation(
            one.family, ParameterPoint(one.r), ParameterPoint(one.r0), one.level, times,
            QForm::Heisenberg);
        for (std::size_t i = 0; i < spectral.q.size(); ++i)
            worst = std::max(worst,
                             (spectral.q[i] - heisenberg.q[i]).cwiseAbs().maxCoeff());
    }
    res.max_residual = worst;
    res.passed = worst <= res.tolerance;
    res.detail = "3 cases x 100 times";
    return res;
}

CriterionResult criterion_metric(const std::vector<HamiltonianFamily>& families,
                                 const std::vector<EnsemblePair>& pairs) {
    CriterionResult res;
    res.id = 7;
    res.name = "metric identities and spin closed forms";
    res.tolerance = 1.0; // normalized over four sub-checks
    double worst_db = 0.0;     // (delta B_i)^2 vs g_ii, tol 1e-8
    double worst_routes = 0.0; // derivative vs force-states tensors, tol 1e-7
    double worst_force = 0.0;  // force-correlation g_ii route, tol 1e-8
    double worst_spin = 0.0;   // closed-form g_theta/g_phi, tol 1e-7

    for (const EnsemblePair& pair : pairs) {
        const HamiltonianFamily& family =
            families[static_cast<std::size_t>(pair.family_index)];
        const ParameterPoint r(pair.r), r0(pair.r0);
        const GeometricTensor derivative =
            metric_and_geometric_tensor(family, r, kEnsembleLevel, MetricRoute::Derivative);
        const GeometricTensor force =
            metric_and_geometric_tensor(family, r, kEnsembleLevel, MetricRoute::ForceStates);
        worst_routes = std::max(worst_routes,
                                (derivative.g - force.g).cwiseAbs().maxCoeff());
        worst_routes = std::max(worst_routes,
                                (derivative.v - force.v).cwiseAbs().maxCoeff());

        const FluctuationData fluct = fluctuation_data(family, r, r0, kEnsembleLevel);
        for (Eigen::Index i = 0; i < fluct.delta_b.size(); ++i)
            worst_db = std::max(worst_db, std::abs(fluct.delta_b[i] * fluct.delta_b[i] -
                                                   derivative.g(i, i)));

        const RealVector gii = gii_from_force_correlation(family, r, kEnsembleLevel, 0.1);
        for (Eigen::Index i = 0; i < gii.size(); ++i)
            worst_force = std::max(worst_force, std::abs(gii[i] - derivative.g(i, i)));
    }

    const HamiltonianFamily spin = HamiltonianFamily::spin(0.5);
    for (double radius : {1.0, 1.7}) {
        for (double theta : {0.4, 1.1, 2.3}) {
            for (double phi : {0.3, 2.1}) {
                RealVector r(3);
                r << radius * std::sin(theta) * std::cos(phi),
                    radius * std::sin(theta) * std::sin(phi), radius * std::cos(theta);
                const RealMatrix g =
                    metric_and_geometric_tensor(spin, ParameterPoint(r), 0,
                                                MetricRoute::Derivative)
                        .g;
                RealVector t_theta(3), t_phi(3);
                t_theta << radius * std::cos(theta) * std::cos(phi),
                    radius * std::cos(theta) * std::sin(phi), -radius * std::sin(theta);
                t_phi << -radius * std::sin(theta) * std::sin(phi),
                    radius * std::sin(theta) * std::cos(phi), 0.0;
                const double g_theta = t_theta.dot(g * t_theta);
                const double g_phi = t_phi.dot(g * t_phi);
                worst_spin = std::max(worst_spin, std::abs(g_theta - 0.25));
                worst_spin = std::max(
                    worst_spin,
                    std::abs(g_phi - 0.25 * std::sin(theta) * std::sin(theta)));
            }
        }
    }

    res.max_residual = std::max({worst_db / 1e-8, worst_routes / 1e-7, worst_force / 1e-8,
                                 worst_spin / 1e-7});
    res.passed = res.max_residual <= res.tolerance;
    res.detail = "dB^2 " + brief(worst_db) + " (1e-8); routes " + brief(worst_routes) +
                 " (1e-7); force " + brief(worst_force) + " (1e-8); spin " +
                 brief(worst_spin) + " (1e-7)";
    return res;
}

CriterionResult criterion_susceptibility(const std::vector<HamiltonianFamily>& families,
                                         const std::vector<EnsemblePair>& pairs) {
    CriterionResult res;
    res.id = 8;
    res.name = "susceptibility difference limit matches the theorem";
    res.tolerance = 1e-8;
    const std::vector<double> z_values = {0.2, 0.1, 0.05};
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t idx = 0; idx < pairs.size(); idx += 10) {
        const EnsemblePair& pair = pairs[idx];
        const HamiltonianFamily& family =
            families[static_cast<std::size_t>(pair.family_index)];
        const ParameterPoint r(pair.r), r0(pair.r0);
        const SusceptibilityReport rep =
            susceptibility(family, r, r0, kEnsembleLevel, z_values);
        const RealVector q_integral =
            regularized_integral_limit(correlation_modes(family, r, r0, kEnsembleLevel));
        for (Eigen::Index i = 0; i < rep.extrapolated_difference.size(); ++i) {
            worst = std::max(worst, std::abs(rep.extrapolated_difference[i] - q_integral[i]));
            worst = std::max(worst,
                             std::abs(rep.extrapolated_difference[i] - rep.theorem_rhs[i]));
        }
        ++cases;
    }
    res.max_residual = worst;
    res.passed = worst <= res.tolerance;
    std::ostringstream os;
    os << cases << " ensemble points, z in {0.2, 0.1, 0.05}";
    res.detail = os.str();
    return res;
}

CriterionResult criterion_classical(std::uint64_t seed) {
    CriterionResult res;
    res.id = 9;
    res.name = "classical limit: equipartition, torus forms, envelopes";
    res.tolerance = 1.0; // normalized over four sub-checks

    // Kinetic equipartition on the energy shell. The shell half-width only
    // enters this average at second order and cancels exactly for this
    // potential, so a wide shell keeps the rejection cost low.
    const ClassicalFastSystem harmonic = ClassicalFastSystem::harmonic();
    RealVector r1(1);
    r1 << 0.2;
    const double energy = 1.0;
    const ClassicalObservable kinetic = [](const PhasePoint& z) {
        return 0.5 * z.p.squaredNorm();
    };
    const MeanStderr equi = microcanonical_average(harmonic, r1, energy, kinetic, 100000,
                                                   stream_seed(seed, 9001), 1e-2);
    const double equi_sigmas = std::abs(equi.mean - 0.5 * energy) / (3.0 * equi.stderr_mean);

    // Torus averages against closed forms.
    RealVector r_torus(1), actions(1);
    r_torus << 0.3;
    actions << 0.7;
    const double omega = harmonic.harmonic_omega();
    double torus_worst = 0.0;
    {
        const ClassicalObservable h_obs = [&](const PhasePoint& z) {
            return harmonic.hamiltonian(z, r_torus);
        };
        torus_worst = std::max(
            torus_worst,
            std::abs(torus_average(harmonic, actions, h_obs, 512, r_torus) -
                     omega * actions[0]));
        const ClassicalObservable r_sq = [](const PhasePoint& z) { return z.r[0] * z.r[0]; };
        torus_worst = std::max(
            torus_worst,
            std::abs(torus_average(harmonic, actions, r_sq, 512, r_torus) -
                     (r_torus[0] * r_torus[0] + actions[0] / omega)));
        const ClassicalObservable r_obs = [](const PhasePoint& z) { return z.r[0]; };
        torus_worst =
            std::max(torus_worst, std::abs(torus_average(harmonic, actions, r_obs, 512,
                                                         r_torus) -
                                           r_torus[0]));
        const ClassicalObservable p_obs = [](const PhasePoint& z) { return z.p[0]; };
        torus_worst = std::max(
            torus_worst, std::abs(torus_average(harmonic, actions, p_obs, 512, r_torus)));
    }

    // Correlation envelopes: the quartic-coupled system mixes and decays,
    // the isochronous harmonic one must not.
    RealVector times(801);
    for (int j = 0; j < 801; ++j) times[j] = 200.0 * j / 800.0;
    auto envelope_fraction = [&](const ClassicalTrace& trace) {
        double early = 0.0, late = 0.0;
        for (Eigen::Index j = 0; j < trace.times.size(); ++j)
            for (const RealVector& q : trace.q) {
                const double v = std::abs(q[j]);
                if (trace.times[j] <= 40.0) early = std::max(early, v);
                if (trace.times[j] >= 160.0) late = std::max(late, v);
            }
        return early > 0.0 ? late / early : 1.0;
    };

    // Momentum vs force cross-correlation: d/dt p_0 equals the first force
    // component, so the pair is maximally correlated at short times, which
    // keeps the early envelope far above the sampling floor. For the
    // isochronous system the per-sample product is (x^2 + p^2) sin(omega t),
    // so its envelope cannot decay; the chaotic one mixes and loses it.
    const ClassicalObservable momentum_0 = [](const PhasePoint& z) { return z.p[0]; };

    const ClassicalFastSystem quartic = ClassicalFastSystem::quartic_coupled();
    RealVector r2(2);
    r2 << 0.1, -0.2;
    const ClassicalEnsemble shell_q =
        sample_energy_shell(quartic, r2, 1.0, 800, stream_seed(seed, 9100), 1e-3);
    // dt respects the stiffest transverse frequency reachable on the E = 1
    // shell (omega_max^2 = 2 sqrt(4E/beta) here), keeping the integrator's
    // energy drift safely under the trajectory guard.
    const ClassicalTrace trace_q =
        classical_correlation(quartic, r2, shell_q, momentum_0,
                              force_observables(quartic, r2), times, 5e-4);
    const double quartic_fraction = envelope_fraction(trace_q);

    RealVector r_h(1);
    r_h << 0.3;
    const ClassicalEnsemble shell_h =
        sample_energy_shell(harmonic, r_h, 1.0, 300, stream_seed(seed, 9200), 1e-3);
    const ClassicalTrace trace_h =
        classical_correlation(harmonic, r_h, shell_h, momentum_0,
                              force_observables(harmonic, r_h), times, 2e-3);
    const double harmonic_fraction = envelope_fraction(trace_h);

    res.max_residual =
        std::max({equi_sigmas, torus_worst / 1e-8, quartic_fraction / 0.2,
                  harmonic_fraction > 0.0 ? 0.1 / harmonic_fraction
                                          : std::numeric_limits<double>::infinity()});
    res.passed = res.max_residual <= res.tolerance;
    res.detail = "equipartition " + brief(equi_sigmas) + " (3-sigma units); torus " +
                 brief(torus_worst) + " (1e-8); quartic envelope " +
                 brief(quartic_fraction) + " (<= 0.2); harmonic envelope " +
                 brief(harmonic_fraction) + " (>= 0.1)";
    return res;
}

} // namespace

std::vector<CriterionResult> run_all_criteria(std::uint64_t seed) {
    std::vector<CriterionResult> results;
    results.push_back(criterion_solid_angle());
    results.push_back(criterion_open_equals_cyclic());
    const std::vector<HamiltonianFamily> families = ensemble_families();
    const std::vector<EnsemblePair> pairs = draw_ensemble(families, seed);
    results.push_back(criterion_omega_routes(families, pairs));
    results.push_back(criterion_gauge_invariance(seed));
    results.push_back(criterion_theorem(families, pairs));
    results.push_back(criterion_q_forms());
    results.push_back(criterion_metric(families, pairs));
    results.push_back(criterion_susceptibility(families, pairs));
    results.push_back(criterion_classical(seed));
    return results;
}

std::string format_criteria_table(const std::vector<CriterionResult>& results) {
    std::string out;
    char line[256];
    bool all = true;
    for (const CriterionResult& res : results) {
        std::snprintf(line, sizeof line, "criterion %2d  %s  %-55s max %.3e  tol %.3e\n",
                      res.id, res.passed ? "PASS" : "FAIL", res.name.c_str(),
                      res.max_residual, res.tolerance);
        out += line;
        if (!res.detail.empty()) {
            std::snprintf(line, sizeof line, "              %s\n", res.detail.c_str());
            out += line;
        }
        all = all && res.passed;
    }
    out += all ? "all criteria passed\n" : "CRITERIA FAILED\n";
    return out;
}

} // namespace geomflux
