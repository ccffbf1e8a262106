#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "geomflux/spectral_geometry.hpp"

using namespace geomflux;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<ParameterPoint> circle_points(double radius, double theta, int count) {
    std::vector<ParameterPoint> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double phi = 2.0 * kPi * k / count;
        pts.push_back(ParameterPoint{radius * std::sin(theta) * std::cos(phi),
                                     radius * std::sin(theta) * std::sin(phi),
                                     radius * std::cos(theta)});
    }
    return pts;
}

ParameterPath close_loop(std::vector<ParameterPoint> pts) {
    pts.push_back(pts.front());
    return ParameterPath(std::move(pts), true);
}

ParameterPath segment(const RealVector& a, const RealVector& b, int count) {
    std::vector<ParameterPoint> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / (count - 1);
        pts.push_back(ParameterPoint(RealVector(a + t * (b - a))));
    }
    return ParameterPath(std::move(pts), false);
}

} // namespace

TEST_CASE("eigen_at: unit norm, anchored phase, bit-identical reruns") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(5, 3, 9);
    const ParameterPoint R{0.4, -0.2, 0.7};
    const LabeledEigenpair e1 = eigen_at(fam, R, 2);
    const LabeledEigenpair e2 = eigen_at(fam, R, 2);

    CHECK(std::abs(e1.state.norm() - 1.0) <= 1e-14);
    Eigen::Index anchor = 0;
    e1.state.cwiseAbs().maxCoeff(&anchor);
    CHECK(std::abs(e1.state[anchor].imag()) <= 1e-15);
    CHECK(e1.state[anchor].real() > 0.0);
    CHECK((e1.state.array() == e2.state.array()).all());
    CHECK(e1.energy == e2.energy);
}

TEST_CASE("fixed_eigensystem_at anchors every column") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(6, 2, 31);
    const EigenDecomposition d = fixed_eigensystem_at(fam, ParameterPoint{0.1, -0.6});
    for (Eigen::Index k = 0; k < d.eigenvectors.cols(); ++k) {
        Eigen::Index anchor = 0;
        d.eigenvectors.col(k).cwiseAbs().maxCoeff(&anchor);
        CHECK(std::abs(d.eigenvectors(anchor, k).imag()) <= 1e-15);
        CHECK(d.eigenvectors(anchor, k).real() > 0.0);
    }
}

TEST_CASE("degenerate spectrum is rejected") {
    const auto fam = HamiltonianFamily::spin(0.5);
    CHECK_THROWS_AS(eigen_at(fam, ParameterPoint{0.0, 0.0, 0.0}, 0), DegenerateSpectrum);
}

TEST_CASE("reference_state: positive overlap with the base state") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPoint R{0.3, 0.5, 0.7}, R0{0.0, 0.0, 1.0};
    const ReferenceEigenstate ref = reference_state(fam, R, R0, 0);
    const Vector base = eigen_at(fam, R0, 0).state;
    const Complex ov = ref.state.adjoint() * base;
    CHECK(std::abs(ov.imag()) <= 1e-13);
    CHECK(ov.real() > 0.0);
    // The stored overlap is <n(R0)|n(R)> in the fixed gauge.
    const Vector at_r = eigen_at(fam, R, 0).state;
    const Complex direct = base.adjoint() * at_r;
    CHECK(std::abs(direct - ref.overlap) <= 1e-13);
}

TEST_CASE("reference_state rejects an orthogonal base point") {
    const auto fam = HamiltonianFamily::spin(0.5);
    CHECK_THROWS_AS(
        reference_state(fam, ParameterPoint{0.0, 0.0, -1.0}, ParameterPoint{0.0, 0.0, 1.0}, 0),
        ReferenceOverlapVanishing);
}

TEST_CASE("fluctuation data invariants") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPoint R{0.4, 0.7, -0.3}, R0{0.1, -0.2, 0.9};
    const FluctuationData fd = fluctuation_data(fam, R, R0, 0);
    const Vector n = eigen_at(fam, R, 0).state;
    const RealVector a = berry_connection(fam, R, 0);

    REQUIRE(fd.b_ops.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK((fd.b_ops[i] - fd.b_ops[i].adjoint().eval()).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK(std::abs(fd.mean_b[i] + a[i]) <= 1e-9);
        REQUIRE(!fd.degenerate_direction[i]);
        REQUIRE(fd.perp_states[i].has_value());
        const Vector& perp = *fd.perp_states[i];
        CHECK(std::abs((n.adjoint() * perp)(0)) <= 1e-14);
        CHECK(std::abs(perp.norm() - 1.0) <= 1e-12);
    }

    // delta_b^2 equals the diagonal metric, route-independently.
    const GeometricTensor t =
        metric_and_geometric_tensor(fam, R, 0, MetricRoute::ForceStates);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(fd.delta_b[i] * fd.delta_b[i] - t.g(i, i)) <= 1e-9);
}

TEST_CASE("b_operator does not depend on the basis reference point") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPoint R{0.5, -0.3, 0.8};
    const auto b1 = b_operator(fam, R, ParameterPoint{0.0, 0.1, 1.0});
    const auto b2 = b_operator(fam, R, ParameterPoint{0.7, 0.4, 0.2});
    REQUIRE(b1.size() == b2.size());
    for (std::size_t i = 0; i < b1.size(); ++i)
        CHECK((b1[i] - b2[i]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("gauge potentials vanish against their own base point") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(4, 3, 13);
    const ParameterPoint R{0.2, -0.5, 0.3};
    const GaugePotentials gp = gauge_potentials(fam, R, R, 1, OmegaRoute::AP);
    CHECK(gp.Omega.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("all four omega routes agree") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPoint R{0.4, 0.7, -0.3}, R0{0.1, -0.2, 0.9};
    const GaugePotentials base = gauge_potentials(fam, R, R0, 0, OmegaRoute::AP);
    for (const auto route :
         {OmegaRoute::Fluctuation, OmegaRoute::SumOverStates, OmegaRoute::Metric}) {
        const GaugePotentials gp = gauge_potentials(fam, R, R0, 0, route);
        CHECK((gp.Omega - base.Omega).cwiseAbs().maxCoeff() <= 1e-7);
    }
}

TEST_CASE("metric routes agree and the metric is positive semidefinite") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(4, 3, 55);
    const ParameterPoint R{0.3, -0.4, 0.6};
    const GeometricTensor td = metric_and_geometric_tensor(fam, R, 1, MetricRoute::Derivative);
    const GeometricTensor tf = metric_and_geometric_tensor(fam, R, 1, MetricRoute::ForceStates);
    CHECK((td.g - tf.g).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((td.v - tf.v).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((td.g - td.g.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((td.v + td.v.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    Eigen::SelfAdjointEigenSolver<RealMatrix> es(td.g);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("spin metric matches the closed form on the sphere") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const double r = 1.3, theta = 0.9, phi = 1.1;
    const ParameterPoint R{r * std::sin(theta) * std::cos(phi),
                           r * std::sin(theta) * std::sin(phi), r * std::cos(theta)};
    const GeometricTensor t = metric_and_geometric_tensor(fam, R, 1, MetricRoute::ForceStates);

    RealVector t_theta(3), t_phi(3);
    t_theta << r * std::cos(theta) * std::cos(phi), r * std::cos(theta) * std::sin(phi),
        -r * std::sin(theta);
    t_phi << -r * std::sin(theta) * std::sin(phi), r * std::sin(theta) * std::cos(phi), 0.0;

    const double g_tt = t_theta.dot(t.g * t_theta);
    const double g_pp = t_phi.dot(t.g * t_phi);
    const double g_tp = t_theta.dot(t.g * t_phi);
    CHECK(std::abs(g_tt - 0.25) <= 1e-7);
    CHECK(std::abs(g_pp - 0.25 * std::sin(theta) * std::sin(theta)) <= 1e-7);
    CHECK(std::abs(g_tp) <= 1e-7);
}

TEST_CASE("transport holonomy equals the integrated connection") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const int count = 8192;
    const auto pts = circle_points(1.0, 0.8, count);

    double line_integral = 0.0;
    std::vector<RealVector> a(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) a[k] = berry_connection(fam, pts[k], 0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const std::size_t j = (k + 1) % pts.size();
        const RealVector dr = pts[j].coords() - pts[k].coords();
        line_integral += 0.5 * (a[k] + a[j]).dot(dr);
    }

    const double holonomy = cyclic_berry_phase(fam, close_loop(pts), 0);
    CHECK(angle_distance(holonomy, line_integral) <= 1e-6);
}

TEST_CASE("holonomy of a small loop matches the enclosed curvature") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const double theta0 = 0.1;
    const double holonomy = cyclic_berry_phase(fam, close_loop(circle_points(1.0, theta0, 512)), 0);

    // v_12 at the disk centre; the flat disk spanning the loop has area
    // pi sin^2(theta0), and curvature F_12 = -2 v_12.
    const GeometricTensor t = metric_and_geometric_tensor(
        fam, ParameterPoint{0.0, 0.0, std::cos(theta0)}, 0, MetricRoute::ForceStates);
    const double expected = -2.0 * t.v(0, 1) * kPi * std::sin(theta0) * std::sin(theta0);
    CHECK(angle_distance(holonomy, expected) <= 0.025 * std::abs(holonomy));
}

TEST_CASE("cyclic phase flips sign when the loop is reversed") {
    const auto fam = HamiltonianFamily::spin(0.5);
    auto pts = circle_points(1.0, 1.2, 256);
    const double forward = cyclic_berry_phase(fam, close_loop(pts), 0);
    std::reverse(pts.begin(), pts.end());
    const double backward = cyclic_berry_phase(fam, close_loop(pts), 0);
    CHECK(angle_distance(forward, -backward) <= 1e-9);
}

TEST_CASE("gauge transformation compensates A and P and leaves Omega fixed") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(4, 2, 21);
    PolynomialField alpha;
    alpha.dims = 2;
    alpha.terms = {{0.4, {1, 0}}, {-0.3, {0, 2}}, {0.2, {1, 1}}};
    const GaugeCheckReport rep =
        gauge_transform_check(fam, ParameterPoint{0.3, -0.2}, ParameterPoint{0.6, 0.1}, 1, alpha);
    CHECK(rep.max_a_deviation <= 1e-8);
    CHECK(rep.max_p_deviation <= 1e-8);
    CHECK(rep.max_omega_deviation <= 1e-8);
}

TEST_CASE("polynomial field value and gradient") {
    PolynomialField f;
    f.dims = 2;
    f.terms = {{2.0, {2, 1}}, {-1.5, {0, 0}}};
    RealVector r(2);
    r << 0.5, -2.0;
    CHECK(f.value(r) == doctest::Approx(2.0 * 0.25 * -2.0 - 1.5).epsilon(1e-14));
    const RealVector g = f.grad(r);
    CHECK(g[0] == doctest::Approx(2.0 * 2.0 * 0.5 * -2.0).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(2.0 * 0.25).epsilon(1e-14));
}

TEST_CASE("paths validate their closure flag") {
    std::vector<ParameterPoint> open_pts{ParameterPoint{0.0, 0.0, 1.0},
                                         ParameterPoint{0.3, 0.0, 0.9}};
    CHECK_THROWS_AS(ParameterPath(open_pts, true), PathNotClosed);

    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPath arc =
        segment((RealVector(3) << 0.0, 0.0, 1.0).finished(),
                (RealVector(3) << 0.6, 0.0, 0.8).finished(), 16);
    CHECK_THROWS_AS(cyclic_berry_phase(fam, arc, 0), PathNotClosed);
}

TEST_CASE("level tracking aborts across an unresolved crossing") {
    const auto fam = HamiltonianFamily::avoided_crossing(1e-3);
    const ParameterPath path = segment((RealVector(2) << 0.0, -0.5).finished(),
                                       (RealVector(2) << 0.0, 0.5).finished(), 16);
    CHECK_THROWS_AS(open_path_phase(fam, path, 0, OmegaRoute::AP), LevelTrackingLost);
}

TEST_CASE("reference overlap failure reports the arc position") {
    const auto fam = HamiltonianFamily::spin(0.5);
    std::vector<ParameterPoint> pts;
    const int count = 64;
    for (int k = 0; k < count; ++k) {
        const double t = kPi * k / (count - 1);
        pts.push_back(ParameterPoint{std::sin(t), 0.0, std::cos(t)});
    }
    const ParameterPath half_circle(std::move(pts), false);
    try {
        open_path_phase(fam, half_circle, 0, OmegaRoute::AP);
        FAIL("expected ReferenceOverlapVanishing");
    } catch (const ReferenceOverlapVanishing& e) {
        CHECK(e.arc_length >= 3.0);
        CHECK(e.arc_length <= kPi + 0.01);
    }
}

TEST_CASE("open path phase carries a usable error estimate") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPath arc =
        segment((RealVector(3) << 0.0, 0.2, 1.0).finished(),
                (RealVector(3) << 0.8, 0.2, 0.6).finished(), 129);
    const PathPhase coarse = open_path_phase(fam, arc, 0, OmegaRoute::AP, nullptr, false);
    const PathPhase refined = open_path_phase(fam, arc, 0, OmegaRoute::AP);
    CHECK(refined.error_estimate > 0.0);
    CHECK(std::abs(refined.phase - coarse.phase) <= 1e-4);
}
