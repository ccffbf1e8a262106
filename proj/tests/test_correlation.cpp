#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "geomflux/correlation.hpp"

using namespace geomflux;

namespace {

Matrix sigma(int k) {
    Matrix m = Matrix::Zero(2, 2);
    const Complex i(0.0, 1.0);
    switch (k) {
        case 0: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
        case 1: m(0, 1) = -i; m(1, 0) = i; break;
        default: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    }
    return m;
}

RealVector linspace(double a, double b, int n) {
    RealVector v(n);
    for (int k = 0; k < n; ++k)
        v[k] = a + (b - a) * static_cast<double>(k) / (n - 1);
    return v;
}

// One oscillator with a hand-picked coefficient; every transform of it has a
// closed form.
CorrelationModes single_mode() {
    CorrelationModes modes;
    modes.omegas = RealVector(1);
    modes.omegas << 2.0;
    modes.coeffs = {Vector(1)};
    modes.coeffs[0](0) = Complex(0.0, -0.5);
    modes.static_coeffs = {Complex(0.3, 0.0)};
    modes.hbar = 1.0;
    modes.level = 0;
    return modes;
}

} // namespace

TEST_CASE("heisenberg_operator rotates sigma_x around sigma_z") {
    const auto eig = hermitian_eigendecomposition(HermitianMatrix(sigma(2)));
    const Matrix sx = sigma(0), sy = sigma(1);

    CHECK((heisenberg_operator(eig, sx, 0.0, 1.0) - sx).cwiseAbs().maxCoeff() <= 1e-14);

    for (double t : {0.3, 1.7}) {
        const Matrix got = heisenberg_operator(eig, sx, t, 1.0);
        const Matrix expect = std::cos(2.0 * t) * sx - std::sin(2.0 * t) * sy;
        CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-13);
    }

    const Matrix half_turn = heisenberg_operator(eig, sx, std::numbers::pi / 2.0, 1.0);
    CHECK((half_turn + sx).cwiseAbs().maxCoeff() <= 1e-12);

    // hbar rescales time.
    const Matrix slow = heisenberg_operator(eig, sx, 0.3, 2.0);
    const Matrix expect = std::cos(0.3) * sx - std::sin(0.3) * sy;
    CHECK((slow - expect).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("regularized integral of a single mode has its closed form") {
    const CorrelationModes modes = single_mode();

    const RegularizedIntegral ms = regularized_time_integral(modes, 1.0, IntegralMethod::ModeSum);
    REQUIRE(ms.value.size() == 1);
    // integral_0^inf e^-t sin(2t) dt = 2/5; the static coefficient must not leak in.
    CHECK(std::abs(ms.value[0] - 0.4) <= 1e-14);
    CHECK(ms.error_estimate[0] == 0.0);

    const RegularizedIntegral quad =
        regularized_time_integral(modes, 1.0, IntegralMethod::Quadrature);
    CHECK(std::abs(quad.value[0] - 0.4) <= std::max(quad.error_estimate[0], 1e-12));
    CHECK(quad.error_estimate[0] > 0.0);

    const RealVector limit = regularized_integral_limit(modes);
    CHECK(std::abs(limit[0] - 0.5) <= 1e-15);
}

TEST_CASE("spectral and literal Heisenberg traces agree") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(4, 3, 11);
    const ParameterPoint R{0.3, -0.2, 0.5}, R0{0.1, 0.4, -0.3};
    const RealVector times = linspace(0.0, 15.0, 25);

    const CorrelationTrace spectral = q_correlation(fam, R, R0, 1, times, QForm::Spectral);
    const CorrelationTrace literal = q_correlation(fam, R, R0, 1, times, QForm::Heisenberg);

    REQUIRE(spectral.q.size() == 3);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, (spectral.q[i] - literal.q[i]).cwiseAbs().maxCoeff());
        worst = std::max(worst, (spectral.c_ab[i] - literal.c_ab[i]).cwiseAbs().maxCoeff());
        worst = std::max(worst, (spectral.c_ba[i] - literal.c_ba[i]).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10);

    // Q vanishes at t = 0 and the two orderings coincide there.
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(spectral.q[i][0]) <= 1e-12);
        CHECK(std::abs(spectral.c_ab[i][0] - spectral.c_ba[i][0]) <= 1e-12);
    }
}

TEST_CASE("correlation modes are gauge invariant") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(5, 2, 23);
    const ParameterPoint R{0.4, -0.1}, R0{-0.2, 0.3};
    PolynomialField alpha;
    alpha.dims = 2;
    alpha.terms = {{0.7, {1, 0}}, {-0.4, {1, 1}}, {0.25, {0, 2}}};
    GaugeField gauge{alpha};

    const RealVector times = linspace(0.0, 8.0, 9);
    const CorrelationTrace plain = q_correlation(fam, R, R0, 2, times, QForm::Spectral);
    const CorrelationTrace gauged =
        q_correlation(fam, R, R0, 2, times, QForm::Spectral, &gauge);
    for (int i = 0; i < 2; ++i)
        CHECK((plain.q[i] - gauged.q[i]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("static coefficients are real multiples of the overlap weight") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(4, 2, 29);
    const CorrelationModes modes =
        correlation_modes(fam, ParameterPoint{0.2, -0.4}, ParameterPoint{0.5, 0.1}, 1);
    REQUIRE(modes.directions() == 2);
    CHECK(modes.omegas.size() == 3);
    for (const Complex& c : modes.static_coeffs) CHECK(std::abs(c.imag()) <= 1e-12);
}

TEST_CASE("theorem holds trivially at the base point itself") {
    const auto fam = HamiltonianFamily::seeded_random_polynomial(4, 3, 37);
    const ParameterPoint R{0.3, 0.1, -0.2};
    const TheoremReport rep = theorem_check(fam, R, R, 1);
    CHECK(rep.residuals.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(rep.lhs.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(rep.rhs.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fluctuation-correlation identity on the spin family") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPoint R{0.4, 0.7, -0.3}, R0{0.1, -0.2, 0.9};
    const TheoremReport rep = theorem_check(fam, R, R0, 0);

    CHECK(rep.residuals.cwiseAbs().maxCoeff() <= 1e-8);

    // The quadrature route, extrapolated to s = 0, brackets the exact limit.
    REQUIRE(rep.quadrature_limit.size() == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(rep.quadrature_limit[i] - rep.lhs[i] * (-2.0 * fam.hbar())) <=
              rep.quadrature_limit_error[i]);

    // Each reported quadrature sample is consistent with its own mode sum.
    for (const TheoremSample& s : rep.samples)
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(s.quadrature[i] - s.mode_sum[i]) <=
                  std::max(s.quadrature_error[i], 1e-12));
}

TEST_CASE("susceptibility difference reaches the theorem value at z -> 0") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPoint R{0.4, 0.7, -0.3}, R0{0.1, -0.2, 0.9};
    const std::vector<double> zs{0.5, 0.2, 0.1};
    const SusceptibilityReport rep = susceptibility(fam, R, R0, 0, zs);

    REQUIRE(rep.z_values == zs);
    CHECK((rep.extrapolated_difference - rep.theorem_rhs).cwiseAbs().maxCoeff() <= 1e-8);

    // At each real z the difference chi_AB - chi_BA is the damped transform of Q.
    const CorrelationModes modes = correlation_modes(fam, R, R0, 0);
    for (std::size_t zi = 0; zi < zs.size(); ++zi) {
        const RegularizedIntegral ms =
            regularized_time_integral(modes, zs[zi], IntegralMethod::ModeSum);
        for (int i = 0; i < 3; ++i) {
            const Complex diff = rep.chi_ab[zi][i] - rep.chi_ba[zi][i];
            CHECK(std::abs(diff.imag()) <= 1e-12);
            CHECK(std::abs(diff.real() - ms.value[i]) <= 1e-12);
        }
    }
}

TEST_CASE("diagonal metric from the force-force correlation") {
    const auto fam = HamiltonianFamily::spin(0.5);
    const ParameterPoint R{0.4, 0.7, -0.3};

    RealVector finite_a, finite_b;
    const RealVector limit = gii_from_force_correlation(fam, R, 0, 0.02, &finite_a);
    const RealVector limit_again = gii_from_force_correlation(fam, R, 0, 0.01, &finite_b);
    CHECK((limit - limit_again).cwiseAbs().maxCoeff() == 0.0);

    const GeometricTensor t = metric_and_geometric_tensor(fam, R, 0, MetricRoute::ForceStates);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(limit[i] - t.g(i, i)) <= 1e-13);

    const GeometricTensor td = metric_and_geometric_tensor(fam, R, 0, MetricRoute::Derivative);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(limit[i] - td.g(i, i)) <= 1e-7);

    // The finite-s deficit shrinks like s^2.
    for (int i = 0; i < 3; ++i) {
        const double d_a = limit[i] - finite_a[i];
        const double d_b = limit[i] - finite_b[i];
        CHECK(d_a / d_b == doctest::Approx(4.0).epsilon(0.2));
    }
}
