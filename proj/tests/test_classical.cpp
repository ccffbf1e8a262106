#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "geomflux/classical.hpp"

using namespace geomflux;

namespace {

RealVector vec1(double x) {
    RealVector v(1);
    v << x;
    return v;
}

RealVector vec2(double x, double y) {
    RealVector v(2);
    v << x, y;
    return v;
}

RealVector linspace(double a, double b, int n) {
    RealVector v(n);
    for (int k = 0; k < n; ++k)
        v[k] = a + (b - a) * static_cast<double>(k) / (n - 1);
    return v;
}

} // namespace

TEST_CASE("velocity-verlet tracks the harmonic flow") {
    const auto sys = ClassicalFastSystem::harmonic();
    const RealVector R = vec1(0.5);
    const PhasePoint z0{vec1(1.2), vec1(0.4)};
    const RealVector grid = linspace(1.0, 10.0, 10);
    const auto traj = trajectory(sys, R, z0, grid, 1e-3);
    REQUIRE(traj.size() == 10);
    for (int k = 0; k < 10; ++k) {
        const double t = grid[k];
        const double x = 0.5 + 0.7 * std::cos(t) + 0.4 * std::sin(t);
        const double p = -0.7 * std::sin(t) + 0.4 * std::cos(t);
        CHECK(std::abs(traj[static_cast<std::size_t>(k)].r[0] - x) <= 2e-6);
        CHECK(std::abs(traj[static_cast<std::size_t>(k)].p[0] - p) <= 2e-6);
    }
}

TEST_CASE("velocity-verlet is time reversible") {
    const auto sys = ClassicalFastSystem::harmonic();
    const RealVector R = vec1(0.0);
    const PhasePoint z0{vec1(0.9), vec1(-0.3)};
    const RealVector grid = vec1(5.0);
    const auto fwd = trajectory(sys, R, z0, grid, 1e-3);
    const PhasePoint turned{fwd[0].r, -fwd[0].p};
    const auto back = trajectory(sys, R, turned, grid, 1e-3);
    CHECK(std::abs(back[0].r[0] - z0.r[0]) <= 1e-9);
    CHECK(std::abs(back[0].p[0] + z0.p[0]) <= 1e-9);
}

TEST_CASE("oversized steps are rejected through the drift gate") {
    const auto sys = ClassicalFastSystem::harmonic();
    const PhasePoint z0{vec1(1.5), vec1(0.0)};
    CHECK_THROWS_AS(trajectory(sys, vec1(0.0), z0, linspace(1.0, 10.0, 10), 0.5),
                    StepSizeTooLarge);
    CHECK_THROWS_AS(trajectory(sys, vec1(0.0), z0, vec1(1.0), 0.0), Error);
}

TEST_CASE("quartic system: potential, force and parameter gradient are consistent") {
    const double beta = 0.05;
    const auto sys = ClassicalFastSystem::quartic_coupled(beta);
    const RealVector R = vec2(0.1, -0.2);
    const RealVector r = vec2(0.7, -0.4);

    const RealVector x = r - R;
    const double expect =
        x[0] * x[0] * x[1] * x[1] + 0.25 * beta * (std::pow(x[0], 4) + std::pow(x[1], 4));
    CHECK(std::abs(sys.potential(r, R) - expect) <= 1e-14);
    CHECK(sys.potential_minimum(R) == 0.0);

    // force_r = -dV/dr by central differences.
    const double h = 1e-5;
    const RealVector f = sys.force_r(r, R);
    for (int i = 0; i < 2; ++i) {
        RealVector rp = r, rm = r;
        rp[i] += h;
        rm[i] -= h;
        const double fd = -(sys.potential(rp, R) - sys.potential(rm, R)) / (2.0 * h);
        CHECK(std::abs(f[i] - fd) <= 1e-8);
    }

    // Rigid translation coupling: dh/dR_i equals the mechanical force.
    CHECK((sys.grad_R(r, R) - f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("energy shell sampling: membership, determinism, bookkeeping") {
    const auto sys = ClassicalFastSystem::harmonic();
    const RealVector R = vec1(0.2);
    const auto e1 = sample_energy_shell(sys, R, 1.0, 200, 7, 1e-3);
    const auto e2 = sample_energy_shell(sys, R, 1.0, 200, 7, 1e-3);
    const auto e3 = sample_energy_shell(sys, R, 1.0, 200, 8, 1e-3);

    REQUIRE(e1.samples.size() == 200);
    CHECK(e1.shell_halfwidth == 1e-3);
    CHECK(e1.weight_model == WeightModel::EnergyShell);

    double worst_offset = 0.0;
    bool identical = true;
    double max_seed_diff = 0.0;
    for (std::size_t k = 0; k < e1.samples.size(); ++k) {
        worst_offset = std::max(worst_offset,
                                std::abs(sys.hamiltonian(e1.samples[k], R) - 1.0));
        identical = identical &&
                    (e1.samples[k].r.array() == e2.samples[k].r.array()).all() &&
                    (e1.samples[k].p.array() == e2.samples[k].p.array()).all();
        max_seed_diff = std::max(
            max_seed_diff, (e1.samples[k].r - e3.samples[k].r).cwiseAbs().maxCoeff());
    }
    CHECK(worst_offset <= 1e-3 + 1e-12);
    CHECK(identical);
    CHECK(max_seed_diff > 1e-3);
}

TEST_CASE("torus sampling lands on the invariant circle") {
    const auto sys = ClassicalFastSystem::harmonic();
    const RealVector R = vec1(0.3);
    const auto ens = sample_torus(sys, R, vec1(0.7), 100, 5);
    const auto rerun = sample_torus(sys, R, vec1(0.7), 100, 5);
    for (std::size_t k = 0; k < ens.samples.size(); ++k) {
        CHECK(std::abs(sys.hamiltonian(ens.samples[k], R) - 0.7) <= 1e-12);
        CHECK((ens.samples[k].r.array() == rerun.samples[k].r.array()).all());
        CHECK((ens.samples[k].p.array() == rerun.samples[k].p.array()).all());
    }
}

TEST_CASE("torus averages have their closed forms") {
    const auto sys = ClassicalFastSystem::harmonic();
    const RealVector R = vec1(0.3);
    const RealVector actions = vec1(0.7);
    const auto energy = [&](const PhasePoint& z) { return sys.hamiltonian(z, R); };
    const auto xsq = [](const PhasePoint& z) { return z.r[0] * z.r[0]; };
    const auto xmean = [](const PhasePoint& z) { return z.r[0]; };
    const auto pmean = [](const PhasePoint& z) { return z.p[0]; };

    CHECK(std::abs(torus_average(sys, actions, energy, 512, R) - 0.7) <= 1e-8);
    CHECK(std::abs(torus_average(sys, actions, xsq, 512, R) - (0.09 + 0.7)) <= 1e-8);
    CHECK(std::abs(torus_average(sys, actions, xmean, 512, R) - 0.3) <= 1e-8);
    CHECK(std::abs(torus_average(sys, actions, pmean, 512, R)) <= 1e-8);
}

TEST_CASE("kinetic energy takes half the shell energy") {
    const auto sys = ClassicalFastSystem::harmonic();
    const auto kinetic = [](const PhasePoint& z) { return 0.5 * z.p.squaredNorm(); };
    const MeanStderr ms = microcanonical_average(sys, vec1(0.2), 1.0, kinetic, 20000, 5, 1e-2);
    CHECK(std::abs(ms.mean - 0.5) <= 3.0 * ms.stderr_mean);
    CHECK(ms.stderr_mean < 0.01);
    CHECK(ms.stderr_mean > 0.0);
}

TEST_CASE("standard error shrinks like the square root of the sample count") {
    const auto sys = ClassicalFastSystem::harmonic();
    const auto kinetic = [](const PhasePoint& z) { return 0.5 * z.p.squaredNorm(); };
    const MeanStderr small = microcanonical_average(sys, vec1(0.0), 1.0, kinetic, 1000, 9, 1e-2);
    const MeanStderr big = microcanonical_average(sys, vec1(0.0), 1.0, kinetic, 4000, 9, 1e-2);
    const double ratio = small.stderr_mean / big.stderr_mean;
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
}

TEST_CASE("constant observables have exactly zero correlation") {
    const auto sys = ClassicalFastSystem::harmonic();
    const RealVector R = vec1(0.2);
    const auto ens = sample_energy_shell(sys, R, 1.0, 50, 3, 1e-2);
    const ClassicalObservable one = [](const PhasePoint&) { return 1.0; };
    const auto trace =
        classical_correlation(sys, R, ens, one, {one}, linspace(0.0, 2.0, 21), 2e-3);
    CHECK(trace.q[0].cwiseAbs().maxCoeff() == 0.0);
    CHECK(trace.stderr_of_mean[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("observable factories") {
    const auto sys = ClassicalFastSystem::harmonic();
    const PhasePoint center{vec1(0.9), vec1(0.4)};
    const auto window = gaussian_window(center, 0.8);
    CHECK(window(center) == 1.0);
    const PhasePoint off{vec1(2.0), vec1(0.0)};
    const double d2 = (2.0 - 0.9) * (2.0 - 0.9) + 0.4 * 0.4;
    CHECK(std::abs(window(off) - std::exp(-d2 / (2.0 * 0.64))) <= 1e-15);
    CHECK_THROWS_AS(gaussian_window(center, 0.0), Error);

    const RealVector R = vec1(0.3);
    const auto force = force_observable(sys, R, 0);
    const PhasePoint z{vec1(1.7), vec1(0.1)};
    CHECK(std::abs(force(z) - (-1.4)) <= 1e-14);
    CHECK_THROWS_AS(force_observable(sys, R, 1), DimensionMismatch);

    const auto slow = ClassicalFastSystem::harmonic(1.0, 1.0, 2.0);
    const auto gen = translation_generator(slow, 0);
    CHECK(gen(z) == -0.05);
}

TEST_CASE("sampling rejects impossible requests") {
    const auto harmonic = ClassicalFastSystem::harmonic();
    const auto quartic = ClassicalFastSystem::quartic_coupled();
    const auto kinetic = [](const PhasePoint& z) { return 0.5 * z.p.squaredNorm(); };

    CHECK_THROWS_AS(sample_energy_shell(harmonic, vec1(0.0), 0.0, 10, 1), EnergyBelowMinimum);
    CHECK_THROWS_AS(sample_energy_shell(harmonic, vec1(0.0), 1.0, 2, 1, 1e-12), SamplingFailure);
    CHECK_THROWS_AS(sample_torus(quartic, vec2(0.0, 0.0), vec2(0.1, 0.1), 10, 1), NotIntegrable);
    CHECK_THROWS_AS(torus_average(quartic, vec2(0.1, 0.1), kinetic, 16, vec2(0.0, 0.0)),
                    NotIntegrable);
    CHECK_THROWS_AS(microcanonical_average(harmonic, vec1(0.0), 1.0, kinetic, 50, 1), Error);

    const auto tiny = sample_energy_shell(harmonic, vec1(0.0), 1.0, 1, 1, 1e-2);
    const ClassicalObservable one = [](const PhasePoint&) { return 1.0; };
    CHECK_THROWS_AS(
        classical_correlation(harmonic, vec1(0.0), tiny, one, {one}, vec1(1.0), 1e-3),
        SamplingFailure);
}

// The harmonic torus makes the correlation theorem solvable in closed form:
// with angle Fourier coefficients a_k, b_k of the two observables,
//   Q_c(t) = -4 sum_{k>0} Im(a_k b_{-k}) sin(k w t)
//   integral_0^inf e^{-st} Q_c dt = -4 sum_{k>0} Im(a_k b_{-k}) k w/(s^2 + k^2 w^2).
// The oracle applies the same two-point Richardson step in s^2 that the
// estimator applies, so the comparison is limited by Monte Carlo noise alone.
TEST_CASE("harmonic torus obeys the classical correlation identity") {
    const auto sys = ClassicalFastSystem::harmonic();
    const double omega = 1.0;
    const RealVector R = vec1(0.3);
    const RealVector actions = vec1(0.7);
    const PhasePoint center{vec1(0.9), vec1(0.4)};
    const ClassicalObservable a_obs = gaussian_window(center, 0.8);
    const auto b_obs = force_observables(sys, R);
    const std::vector<ClassicalObservable> b_gen{translation_generator(sys, 0)};
    const std::vector<double> s_values{0.4, 0.2};

    // Angle-grid Fourier data for the oracle.
    const int grid = 1024, kmax = 40;
    std::vector<std::complex<double>> a_k(kmax + 1), b_mk(kmax + 1);
    for (int j = 0; j < grid; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / grid;
        const PhasePoint z = sys.torus_point(actions, vec1(theta), R);
        const double av = a_obs(z), bv = b_obs[0](z);
        for (int k = 0; k <= kmax; ++k) {
            const std::complex<double> phase(std::cos(k * theta), std::sin(k * theta));
            a_k[static_cast<std::size_t>(k)] += av * std::conj(phase);
            b_mk[static_cast<std::size_t>(k)] += bv * phase;
        }
    }
    for (int k = 0; k <= kmax; ++k) {
        a_k[static_cast<std::size_t>(k)] /= grid;
        b_mk[static_cast<std::size_t>(k)] /= grid;
    }
    auto transform = [&](double s) {
        double total = 0.0;
        for (int k = 1; k <= kmax; ++k) {
            const double kw = k * omega;
            total += -4.0 *
                     std::imag(a_k[static_cast<std::size_t>(k)] * b_mk[static_cast<std::size_t>(k)]) *
                     kw / (s * s + kw * kw);
        }
        return total;
    };
    const double s1 = s_values[0], s2 = s_values[1];
    const double kk = s2 * s2 / (s1 * s1 - s2 * s2);
    const double j_oracle = (1.0 + kk) * transform(s2) - kk * transform(s1);

    const double gen_var = actions[0] * omega; // Var(-p/hbar) on the torus
    const double lambda_star = -j_oracle / (2.0 * sys.hbar() * gen_var);

    EnsembleSpec spec;
    spec.kind = WeightModel::Torus;
    spec.actions = actions;
    spec.count = 3200;
    spec.seed = 11;
    const RealVector times = linspace(0.0, 46.0, 921);
    const ClassicalTheoremReport rep = classical_theorem_check(
        sys, R, a_obs, b_obs, b_gen, spec, s_values, lambda_star, times, 2e-3);

    REQUIRE(rep.lhs.size() == 1);
    CHECK(std::abs(rep.lhs[0]) > 5.0 * rep.lhs_stderr[0]); // genuine signal
    CHECK(rep.residuals[0] <= 3.0 * rep.combined_stderr[0]);
    CHECK(std::abs(rep.generator_variance[0] - gen_var) <=
          3.0 * rep.generator_variance_stderr[0]);
    CHECK(rep.envelope_fraction > 0.5); // harmonic recurrences never decay
    CHECK(rep.lambda_c == lambda_star);
    CHECK(rep.s_values == s_values);
}
