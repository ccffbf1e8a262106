#include "geomflux/classical.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace geomflux {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr long kMaxProposalsPerSample = 2000000;
constexpr double kMinAcceptanceRate = 1e-4;

// 53-bit uniform in [0, 1); explicit so output never depends on the standard
// library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

void check_point_dims(const ClassicalFastSystem& sys, const PhasePoint& z) {
    if (z.r.size() != sys.dof() || z.p.size() != sys.dof())
        throw DimensionMismatch("classical: phase point does not match system dof");
}

void check_params(const ClassicalFastSystem& sys, const RealVector& R) {
    if (R.size() != sys.param_dim())
        throw DimensionMismatch("classical: parameter vector does not match system");
}

double kinetic(const RealVector& p, const RealVector& masses) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) acc += p[i] * p[i] / (2.0 * masses[i]);
    return acc;
}

// One velocity-Verlet substep chain; f must hold force_r at z.r on entry and
// holds force_r at the final position on exit.
void verlet_steps(const ClassicalFastSystem& sys, const RealVector& R, PhasePoint& z,
                  RealVector& f, double h, long n) {
    const RealVector& masses = sys.masses();
    for (long k = 0; k < n; ++k) {
        const RealVector p_half = z.p + (0.5 * h) * f;
        for (Eigen::Index i = 0; i < z.r.size(); ++i) z.r[i] += h * p_half[i] / masses[i];
        f = sys.force_r(z.r, R);
        z.p = p_half + (0.5 * h) * f;
    }
}

struct SampleSeries {
    // vals[i](sample, time index); column-major so per-time columns are
    // contiguous for the fixed-order reductions.
    std::vector<Eigen::MatrixXd> vals;
};

// Per-sample Q_c series: q_i(t) = A(z(t)) B_i(z0) - A(z0) B_i(z(t)). The
// naive two-sided difference A(z(-t))B(z0) - B_i(z(t))A(z0) averages to zero
// under any flow-invariant ensemble (scalar observables commute), so this
// ordering is the one that carries the correlation asymmetry.
SampleSeries correlation_series(const ClassicalFastSystem& sys, const RealVector& R,
                                const ClassicalEnsemble& ensemble,
                                const ClassicalObservable& a_obs,
                                const std::vector<ClassicalObservable>& b_obs,
                                const RealVector& times, double dt) {
    check_params(sys, R);
    if (b_obs.empty()) throw DimensionMismatch("classical_correlation: no B observables");
    if (times.size() < 1)
        throw DimensionMismatch("classical_correlation: need at least one time sample");
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        if (times[j] < 0.0 || (j > 0 && times[j] <= times[j - 1]))
            throw Error("classical_correlation: times must be ascending and nonnegative");
    }
    const std::size_t count = ensemble.samples.size();
    if (count < 2) throw SamplingFailure("classical_correlation: need at least two samples");

    const int d = static_cast<int>(b_obs.size());
    SampleSeries series;
    series.vals.assign(static_cast<std::size_t>(d),
                       Eigen::MatrixXd(static_cast<Eigen::Index>(count), times.size()));

    parallel_for(count, thread_count(), [&](std::size_t k) {
        const PhasePoint& z0 = ensemble.samples[k];
        const double a0 = a_obs(z0);
        std::vector<double> b0(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) b0[static_cast<std::size_t>(i)] = b_obs[static_cast<std::size_t>(i)](z0);
        const std::vector<PhasePoint> fwd = trajectory(sys, R, z0, times, dt);
        for (Eigen::Index j = 0; j < times.size(); ++j) {
            const double a_fwd = a_obs(fwd[static_cast<std::size_t>(j)]);
            for (int i = 0; i < d; ++i) {
                const double b_fwd = b_obs[static_cast<std::size_t>(i)](fwd[static_cast<std::size_t>(j)]);
                series.vals[static_cast<std::size_t>(i)](static_cast<Eigen::Index>(k), j) =
                    a_fwd * b0[static_cast<std::size_t>(i)] - b_fwd * a0;
            }
        }
    });
    return series;
}

MeanStderr column_stats(const Eigen::MatrixXd& vals, Eigen::Index col) {
    const Eigen::Index n = vals.rows();
    const std::span<const double> column(vals.col(col).data(), static_cast<std::size_t>(n));
    const double mean = pairwise_sum(column) / static_cast<double>(n);
    std::vector<double> sq(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        const double dlt = vals(k, col) - mean;
        sq[static_cast<std::size_t>(k)] = dlt * dlt;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    MeanStderr out;
    out.mean = mean;
    out.stderr_mean = std::sqrt(var / static_cast<double>(n));
    return out;
}

std::vector<double> trapezoid_weights(const RealVector& times) {
    const Eigen::Index n = times.size();
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    if (n == 1) return w;
    w[0] = 0.5 * (times[1] - times[0]);
    for (Eigen::Index j = 1; j + 1 < n; ++j) w[static_cast<std::size_t>(j)] = 0.5 * (times[j + 1] - times[j - 1]);
    w[static_cast<std::size_t>(n - 1)] = 0.5 * (times[n - 1] - times[n - 2]);
    return w;
}

} // namespace

ClassicalFastSystem ClassicalFastSystem::harmonic(double mass, double omega, double hbar) {
    if (mass <= 0.0 || omega <= 0.0 || hbar <= 0.0)
        throw Error("harmonic system: mass, omega and hbar must be positive");
    ClassicalFastSystem sys;
    sys.kind_ = Kind::BuiltinHarmonic;
    sys.dof_ = 1;
    sys.param_dim_ = 1;
    sys.masses_ = RealVector::Constant(1, mass);
    sys.hbar_ = hbar;
    sys.omega_ = omega;
    return sys;
}

ClassicalFastSystem ClassicalFastSystem::quartic_coupled(double beta, double hbar) {
    if (beta <= 0.0 || hbar <= 0.0)
        throw Error("quartic system: beta and hbar must be positive");
    ClassicalFastSystem sys;
    sys.kind_ = Kind::BuiltinQuarticCoupled;
    sys.dof_ = 2;
    sys.param_dim_ = 2;
    sys.masses_ = RealVector::Constant(2, 1.0);
    sys.hbar_ = hbar;
    sys.beta_ = beta;
    return sys;
}

ClassicalFastSystem ClassicalFastSystem::separable(int dof, int param_dim,
                                                   PotentialFn potential,
                                                   VectorFieldFn force_r,
                                                   VectorFieldFn grad_R, MinimumFn minimum,
                                                   BoxFn box, RealVector masses,
                                                   double hbar) {
    if (dof < 1 || param_dim < 1)
        throw DimensionMismatch("separable system: dof and param_dim must be positive");
    if (!potential || !force_r || !grad_R || !minimum || !box)
        throw Error("separable system: all maps must be supplied");
    if (masses.size() != dof || (masses.array() <= 0.0).any())
        throw Error("separable system: need a positive mass per dof");
    if (hbar <= 0.0) throw Error("separable system: hbar must be positive");
    ClassicalFastSystem sys;
    sys.kind_ = Kind::SeparableAnalytic;
    sys.dof_ = dof;
    sys.param_dim_ = param_dim;
    sys.masses_ = std::move(masses);
    sys.hbar_ = hbar;
    sys.potential_ = std::move(potential);
    sys.force_r_ = std::move(force_r);
    sys.grad_r_big_ = std::move(grad_R);
    sys.minimum_ = std::move(minimum);
    sys.box_ = std::move(box);
    return sys;
}

double ClassicalFastSystem::potential(const RealVector& r, const RealVector& R) const {
    switch (kind_) {
        case Kind::BuiltinHarmonic: {
            const double x = r[0] - R[0];
            return 0.5 * masses_[0] * omega_ * omega_ * x * x;
        }
        case Kind::BuiltinQuarticCoupled: {
            const double x1 = r[0] - R[0];
            const double x2 = r[1] - R[1];
            return x1 * x1 * x2 * x2 + 0.25 * beta_ * (x1 * x1 * x1 * x1 + x2 * x2 * x2 * x2);
        }
        case Kind::SeparableAnalytic:
            return potential_(r, R);
    }
    throw Error("classical system: unknown kind");
}

double ClassicalFastSystem::hamiltonian(const PhasePoint& z, const RealVector& R) const {
    check_point_dims(*this, z);
    check_params(*this, R);
    return kinetic(z.p, masses_) + potential(z.r, R);
}

RealVector ClassicalFastSystem::force_r(const RealVector& r, const RealVector& R) const {
    switch (kind_) {
        case Kind::BuiltinHarmonic: {
            RealVector f(1);
            f[0] = -masses_[0] * omega_ * omega_ * (r[0] - R[0]);
            return f;
        }
        case Kind::BuiltinQuarticCoupled: {
            const double x1 = r[0] - R[0];
            const double x2 = r[1] - R[1];
            RealVector f(2);
            f[0] = -(2.0 * x1 * x2 * x2 + beta_ * x1 * x1 * x1);
            f[1] = -(2.0 * x1 * x1 * x2 + beta_ * x2 * x2 * x2);
            return f;
        }
        case Kind::SeparableAnalytic:
            return force_r_(r, R);
    }
    throw Error("classical system: unknown kind");
}

RealVector ClassicalFastSystem::grad_R(const RealVector& r, const RealVector& R) const {
    // Rigid translation coupling: dh/dR_i = -dV0/dx_i = (force_r)_i.
    if (kind_ == Kind::SeparableAnalytic) return grad_r_big_(r, R);
    return force_r(r, R);
}

double ClassicalFastSystem::potential_minimum(const RealVector& R) const {
    check_params(*this, R);
    if (kind_ == Kind::SeparableAnalytic) return minimum_(R);
    return 0.0; // both builtins vanish at r = R
}

void ClassicalFastSystem::sampling_box(const RealVector& R, double energy,
                                       RealVector& r_center, RealVector& r_half,
                                       RealVector& p_half) const {
    check_params(*this, R);
    const double slack = 1.001; // covers the shell half-width eta = 1e-3
    switch (kind_) {
        case Kind::BuiltinHarmonic: {
            r_center = R;
            const double e = energy * slack;
            r_half = RealVector::Constant(
                1, 1.05 * std::sqrt(2.0 * e / (masses_[0] * omega_ * omega_)));
            p_half = RealVector::Constant(1, 1.05 * std::sqrt(2.0 * masses_[0] * e));
            return;
        }
        case Kind::BuiltinQuarticCoupled: {
            r_center = R;
            const double e = energy * slack;
            r_half = RealVector::Constant(2, 1.05 * std::pow(4.0 * e / beta_, 0.25));
            p_half = RealVector::Constant(2, 1.05 * std::sqrt(2.0 * e));
            return;
        }
        case Kind::SeparableAnalytic:
            box_(R, energy, r_center, r_half, p_half);
            return;
    }
    throw Error("classical system: unknown kind");
}

PhasePoint ClassicalFastSystem::torus_point(const RealVector& actions,
                                            const RealVector& angles,
                                            const RealVector& R) const {
    if (!integrable())
        throw NotIntegrable("torus_point: no action-angle chart for this system");
    check_params(*this, R);
    if (actions.size() != dof_ || angles.size() != dof_)
        throw DimensionMismatch("torus_point: action/angle arity must equal dof");
    if (actions[0] < 0.0) throw Error("torus_point: action must be nonnegative");
    const double amp_r = std::sqrt(2.0 * actions[0] / (masses_[0] * omega_));
    const double amp_p = std::sqrt(2.0 * actions[0] * masses_[0] * omega_);
    PhasePoint z;
    z.r = RealVector::Constant(1, R[0] + amp_r * std::sin(angles[0]));
    z.p = RealVector::Constant(1, amp_p * std::cos(angles[0]));
    return z;
}

double ClassicalFastSystem::harmonic_omega() const {
    if (kind_ != Kind::BuiltinHarmonic) throw Error("harmonic_omega: wrong system kind");
    return omega_;
}

double ClassicalFastSystem::quartic_beta() const {
    if (kind_ != Kind::BuiltinQuarticCoupled) throw Error("quartic_beta: wrong system kind");
    return beta_;
}

ClassicalEnsemble sample_energy_shell(const ClassicalFastSystem& sys, const RealVector& R,
                                      double energy, std::size_t count,
                                      std::uint64_t seed, double eta) {
    check_params(sys, R);
    if (count == 0) throw SamplingFailure("sample_energy_shell: count must be positive");
    if (!(eta > 0.0)) throw Error("sample_energy_shell: eta must be positive");
    const double floor_energy = sys.potential_minimum(R);
    if (!(energy > floor_energy))
        throw EnergyBelowMinimum("sample_energy_shell: energy at or below potential minimum");

    RealVector r_center, r_half, p_half;
    sys.sampling_box(R, energy, r_center, r_half, p_half);
    const double halfwidth = eta * std::abs(energy);

    ClassicalEnsemble ens;
    ens.weight_model = WeightModel::EnergyShell;
    ens.energy = energy;
    ens.seed = seed;
    ens.shell_halfwidth = halfwidth;
    ens.r_coords = R;
    ens.samples.resize(count);
    std::vector<long> proposals(count, 0);

    const int dof = sys.dof();
    parallel_for(count, thread_count(), [&](std::size_t k) {
        std::mt19937_64 rng(stream_seed(seed, k));
        PhasePoint z;
        z.r.resize(dof);
        z.p.resize(dof);
        for (long trial = 1; trial <= kMaxProposalsPerSample; ++trial) {
            for (int i = 0; i < dof; ++i)
                z.r[i] = uniform_in(rng, r_center[i] - r_half[i], r_center[i] + r_half[i]);
            for (int i = 0; i < dof; ++i)
                z.p[i] = uniform_in(rng, -p_half[i], p_half[i]);
            if (std::abs(sys.hamiltonian(z, R) - energy) <= halfwidth) {
                ens.samples[k] = z;
                proposals[k] = trial;
                return;
            }
        }
        throw SamplingFailure("sample_energy_shell: acceptance rate below 1e-4");
    });

    double total = 0.0;
    for (long c : proposals) total += static_cast<double>(c);
    if (static_cast<double>(count) / total < kMinAcceptanceRate)
        throw SamplingFailure("sample_energy_shell: acceptance rate below 1e-4");
    return ens;
}

ClassicalEnsemble sample_torus(const ClassicalFastSystem& sys, const RealVector& R,
                               const RealVector& actions, std::size_t count,
                               std::uint64_t seed) {
    check_params(sys, R);
    if (!sys.integrable())
        throw NotIntegrable("sample_torus: system has no action-angle chart");
    if (count == 0) throw SamplingFailure("sample_torus: count must be positive");
    ClassicalEnsemble ens;
    ens.weight_model = WeightModel::Torus;
    ens.actions = actions;
    ens.seed = seed;
    ens.r_coords = R;
    ens.samples.resize(count);
    const int dof = sys.dof();
    parallel_for(count, thread_count(), [&](std::size_t k) {
        std::mt19937_64 rng(stream_seed(seed, k));
        RealVector angles(dof);
        for (int i = 0; i < dof; ++i) angles[i] = kTwoPi * uniform01(rng);
        ens.samples[k] = sys.torus_point(actions, angles, R);
    });
    return ens;
}

MeanStderr microcanonical_average(const ClassicalFastSystem& sys, const RealVector& R,
                                  double energy, const ClassicalObservable& obs,
                                  std::size_t count, std::uint64_t seed, double eta) {
    if (count < 100) throw Error("microcanonical_average: count must be at least 100");
    const ClassicalEnsemble ens = sample_energy_shell(sys, R, energy, count, seed, eta);
    Eigen::MatrixXd vals(static_cast<Eigen::Index>(count), 1);
    parallel_for(count, thread_count(), [&](std::size_t k) {
        vals(static_cast<Eigen::Index>(k), 0) = obs(ens.samples[k]);
    });
    return column_stats(vals, 0);
}

std::vector<PhasePoint> trajectory(const ClassicalFastSystem& sys, const RealVector& R,
                                   const PhasePoint& start, const RealVector& t_grid,
                                   double dt) {
    check_params(sys, R);
    check_point_dims(sys, start);
    if (!(dt > 0.0)) throw Error("trajectory: dt must be positive");
    if (t_grid.size() < 1) throw DimensionMismatch("trajectory: empty time grid");

    const double e0 = sys.hamiltonian(start, R);
    const double drift_scale = std::max(std::abs(e0), 1e-12);

    std::vector<PhasePoint> out;
    out.reserve(static_cast<std::size_t>(t_grid.size()));
    PhasePoint z = start;
    RealVector f = sys.force_r(z.r, R);
    double t_prev = 0.0;
    for (Eigen::Index j = 0; j < t_grid.size(); ++j) {
        const double delta = t_grid[j] - t_prev;
        if (delta != 0.0) {
            const long n = std::max(1L, std::lround(std::abs(delta) / dt));
            verlet_steps(sys, R, z, f, delta / static_cast<double>(n), n);
        }
        t_prev = t_grid[j];
        const double drift = std::abs(sys.hamiltonian(z, R) - e0) / drift_scale;
        if (drift > kEnergyDriftTolerance) {
            std::ostringstream os;
            os << "trajectory: relative energy drift " << drift << " at t = " << t_grid[j]
               << " exceeds " << kEnergyDriftTolerance << " (reduce dt)";
            throw StepSizeTooLarge(os.str());
        }
        out.push_back(z);
    }
    return out;
}

ClassicalTrace classical_correlation(const ClassicalFastSystem& sys, const RealVector& R,
                                     const ClassicalEnsemble& ensemble,
                                     const ClassicalObservable& a_obs,
                                     const std::vector<ClassicalObservable>& b_obs,
                                     const RealVector& times, double dt) {
    const SampleSeries series = correlation_series(sys, R, ensemble, a_obs, b_obs, times, dt);
    const int d = static_cast<int>(b_obs.size());
    ClassicalTrace trace;
    trace.times = times;
    trace.q.assign(static_cast<std::size_t>(d), RealVector::Zero(times.size()));
    trace.stderr_of_mean.assign(static_cast<std::size_t>(d), RealVector::Zero(times.size()));
    for (int i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < times.size(); ++j) {
            const MeanStderr st = column_stats(series.vals[static_cast<std::size_t>(i)], j);
            trace.q[static_cast<std::size_t>(i)][j] = st.mean;
            trace.stderr_of_mean[static_cast<std::size_t>(i)][j] = st.stderr_mean;
        }
    }
    return trace;
}

double torus_average(const ClassicalFastSystem& sys, const RealVector& actions,
                     const ClassicalObservable& obs, int angles_per_dof,
                     const RealVector& R) {
    if (!sys.integrable())
        throw NotIntegrable("torus_average: system has no action-angle chart");
    if (angles_per_dof < 1) throw Error("torus_average: need at least one angle");
    const int n = angles_per_dof;
    std::vector<double> vals(static_cast<std::size_t>(n));
    RealVector angles(1);
    for (int j = 0; j < n; ++j) {
        angles[0] = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
        vals[static_cast<std::size_t>(j)] = obs(sys.torus_point(actions, angles, R));
    }
    return pairwise_sum(vals) / static_cast<double>(n);
}

ClassicalTheoremReport classical_theorem_check(
    const ClassicalFastSystem& sys, const RealVector& R, const ClassicalObservable& a_obs,
    const std::vector<ClassicalObservable>& b_obs,
    const std::vector<ClassicalObservable>& b_generator, const EnsembleSpec& spec,
    const std::vector<double>& s_values, double lambda_c, const RealVector& times,
    double dt) {
    if (b_generator.size() != b_obs.size())
        throw DimensionMismatch("classical_theorem_check: need one generator per direction");
    if (s_values.empty()) throw Error("classical_theorem_check: need at least one s value");
    for (double s : s_values)
        if (!(s > 0.0)) throw Error("classical_theorem_check: s values must be positive");

    const ClassicalEnsemble ens =
        spec.kind == WeightModel::EnergyShell
            ? sample_energy_shell(sys, R, spec.energy, spec.count, spec.seed, spec.eta)
            : sample_torus(sys, R, spec.actions, spec.count, spec.seed);

    const SampleSeries series = correlation_series(sys, R, ens, a_obs, b_obs, times, dt);
    const int d = static_cast<int>(b_obs.size());
    const Eigen::Index count = static_cast<Eigen::Index>(ens.samples.size());
    const double hbar = sys.hbar();

    ClassicalTheoremReport rep;
    rep.lambda_c = lambda_c;
    rep.s_values = s_values;
    rep.times = times;
    rep.q.assign(static_cast<std::size_t>(d), RealVector::Zero(times.size()));
    rep.q_stderr.assign(static_cast<std::size_t>(d), RealVector::Zero(times.size()));
    for (int i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < times.size(); ++j) {
            const MeanStderr st = column_stats(series.vals[static_cast<std::size_t>(i)], j);
            rep.q[static_cast<std::size_t>(i)][j] = st.mean;
            rep.q_stderr[static_cast<std::size_t>(i)][j] = st.stderr_mean;
        }
    }

    // Decay estimate: peak |Q_c| over the first fifth of the grid vs the
    // last fifth, using the mean trace across all directions.
    const double span = times[times.size() - 1] - times[0];
    const double early_end = times[0] + 0.2 * span;
    const double late_start = times[times.size() - 1] - 0.2 * span;
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        for (int i = 0; i < d; ++i) {
            const double v = std::abs(rep.q[static_cast<std::size_t>(i)][j]);
            if (times[j] <= early_end) rep.envelope_early = std::max(rep.envelope_early, v);
            if (times[j] >= late_start) rep.envelope_late = std::max(rep.envelope_late, v);
        }
    }
    rep.envelope_fraction =
        rep.envelope_early > 0.0 ? rep.envelope_late / rep.envelope_early : 0.0;

    // Regularized integral per sample and s, then per-sample Richardson
    // extrapolation in s^2 from the two smallest s values.
    const std::vector<double> weights = trapezoid_weights(times);
    std::size_t i2 = 0;
    for (std::size_t i = 1; i < s_values.size(); ++i)
        if (s_values[i] < s_values[i2]) i2 = i;
    std::size_t i1 = i2;
    if (s_values.size() > 1) {
        i1 = (i2 == 0) ? 1 : 0;
        for (std::size_t i = 0; i < s_values.size(); ++i)
            if (i != i2 && s_values[i] < s_values[i1]) i1 = i;
    }

    rep.lhs = RealVector::Zero(d);
    rep.lhs_stderr = RealVector::Zero(d);
    for (int i = 0; i < d; ++i) {
        Eigen::MatrixXd integrals(count, 1);
        parallel_for(static_cast<std::size_t>(count), thread_count(), [&](std::size_t k) {
            auto weighted = [&](double s) {
                double acc = 0.0;
                for (Eigen::Index j = 0; j < times.size(); ++j)
                    acc += weights[static_cast<std::size_t>(j)] * std::exp(-s * times[j]) *
                           series.vals[static_cast<std::size_t>(i)](static_cast<Eigen::Index>(k), j);
                return acc;
            };
            double value = weighted(s_values[i2]);
            if (s_values.size() > 1) {
                const double s1 = s_values[i1], s2 = s_values[i2];
                const double kk = s2 * s2 / (s1 * s1 - s2 * s2);
                value = (1.0 + kk) * value - kk * weighted(s1);
            }
            integrals(static_cast<Eigen::Index>(k), 0) = value;
        });
        const MeanStderr st = column_stats(integrals, 0);
        rep.lhs[i] = st.mean;
        rep.lhs_stderr[i] = st.stderr_mean;
    }

    rep.generator_variance = RealVector::Zero(d);
    rep.generator_variance_stderr = RealVector::Zero(d);
    rep.rhs = RealVector::Zero(d);
    rep.rhs_stderr = RealVector::Zero(d);
    for (int i = 0; i < d; ++i) {
        Eigen::MatrixXd gvals(count, 1);
        parallel_for(static_cast<std::size_t>(count), thread_count(), [&](std::size_t k) {
            gvals(static_cast<Eigen::Index>(k), 0) =
                b_generator[static_cast<std::size_t>(i)](ens.samples[k]);
        });
        const MeanStderr st = column_stats(gvals, 0);
        const double var =
            st.stderr_mean * st.stderr_mean * static_cast<double>(count); // sample variance
        rep.generator_variance[i] = var;
        rep.generator_variance_stderr[i] =
            var * std::sqrt(2.0 / static_cast<double>(count - 1));
        rep.rhs[i] = -2.0 * hbar * lambda_c * var;
        rep.rhs_stderr[i] = 2.0 * hbar * std::abs(lambda_c) * rep.generator_variance_stderr[i];
    }

    rep.residuals = (rep.lhs - rep.rhs).cwiseAbs();
    rep.combined_stderr = RealVector::Zero(d);
    for (int i = 0; i < d; ++i)
        rep.combined_stderr[i] = std::sqrt(rep.lhs_stderr[i] * rep.lhs_stderr[i] +
                                           rep.rhs_stderr[i] * rep.rhs_stderr[i]);
    return rep;
}

ClassicalObservable gaussian_window(const PhasePoint& z0, double sigma) {
    if (!(sigma > 0.0)) throw Error("gaussian_window: sigma must be positive");
    return [z0, sigma](const PhasePoint& z) {
        const double dr = (z.r - z0.r).squaredNorm();
        const double dp = (z.p - z0.p).squaredNorm();
        return std::exp(-(dr + dp) / (2.0 * sigma * sigma));
    };
}

ClassicalObservable force_observable(const ClassicalFastSystem& sys, const RealVector& R,
                                     int direction) {
    if (direction < 0 || direction >= sys.param_dim())
        throw DimensionMismatch("force_observable: direction out of range");
    return [sys, R, direction](const PhasePoint& z) { return sys.grad_R(z.r, R)[direction]; };
}

std::vector<ClassicalObservable> force_observables(const ClassicalFastSystem& sys,
                                                   const RealVector& R) {
    std::vector<ClassicalObservable> out;
    out.reserve(static_cast<std::size_t>(sys.param_dim()));
    for (int i = 0; i < sys.param_dim(); ++i) out.push_back(force_observable(sys, R, i));
    return out;
}

ClassicalObservable translation_generator(const ClassicalFastSystem& sys, int direction) {
    if (direction < 0 || direction >= sys.dof())
        throw DimensionMismatch("translation_generator: direction out of range");
    const double hbar = sys.hbar();
    return [hbar, direction](const PhasePoint& z) { return -z.p[direction] / hbar; };
}

} // namespace geomflux
