#include "geomflux/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "geomflux/classical.hpp"
#include "geomflux/correlation.hpp"
#include "geomflux/errors.hpp"
#include "geomflux/spectral_geometry.hpp"
#include "geomflux/util.hpp"

namespace geomflux {

namespace {

using nlohmann::ordered_json;

std::string error_type_name(const std::exception& e) {
    if (dynamic_cast<const NonHermitianInput*>(&e)) return "NonHermitianInput";
    if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const DegenerateSpectrum*>(&e)) return "DegenerateSpectrum";
    if (dynamic_cast<const PathNotClosed*>(&e)) return "PathNotClosed";
    if (dynamic_cast<const LevelTrackingLost*>(&e)) return "LevelTrackingLost";
    if (dynamic_cast<const ReferenceOverlapVanishing*>(&e)) return "ReferenceOverlapVanishing";
    if (dynamic_cast<const EnergyBelowMinimum*>(&e)) return "EnergyBelowMinimum";
    if (dynamic_cast<const SamplingFailure*>(&e)) return "SamplingFailure";
    if (dynamic_cast<const StepSizeTooLarge*>(&e)) return "StepSizeTooLarge";
    if (dynamic_cast<const NotIntegrable*>(&e)) return "NotIntegrable";
    if (dynamic_cast<const SchemaError*>(&e)) return "SchemaError";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "UnexpectedException";
}

ordered_json jvec(const RealVector& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(finite_or_marked(v[i]));
    return out;
}

ordered_json jcomplex(Complex z) {
    return ordered_json::array({finite_or_marked(z.real()), finite_or_marked(z.imag())});
}

RealVector point_from_json(const ordered_json& v) {
    RealVector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    return out;
}

std::vector<double> doubles_from_json(const ordered_json& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const ordered_json& x : v) out.push_back(x.get<double>());
    return out;
}

OmegaRoute route_from_name(const std::string& name) {
    if (name == "ap") return OmegaRoute::AP;
    if (name == "fluctuation") return OmegaRoute::Fluctuation;
    if (name == "sum-over-states") return OmegaRoute::SumOverStates;
    if (name == "metric") return OmegaRoute::Metric;
    throw Error("unknown omega route \"" + name + "\"");
}

void add_check(RunReport& report, const std::string& name, double value, double tolerance) {
    ResidualCheck check;
    check.name = name;
    check.value = value;
    check.tolerance = tolerance;
    check.passed = std::isfinite(value) && value <= tolerance;
    report.residual_checks.push_back(std::move(check));
}

// Resamples the waypoint polyline to `count` points spaced uniformly in arc
// length, keeping the first and last waypoints exactly.
std::vector<ParameterPoint> resample_polyline(const std::vector<RealVector>& waypoints,
                                              long count) {
    std::vector<double> cumulative(waypoints.size(), 0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        cumulative[i] = cumulative[i - 1] + (waypoints[i] - waypoints[i - 1]).norm();
    const double total = cumulative.back();

    std::vector<ParameterPoint> points;
    points.reserve(static_cast<std::size_t>(count));
    std::size_t segment = 0;
    for (long k = 0; k < count; ++k) {
        if (k == 0 || total == 0.0) {
            points.emplace_back(waypoints.front());
            continue;
        }
        if (k == count - 1) {
            points.emplace_back(waypoints.back());
            continue;
        }
        const double target =
            total * static_cast<double>(k) / static_cast<double>(count - 1);
        while (segment + 2 < waypoints.size() && cumulative[segment + 1] <= target)
            ++segment;
        const double seg_len = cumulative[segment + 1] - cumulative[segment];
        const double frac = seg_len > 0.0 ? (target - cumulative[segment]) / seg_len : 0.0;
        points.emplace_back(RealVector(waypoints[segment] +
                                       frac * (waypoints[segment + 1] - waypoints[segment])));
    }
    return points;
}

double tolerance_of(const RunConfig& config, const char* key) {
    return config.canonical.at("tolerances").at(key).get<double>();
}

void run_phase_task(const RunConfig& config, RunReport& report, CsvTable& table) {
    const HamiltonianFamily family = family_from_config(config);
    const ordered_json& pathj = config.canonical.at("path");
    std::vector<RealVector> waypoints;
    for (const ordered_json& wp : pathj.at("waypoints")) waypoints.push_back(point_from_json(wp));
    const long samples = pathj.at("samples").get<long>();
    const bool closed = pathj.at("closed").get<bool>();
    const int level = config.canonical.at("level").get<int>();
    const std::string route_name = config.canonical.at("route").get<std::string>();
    const double tol = tolerance_of(config, "phase_error");

    std::vector<ParameterPoint> pts = resample_polyline(waypoints, samples);
    if (closed) pts.back() = pts.front();
    const ParameterPath path(std::move(pts), closed);

    const PathPhase pp = open_path_phase(family, path, level, route_from_name(route_name));
    report.results["level"] = level;
    report.results["route"] = route_name;
    report.results["closed"] = closed;
    report.results["samples"] = samples;
    report.results["phase"] = finite_or_marked(pp.phase);
    report.results["error_estimate"] = finite_or_marked(pp.error_estimate);
    add_check(report, "phase_error_estimate", pp.error_estimate, tol);

    std::string cyclic_cell, gap_cell;
    if (closed) {
        const double cyclic = cyclic_berry_phase(family, path, level);
        const double gap = std::abs(wrap_angle(pp.phase - cyclic));
        report.results["cyclic_transport_phase"] = finite_or_marked(cyclic);
        report.results["closed_loop_gap"] = finite_or_marked(gap);
        add_check(report, "closed_loop_consistency", gap, tol);
        cyclic_cell = CsvTable::cell(cyclic);
        gap_cell = CsvTable::cell(gap);
    }
    table.add_row({CsvTable::cell(static_cast<long>(level)), route_name,
                   closed ? "true" : "false", CsvTable::cell(samples),
                   CsvTable::cell(pp.phase), CsvTable::cell(pp.error_estimate), cyclic_cell,
                   gap_cell});
}

void run_tensor_task(const RunConfig& config, RunReport& report, CsvTable& table) {
    const HamiltonianFamily family = family_from_config(config);
    const int level = config.canonical.at("level").get<int>();
    const double tol = tolerance_of(config, "route_agreement");
    report.results["level"] = level;
    ordered_json points_out = ordered_json::array();

    double worst_route_gap = 0.0;
    double worst_psd_defect = 0.0;
    for (std::size_t p = 0; p < config.canonical.at("points").size(); ++p) {
        const ParameterPoint point(point_from_json(config.canonical.at("points")[p]));
        const GeometricTensor derivative =
            metric_and_geometric_tensor(family, point, level, MetricRoute::Derivative);
        const GeometricTensor force =
            metric_and_geometric_tensor(family, point, level, MetricRoute::ForceStates);

        const double gap =
            std::max((derivative.g - force.g).cwiseAbs().maxCoeff(),
                     (derivative.v - force.v).cwiseAbs().maxCoeff());
        worst_route_gap = std::max(worst_route_gap, gap);
        const Eigen::SelfAdjointEigenSolver<RealMatrix> psd(derivative.g);
        worst_psd_defect =
            std::max(worst_psd_defect, std::max(0.0, -psd.eigenvalues().minCoeff()));

        ordered_json entry;
        entry["point"] = jvec(point.coords());
        ordered_json g_rows = ordered_json::array();
        ordered_json v_rows = ordered_json::array();
        for (Eigen::Index i = 0; i < derivative.g.rows(); ++i) {
            g_rows.push_back(jvec(RealVector(derivative.g.row(i).transpose())));
            v_rows.push_back(jvec(RealVector(derivative.v.row(i).transpose())));
            for (Eigen::Index j = 0; j < derivative.g.cols(); ++j)
                table.add_row({CsvTable::cell(static_cast<long>(p)),
                               CsvTable::cell(static_cast<long>(i)),
                               CsvTable::cell(static_cast<long>(j)),
                               CsvTable::cell(derivative.g(i, j)),
                               CsvTable::cell(derivative.v(i, j)),
                               CsvTable::cell(force.g(i, j)),
                               CsvTable::cell(force.v(i, j))});
        }
        entry["g"] = g_rows;
        entry["v"] = v_rows;
        entry["route_gap"] = finite_or_marked(gap);
        points_out.push_back(std::move(entry));
        report.results["points"] = points_out; // refreshed so partial failures keep rows
    }
    add_check(report, "route_agreement", worst_route_gap, tol);
    add_check(report, "metric_positive_semidefinite", worst_psd_defect, 1e-10);
}

void run_correlation_task(const RunConfig& config, RunReport& report, CsvTable& table) {
    const HamiltonianFamily family = family_from_config(config);
    const int level = config.canonical.at("level").get<int>();
    const ParameterPoint r(point_from_json(config.canonical.at("r")));
    const ParameterPoint r0(point_from_json(config.canonical.at("r0")));
    const RealVector times = time_grid(config.canonical.at("times"));
    const std::string form = config.canonical.at("form").get<std::string>();
    const double tol = tolerance_of(config, "q_form_agreement");

    const bool both = form == "both";
    const CorrelationTrace trace =
        q_correlation(family, r, r0, level, times,
                      form == "heisenberg" ? QForm::Heisenberg : QForm::Spectral);
    CorrelationTrace alternate;
    if (both) alternate = q_correlation(family, r, r0, level, times, QForm::Heisenberg);

    const int dirs = static_cast<int>(trace.q.size());
    double worst_form_gap = 0.0;
    for (Eigen::Index t = 0; t < times.size(); ++t)
        for (int i = 0; i < dirs; ++i) {
            std::string gap_cell;
            if (both) {
                const double gap = std::abs(trace.q[static_cast<std::size_t>(i)][t] -
                                            alternate.q[static_cast<std::size_t>(i)][t]);
                worst_form_gap = std::max(worst_form_gap, gap);
                gap_cell = CsvTable::cell(gap);
            }
            table.add_row({CsvTable::cell(times[t]), CsvTable::cell(static_cast<long>(i)),
                           CsvTable::cell(trace.c_ab[static_cast<std::size_t>(i)][t]),
                           CsvTable::cell(trace.c_ba[static_cast<std::size_t>(i)][t]),
                           CsvTable::cell(trace.q[static_cast<std::size_t>(i)][t]), gap_cell});
        }

    report.results["level"] = level;
    report.results["form"] = form;
    report.results["directions"] = dirs;
    if (both) add_check(report, "q_form_agreement", worst_form_gap, tol);
    if (times.size() > 0 && times[0] == 0.0) {
        double q0 = 0.0;
        for (int i = 0; i < dirs; ++i)
            q0 = std::max(q0, std::abs(trace.q[static_cast<std::size_t>(i)][0]));
        add_check(report, "q_vanishes_at_zero", q0, 1e-12);
    }
}

void run_theorem_task(const RunConfig& config, RunReport& report, CsvTable& table) {
    const HamiltonianFamily family = family_from_config(config);
    const int level = config.canonical.at("level").get<int>();
    const ParameterPoint r(point_from_json(config.canonical.at("r")));
    const ParameterPoint r0(point_from_json(config.canonical.at("r0")));
    const std::vector<double> s_values = doubles_from_json(config.canonical.at("s_values"));
    const double tol = tolerance_of(config, "theorem_residual");

    const TheoremReport rep = theorem_check(family, r, r0, level, s_values);

    for (Eigen::Index i = 0; i < rep.lhs.size(); ++i)
        table.add_row({CsvTable::cell(static_cast<long>(i)), CsvTable::cell(rep.lhs[i]),
                       CsvTable::cell(rep.rhs[i]), CsvTable::cell(rep.residuals[i]),
                       CsvTable::cell(rep.lambda[i]), CsvTable::cell(rep.delta_b[i]),
                       CsvTable::cell(rep.quadrature_limit[i]),
                       CsvTable::cell(rep.quadrature_limit_error[i])});

    report.results["level"] = level;
    report.results["overlap"] = jcomplex(rep.overlap);
    report.results["lhs"] = jvec(rep.lhs);
    report.results["rhs"] = jvec(rep.rhs);
    report.results["residuals"] = jvec(rep.residuals);
    report.results["lambda"] = jvec(rep.lambda);
    report.results["delta_b"] = jvec(rep.delta_b);
    report.results["quadrature_limit"] = jvec(rep.quadrature_limit);
    report.results["quadrature_limit_error"] = jvec(rep.quadrature_limit_error);
    ordered_json samples = ordered_json::array();
    double worst_ratio = 0.0;
    for (const TheoremSample& sample : rep.samples) {
        ordered_json s;
        s["s"] = sample.s;
        s["mode_sum"] = jvec(sample.mode_sum);
        s["quadrature"] = jvec(sample.quadrature);
        s["quadrature_error"] = jvec(sample.quadrature_error);
        samples.push_back(std::move(s));
        for (Eigen::Index i = 0; i < sample.mode_sum.size(); ++i) {
            const double err = std::max(sample.quadrature_error[i], 1e-300);
            worst_ratio =
                std::max(worst_ratio, std::abs(sample.quadrature[i] - sample.mode_sum[i]) / err);
        }
    }
    report.results["samples"] = samples;

    add_check(report, "theorem_residual", rep.residuals.size() ? rep.residuals.maxCoeff() : 0.0,
              tol);
    add_check(report, "quadrature_within_reported_error", worst_ratio, 1.0);
}

void run_susceptibility_task(const RunConfig& config, RunReport& report, CsvTable& table) {
    const HamiltonianFamily family = family_from_config(config);
    const int level = config.canonical.at("level").get<int>();
    const ParameterPoint r(point_from_json(config.canonical.at("r")));
    const ParameterPoint r0(point_from_json(config.canonical.at("r0")));
    const std::vector<double> z_values = doubles_from_json(config.canonical.at("z_values"));
    const double tol = tolerance_of(config, "limit_agreement");

    const SusceptibilityReport rep = susceptibility(family, r, r0, level, z_values);

    for (std::size_t zi = 0; zi < rep.z_values.size(); ++zi)
        for (std::size_t i = 0; i < rep.chi_ab[zi].size(); ++i) {
            const Complex ab = rep.chi_ab[zi][i];
            const Complex ba = rep.chi_ba[zi][i];
            table.add_row({CsvTable::cell(rep.z_values[zi]),
                           CsvTable::cell(static_cast<long>(i)), CsvTable::cell(ab.real()),
                           CsvTable::cell(ab.imag()), CsvTable::cell(ba.real()),
                           CsvTable::cell(ba.imag()), CsvTable::cell((ab - ba).real()),
                           CsvTable::cell((ab - ba).imag())});
        }

    report.results["level"] = level;
    report.results["extrapolated_difference"] = jvec(rep.extrapolated_difference);
    report.results["theorem_rhs"] = jvec(rep.theorem_rhs);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < rep.extrapolated_difference.size(); ++i)
        worst = std::max(worst,
                         std::abs(rep.extrapolated_difference[i] - rep.theorem_rhs[i]));
    report.results["limit_gap"] = finite_or_marked(worst);
    add_check(report, "limit_agreement", worst, tol);
}

void run_classical_task(const RunConfig& config, RunReport& report, CsvTable& table) {
    const ClassicalFastSystem sys = classical_system_from_config(config);
    const ordered_json& cl = config.canonical.at("classical");
    const RealVector r = point_from_json(cl.at("r"));

    EnsembleSpec spec;
    const ordered_json& ens = cl.at("ensemble");
    if (ens.at("kind").get<std::string>() == "energy-shell") {
        spec.kind = WeightModel::EnergyShell;
        spec.energy = ens.at("energy").get<double>();
        spec.eta = ens.at("eta").get<double>();
    } else {
        spec.kind = WeightModel::Torus;
        spec.actions = point_from_json(ens.at("actions"));
    }
    spec.count = ens.at("count").get<std::size_t>();
    spec.seed = config.canonical.at("seed").get<std::uint64_t>();

    PhasePoint window_center;
    window_center.r = point_from_json(cl.at("window").at("r"));
    window_center.p = point_from_json(cl.at("window").at("p"));
    const ClassicalObservable a_obs =
        gaussian_window(window_center, cl.at("window").at("sigma").get<double>());
    const std::vector<ClassicalObservable> b_obs = force_observables(sys, r);
    std::vector<ClassicalObservable> b_gen;
    for (int i = 0; i < sys.dof(); ++i) b_gen.push_back(translation_generator(sys, i));

    const ClassicalTheoremReport rep = classical_theorem_check(
        sys, r, a_obs, b_obs, b_gen, spec, doubles_from_json(cl.at("s_values")),
        cl.at("lambda_c").get<double>(), time_grid(cl.at("times")),
        cl.at("dt").get<double>());

    for (Eigen::Index t = 0; t < rep.times.size(); ++t)
        for (std::size_t i = 0; i < rep.q.size(); ++i)
            table.add_row({CsvTable::cell(rep.times[t]),
                           CsvTable::cell(static_cast<long>(i)), CsvTable::cell(rep.q[i][t]),
                           CsvTable::cell(rep.q_stderr[i][t])});

    report.results["lhs"] = jvec(rep.lhs);
    report.results["lhs_stderr"] = jvec(rep.lhs_stderr);
    report.results["rhs"] = jvec(rep.rhs);
    report.results["rhs_stderr"] = jvec(rep.rhs_stderr);
    report.results["residuals"] = jvec(rep.residuals);
    report.results["combined_stderr"] = jvec(rep.combined_stderr);
    report.results["generator_variance"] = jvec(rep.generator_variance);
    report.results["generator_variance_stderr"] = jvec(rep.generator_variance_stderr);
    report.results["lambda_c"] = finite_or_marked(rep.lambda_c);
    report.results["envelope_early"] = finite_or_marked(rep.envelope_early);
    report.results["envelope_late"] = finite_or_marked(rep.envelope_late);
    report.results["envelope_fraction"] = finite_or_marked(rep.envelope_fraction);

    double worst_sigma = 0.0;
    for (Eigen::Index i = 0; i < rep.residuals.size(); ++i)
        worst_sigma =
            std::max(worst_sigma, rep.residuals[i] / std::max(rep.combined_stderr[i], 1e-300));
    add_check(report, "theorem_within_sigma", worst_sigma, tolerance_of(config, "sigma"));
}

CsvTable make_table(TaskKind task) {
    switch (task) {
        case TaskKind::Phase:
            return CsvTable({"level", "route", "closed", "samples", "phase", "error_estimate",
                             "cyclic_transport_phase", "closed_loop_gap"});
        case TaskKind::Tensor:
            return CsvTable({"point_index", "i", "j", "g_derivative", "v_derivative",
                             "g_force_states", "v_force_states"});
        case TaskKind::Correlation:
            return CsvTable({"time", "direction", "c_ab", "c_ba", "q", "q_form_gap"});
        case TaskKind::Theorem:
            return CsvTable({"direction", "lhs", "rhs", "residual", "lambda", "delta_b",
                             "quadrature_limit", "quadrature_limit_error"});
        case TaskKind::Susceptibility:
            return CsvTable({"z", "direction", "chi_ab_re", "chi_ab_im", "chi_ba_re",
                             "chi_ba_im", "diff_re", "diff_im"});
        case TaskKind::Classical:
            return CsvTable({"time", "direction", "q_mean", "q_stderr"});
    }
    throw Error("make_table: unknown task kind");
}

} // namespace

RunOutcome run(const RunConfig& config, const std::filesystem::path& out_dir) {
    const auto started = std::chrono::steady_clock::now();

    RunOutcome outcome;
    RunReport& report = outcome.report;
    report.task = task_name(config.task);
    report.config_echo = config.canonical;
    report.config_hash = hash_hex(config.hash());
    report.error = nullptr;

    CsvTable table = make_table(config.task);
    try {
        switch (config.task) {
            case TaskKind::Phase: run_phase_task(config, report, table); break;
            case TaskKind::Tensor: run_tensor_task(config, report, table); break;
            case TaskKind::Correlation: run_correlation_task(config, report, table); break;
            case TaskKind::Theorem: run_theorem_task(config, report, table); break;
            case TaskKind::Susceptibility: run_susceptibility_task(config, report, table); break;
            case TaskKind::Classical: run_classical_task(config, report, table); break;
        }
    } catch (const std::exception& e) {
        ordered_json err;
        err["type"] = error_type_name(e);
        err["message"] = e.what();
        report.error = err;
    }

    outcome.exit_code = report.all_passed() ? 0 : 1;
    outcome.csv_path = out_dir / (report.task + ".csv");
    outcome.json_path = out_dir / (report.task + ".json");
    write_text_file(outcome.csv_path, table.to_string());
    write_text_file(outcome.json_path, report.to_json().dump(2) + "\n");

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    char line[128];
    std::snprintf(line, sizeof line, "geomflux: %s finished in %.3f s\n",
                  report.task.c_str(), seconds);
    std::cerr << line; // stderr only, so stdout and files stay byte-identical
    return outcome;
}

} // namespace geomflux
