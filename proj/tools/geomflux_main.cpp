#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "geomflux/config.hpp"
#include "geomflux/errors.hpp"
#include "geomflux/report.hpp"
#include "geomflux/run.hpp"
#include "geomflux/util.hpp"
#include "geomflux/verify.hpp"

namespace {

std::string resolve_out_dir(const std::string& cli_value) {
    if (!cli_value.empty()) return cli_value;
    if (const char* env = std::getenv("GEOMFLUX_OUT_DIR"); env && *env) return env;
    return ".";
}

int run_task(const std::string& config_path, const std::string& out_dir, int threads,
             bool have_seed, std::uint64_t seed) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "geomflux: cannot read config file '%s'\n",
                     config_path.c_str());
        return 1;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    geomflux::RunConfig config;
    try {
        config = geomflux::validate_config(buffer.str());
    } catch (const geomflux::SchemaError& e) {
        std::fprintf(stderr, "geomflux: %s\n", e.what());
        for (const std::string& issue : e.issues)
            std::fprintf(stderr, "  %s\n", issue.c_str());
        return 1;
    }
    if (have_seed) config.canonical["seed"] = seed;
    if (threads > 0) geomflux::set_thread_count(threads);

    const geomflux::RunOutcome outcome = geomflux::run(config, resolve_out_dir(out_dir));
    return outcome.exit_code;
}

int run_verify_all(const std::string& out_dir, int threads, std::uint64_t seed) {
    if (threads > 0) geomflux::set_thread_count(threads);
    const std::vector<geomflux::CriterionResult> results = geomflux::run_all_criteria(seed);
    std::fputs(geomflux::format_criteria_table(results).c_str(), stdout);

    geomflux::CsvTable table({"id", "name", "passed", "max_residual", "tolerance"});
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    bool all = true;
    for (const geomflux::CriterionResult& res : results) {
        table.add_row({geomflux::CsvTable::cell(static_cast<long>(res.id)),
                       geomflux::CsvTable::cell(res.name),
                       res.passed ? "true" : "false",
                       geomflux::CsvTable::cell(res.max_residual),
                       geomflux::CsvTable::cell(res.tolerance)});
        nlohmann::ordered_json row;
        row["id"] = res.id;
        row["name"] = res.name;
        row["passed"] = res.passed;
        row["max_residual"] = geomflux::finite_or_marked(res.max_residual);
        row["tolerance"] = res.tolerance;
        row["detail"] = res.detail;
        rows.push_back(std::move(row));
        all = all && res.passed;
    }
    nlohmann::ordered_json doc;
    doc["task"] = "verify-all";
    doc["library_version"] = geomflux::kLibraryVersion;
    doc["seed"] = seed;
    doc["results"] = std::move(rows);
    doc["all_passed"] = all;

    const std::filesystem::path dir = resolve_out_dir(out_dir);
    geomflux::write_text_file(dir / "verify-all.csv", table.to_string());
    geomflux::write_text_file(dir / "verify-all.json", doc.dump(2) + "\n");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometric structures and time-correlation functions for parameterized "
                 "Hermitian families"};
    app.require_subcommand(1);

    struct TaskArgs {
        std::string config_path;
        std::string out_dir;
        int threads = 0;
        std::uint64_t seed = 0;
        CLI::App* cmd = nullptr;
        CLI::Option* seed_opt = nullptr;
    };

    const std::vector<std::pair<std::string, std::string>> tasks = {
        {"phase", "geometric phase along a parameter path"},
        {"tensor", "quantum geometric tensor at parameter points"},
        {"correlation", "time-correlation difference Q(t)"},
        {"theorem", "fluctuation vs correlation-integral identity"},
        {"susceptibility", "Laplace-transformed correlation asymmetry"},
        {"classical", "classical-ensemble correlation check"},
    };

    std::vector<TaskArgs> args(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(tasks[i].first, tasks[i].second);
        cmd->add_option("--config", args[i].config_path, "JSON config file")
            ->required();
        cmd->add_option("--out-dir", args[i].out_dir,
                        "output directory (default: $GEOMFLUX_OUT_DIR or .)");
        cmd->add_option("--threads", args[i].threads, "worker thread count");
        args[i].seed_opt = cmd->add_option("--seed", args[i].seed,
                                           "override the config seed");
        args[i].cmd = cmd;
    }

    std::string verify_out_dir;
    int verify_threads = 0;
    std::uint64_t verify_seed = 1;
    CLI::App* verify = app.add_subcommand("verify-all", "run every built-in acceptance check");
    verify->add_option("--out-dir", verify_out_dir,
                       "output directory (default: $GEOMFLUX_OUT_DIR or .)");
    verify->add_option("--threads", verify_threads, "worker thread count");
    verify->add_option("--seed", verify_seed, "ensemble seed (default 1)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return run_verify_all(verify_out_dir, verify_threads, verify_seed);
        for (const TaskArgs& task : args)
            if (task.cmd->parsed())
                return run_task(task.config_path, task.out_dir, task.threads,
                                task.seed_opt->count() > 0, task.seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "geomflux: %s\n", e.what());
        return 1;
    }
    return 1;
}
