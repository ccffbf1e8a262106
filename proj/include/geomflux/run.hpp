#pragma once

#include <filesystem>

#include "geomflux/config.hpp"
#include "geomflux/report.hpp"

namespace geomflux {

struct RunOutcome {
    RunReport report;
    int exit_code = 0; // 0 iff the run completed and every residual check passed
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
};

// Executes the configured task and writes <task>.csv and <task>.json into
// out_dir. Module errors are caught and recorded in the report; rows already
// computed are still written, and the exit code turns nonzero. The measured
// wall time goes to stderr only.
RunOutcome run(const RunConfig& config, const std::filesystem::path& out_dir);

} // namespace geomflux
