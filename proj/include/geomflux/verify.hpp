#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geomflux {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double max_residual = 0.0; // worst observed value, in the tolerance's units
    double tolerance = 0.0;
    std::string detail; // deterministic note: sub-check values, case counts
};

// Runs the built-in verification suite (the single-process criteria; the
// byte-identity check needs two CLI invocations and lives in the acceptance
// driver). `seed` feeds the random ensembles; fixed workloads otherwise.
std::vector<CriterionResult> run_all_criteria(std::uint64_t seed);

// Fixed-width pass/fail table, identical text for identical results.
std::string format_criteria_table(const std::vector<CriterionResult>& results);

} // namespace geomflux
