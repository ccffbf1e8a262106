#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace geomflux {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct ResidualCheck {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Machine-readable summary of one run. wall_time_seconds is present but
// always null so reruns stay byte-identical; the measured time is printed to
// stderr instead.
struct RunReport {
    std::string task;
    nlohmann::ordered_json config_echo;
    std::string config_hash; // "fnv1a64:" + 16 hex digits
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::vector<ResidualCheck> residual_checks;
    nlohmann::ordered_json error; // null while the run is clean

    bool all_passed() const; // no error and every residual check passed
    nlohmann::ordered_json to_json() const;
};

// Finite numbers pass through; NaN and infinities become a marker object so
// no bare nonfinite value ever reaches a report.
nlohmann::ordered_json finite_or_marked(double x);

std::string hash_hex(std::uint64_t h); // "fnv1a64:" + 16 lowercase hex digits

// Fixed-order CSV table. Numeric cells go through the shortest round-trip
// formatter, so identical data produces identical bytes.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> row); // arity must match the header

    static std::string cell(double x);
    static std::string cell(long x);
    static std::string cell(const std::string& text); // quoted when needed

    std::string to_string() const;
    std::size_t row_count() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace geomflux
