#include "geomflux/report.hpp"

#include <cmath>
#include <fstream>

#include "geomflux/errors.hpp"
#include "geomflux/util.hpp"

namespace geomflux {

bool RunReport::all_passed() const {
    if (!error.is_null()) return false;
    for (const ResidualCheck& check : residual_checks)
        if (!check.passed) return false;
    return true;
}

nlohmann::ordered_json RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["task"] = task;
    j["library_version"] = kLibraryVersion;
    j["config_hash"] = config_hash;
    j["config"] = config_echo;
    j["results"] = results;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const ResidualCheck& check : residual_checks) {
        nlohmann::ordered_json c;
        c["name"] = check.name;
        c["value"] = finite_or_marked(check.value);
        c["tolerance"] = check.tolerance;
        c["passed"] = check.passed;
        checks.push_back(std::move(c));
    }
    j["residual_checks"] = checks;
    j["all_passed"] = all_passed();
    j["error"] = error;
    j["wall_time_seconds"] = nullptr;
    return j;
}

nlohmann::ordered_json finite_or_marked(double x) {
    if (std::isfinite(x)) return x;
    nlohmann::ordered_json marker;
    marker["failed"] = std::isnan(x) ? "nan" : (x > 0 ? "+inf" : "-inf");
    return marker;
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out = "fnv1a64:";
    for (int shift = 60; shift >= 0; shift -= 4) out += digits[(h >> shift) & 0xf];
    return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw Error("CsvTable: header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size())
        throw Error("CsvTable: row arity does not match the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::cell(double x) { return format_double(x); }

std::string CsvTable::cell(long x) { return std::to_string(x); }

std::string CsvTable::cell(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char ch : text) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

std::string CsvTable::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += cell(header_[i]);
    }
    out += '\n';
    for (const std::vector<std::string>& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream stream(path, std::ios::binary | std::ios::trunc);
    if (!stream) throw Error("cannot open " + path.string() + " for writing");
    stream << content;
    if (!stream) throw Error("failed writing " + path.string());
}

} // namespace geomflux
