#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "geomflux/classical.hpp"
#include "geomflux/hamiltonian_family.hpp"

namespace geomflux {

enum class TaskKind { Phase, Tensor, Correlation, Theorem, Susceptibility, Classical };

TaskKind task_from_name(const std::string& name); // throws Error on unknown task
std::string task_name(TaskKind task);

// Fully resolved run description. `canonical` carries every setting with
// defaults applied and keys in schema order, so serialize() round-trips:
// validate_config(cfg.serialize()).canonical == cfg.canonical.
struct RunConfig {
    TaskKind task = TaskKind::Phase;
    nlohmann::ordered_json canonical;

    std::string serialize() const;
    std::uint64_t hash() const; // FNV-1a over serialize()
};

// Parses and validates a JSON config document. Collects every schema problem
// (path into the document plus reason, with a nearest-key suggestion for
// unknown keys) instead of stopping at the first, then throws SchemaError.
RunConfig validate_config(const std::string& text);

// Constructors for the validated blocks; call only on a RunConfig produced
// by validate_config.
HamiltonianFamily family_from_config(const RunConfig& config);
ClassicalFastSystem classical_system_from_config(const RunConfig& config);

// Time grid from the canonical "times" value: either an explicit ascending
// array or {"start", "stop", "count"} expanded to a uniform grid.
RealVector time_grid(const nlohmann::ordered_json& times);

} // namespace geomflux
