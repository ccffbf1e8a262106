#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "geomflux/config.hpp"

using namespace geomflux;
using nlohmann::ordered_json;

namespace {

bool any_issue_contains(const SchemaError& e, const std::string& needle) {
    for (const std::string& issue : e.issues)
        if (issue.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("task names round-trip and unknown names are rejected") {
    for (const char* name :
         {"phase", "tensor", "correlation", "theorem", "susceptibility", "classical"})
        CHECK(task_name(task_from_name(name)) == name);
    CHECK_THROWS_AS(task_from_name("phases"), Error);
}

TEST_CASE("defaults are applied and the canonical form round-trips") {
    const std::string text = R"({
        "task": "phase",
        "family": {"kind": "spin"},
        "path": {"waypoints": [[0, 0, 1], [0.6, 0, 0.8]]}
    })";
    const RunConfig cfg = validate_config(text);
    CHECK(cfg.task == TaskKind::Phase);
    CHECK(cfg.canonical.at("seed").get<long>() == 1);
    CHECK(cfg.canonical.at("family").at("j").get<double>() == 0.5);
    CHECK(cfg.canonical.at("family").at("hbar").get<double>() == 1.0);
    CHECK(cfg.canonical.at("route").get<std::string>() == "ap");
    CHECK(cfg.canonical.at("path").at("closed").get<bool>() == false);
    CHECK(cfg.canonical.at("path").at("samples").get<long>() == 512);
    CHECK(cfg.canonical.at("tolerances").at("phase_error").get<double>() == 1e-6);

    const RunConfig again = validate_config(cfg.serialize());
    CHECK(again.canonical == cfg.canonical);
    CHECK(again.hash() == cfg.hash());
}

TEST_CASE("invalid JSON and non-object documents fail as schema errors") {
    CHECK_THROWS_AS(validate_config("{oops"), SchemaError);
    try {
        validate_config("[1, 2]");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.issues.size() == 1);
    }
}

TEST_CASE("unknown keys produce nearest-key suggestions") {
    const std::string text = R"({
        "task": "theorem",
        "family": {"kind": "spin", "hbarr": 1.0},
        "r": [0.4, 0.7, -0.3],
        "r0": [0.1, -0.2, 0.9]
    })";
    try {
        validate_config(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(any_issue_contains(e, "hbarr"));
        CHECK(any_issue_contains(e, "did you mean \"hbar\""));
    }
}

TEST_CASE("point arity is checked against the family") {
    const std::string text = R"({
        "task": "theorem",
        "family": {"kind": "spin"},
        "r": [0.4, 0.7],
        "r0": [0.1, -0.2, 0.9]
    })";
    try {
        validate_config(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(any_issue_contains(e, "$.r"));
        CHECK(any_issue_contains(e, "does not match"));
    }
}

TEST_CASE("every problem is reported in one pass") {
    const std::string text = R"({
        "task": "tensor",
        "family": {"kind": "spin"},
        "level": -1,
        "points": [[0.1, 0.2]],
        "bogus": 1
    })";
    try {
        validate_config(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.issues.size() == 3);
        CHECK(std::string(e.what()).find("3 issues") != std::string::npos);
    }
}

TEST_CASE("matrix coefficients must be Hermitian") {
    const std::string text = R"({
        "task": "tensor",
        "family": {
            "kind": "matrix-polynomial",
            "dim": 2,
            "param_dim": 1,
            "constant": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
            "linear": [[[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]]
        },
        "points": [[0.5]]
    })";
    try {
        validate_config(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(any_issue_contains(e, "$.family.constant"));
        CHECK(any_issue_contains(e, "Hermitian"));
    }
}

TEST_CASE("level must fit the family dimension") {
    const std::string text = R"({
        "task": "tensor",
        "family": {"kind": "spin"},
        "level": 5,
        "points": [[0.1, 0.2, 0.9]]
    })";
    try {
        validate_config(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(any_issue_contains(e, "$.level"));
        CHECK(any_issue_contains(e, "out of range"));
    }
}

TEST_CASE("classical settings are gated by the system kind") {
    const std::string text = R"({
        "task": "classical",
        "classical": {
            "system": "harmonic",
            "beta": 0.1,
            "r": [0.3],
            "ensemble": {"kind": "torus", "actions": [0.7], "count": 100},
            "window": {"r": [0.9], "p": [0.4], "sigma": 0.8},
            "times": {"start": 0, "stop": 10, "count": 11}
        }
    })";
    try {
        validate_config(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(any_issue_contains(e, "$.classical.beta"));
        CHECK(any_issue_contains(e, "only valid for \"quartic-coupled\""));
    }

    // energy is an energy-shell setting, not a torus one.
    const std::string mixed = R"({
        "task": "classical",
        "classical": {
            "system": "harmonic",
            "r": [0.3],
            "ensemble": {"kind": "torus", "actions": [0.7], "energy": 1.0, "count": 100},
            "window": {"r": [0.9], "p": [0.4], "sigma": 0.8},
            "times": {"start": 0, "stop": 10, "count": 11}
        }
    })";
    try {
        validate_config(mixed);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(any_issue_contains(e, "$.classical.ensemble.energy"));
    }
}

TEST_CASE("time grids accept arrays and start/stop/count objects") {
    const ordered_json explicit_grid = ordered_json::parse("[0.0, 0.5, 2.0]");
    const RealVector a = time_grid(explicit_grid);
    REQUIRE(a.size() == 3);
    CHECK(a[2] == 2.0);

    const ordered_json spanned = ordered_json::parse(R"({"start": 0, "stop": 10, "count": 5})");
    const RealVector b = time_grid(spanned);
    REQUIRE(b.size() == 5);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == 2.5);
    CHECK(b[4] == 10.0);

    const std::string bad = R"({
        "task": "correlation",
        "family": {"kind": "spin"},
        "r": [0.4, 0.7, -0.3],
        "r0": [0.1, -0.2, 0.9],
        "times": [3.0, 1.0]
    })";
    try {
        validate_config(bad);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(any_issue_contains(e, "$.times"));
        CHECK(any_issue_contains(e, "ascending"));
    }
}

TEST_CASE("family and classical factories honour the validated document") {
    const RunConfig poly = validate_config(R"({
        "task": "tensor",
        "family": {"kind": "seeded-random-polynomial", "dim": 4, "param_dim": 2, "seed": 77},
        "points": [[0.35, -0.8]]
    })");
    const HamiltonianFamily from_cfg = family_from_config(poly);
    CHECK(from_cfg.dim() == 4);
    CHECK(from_cfg.param_dim() == 2);
    const auto direct = HamiltonianFamily::seeded_random_polynomial(4, 2, 77);
    const ParameterPoint probe{0.35, -0.8};
    CHECK((from_cfg.evaluate(probe).matrix().array() ==
           direct.evaluate(probe).matrix().array())
              .all());

    const RunConfig classical = validate_config(R"({
        "task": "classical",
        "classical": {
            "system": "harmonic",
            "mass": 2.0,
            "omega": 1.5,
            "r": [0.3],
            "ensemble": {"kind": "energy-shell", "energy": 1.0, "count": 100},
            "window": {"r": [0.9], "p": [0.4], "sigma": 0.8},
            "times": {"start": 0, "stop": 10, "count": 11}
        }
    })");
    const ClassicalFastSystem sys = classical_system_from_config(classical);
    CHECK(sys.kind() == ClassicalFastSystem::Kind::BuiltinHarmonic);
    CHECK(sys.harmonic_omega() == 1.5);
    CHECK(sys.masses()[0] == 2.0);
    CHECK(classical.canonical.at("classical").at("ensemble").at("eta").get<double>() == 1e-3);
    CHECK(classical.canonical.at("classical").at("lambda_c").get<double>() == 1.0);
    CHECK(classical.canonical.at("tolerances").at("sigma").get<double>() == 3.0);
}
