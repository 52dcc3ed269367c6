#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tsvf/circuit_json.hpp"

using namespace tsvf;
using Catch::Matchers::WithinAbs;

namespace {

Json minimal() {
    return Json::parse(R"({
        "modes": ["a", "b"],
        "stages": [
            [{"kind": "beam_splitter", "mode_a": "a", "mode_b": "b"}],
            [{"kind": "detector", "mode": "a", "name": "Da"},
             {"kind": "detector", "mode": "b", "name": "Db"}]
        ],
        "marked_points": {"mid": {"boundary": 1, "mode": "a"}},
        "presets": {
            "demo": {
                "pre_selection": {"state": {"a": [1.0, 0.0]}},
                "post_selections": ["Da", "Db"]
            }
        }
    })");
}

} // namespace

TEST_CASE("a minimal circuit document parses into a working circuit") {
    const CircuitFile file = parse_circuit_json(minimal());
    REQUIRE(file.circuit.validate().empty());
    REQUIRE(file.circuit.stage_count() == 2);
    REQUIRE(file.circuit.detectors().size() == 2);
    REQUIRE(file.circuit.marked_point("mid").boundary == 1);
    REQUIRE(file.presets.count("demo") == 1);

    const Selection pre = preset_pre_selection(file.circuit, file.presets.at("demo"));
    REQUIRE(pre.state->normalized());

    // Default splitter parameters give a balanced 50/50 split.
    const PureState mid = file.circuit.forward_propagate(*pre.state, 1);
    REQUIRE_THAT(std::norm(mid.amplitude(parse_label("a"))), WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(std::norm(mid.amplitude(parse_label("b"))), WithinAbs(0.5, 1e-12));
}

TEST_CASE("unknown and missing fields are rejected with the offending name") {
    Json j = minimal();
    j["extra_knob"] = 3;
    try {
        parse_circuit_json(j);
        FAIL("expected rejection of the unknown field");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("extra_knob") != std::string::npos);
    }

    j = minimal();
    j.erase("stages");
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["stages"][0][0].erase("mode_b");
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["stages"][0][0]["kind"] = "teleporter";
    try {
        parse_circuit_json(j);
        FAIL("expected rejection of the unknown element kind");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("teleporter") != std::string::npos);
    }
}

TEST_CASE("field types are enforced") {
    Json j = minimal();
    j["polarization"] = "yes";
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["stages"][0][0]["theta"] = "wide";
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["marked_points"]["mid"]["boundary"] = -1;
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["marked_points"]["mid"]["boundary"] = 1.5;
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["presets"]["demo"]["pre_selection"]["state"]["a"] = 1.0; // not an [re, im] pair
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["presets"]["demo"]["pre_selection"]["state"]["a"] = Json::array({1.0, 0.0, 0.0});
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);
}

TEST_CASE("presets validate their own structure") {
    Json j = minimal();
    j["presets"]["demo"]["post_selections"] = Json::array({42});
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["presets"]["demo"]["pre_selection"]["state"] = Json::object();
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    j = minimal();
    j["presets"]["demo"]["surprise"] = true;
    REQUIRE_THROWS_AS(parse_circuit_json(j), ConfigError);

    // Unnormalized pre-selection states are rejected when instantiated.
    j = minimal();
    j["presets"]["demo"]["pre_selection"]["state"]["a"] = Json::array({0.5, 0.0});
    const CircuitFile file = parse_circuit_json(j);
    REQUIRE_THROWS_AS(preset_pre_selection(file.circuit, file.presets.at("demo")), ConfigError);
}

TEST_CASE("file loading reports open and parse failures") {
    REQUIRE_THROWS_AS(load_json_file("/nonexistent/path.json"), ConfigError);

    const std::string path = "/tmp/tsvf_bad_json_test.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    try {
        load_json_file(path);
        FAIL("expected a parse diagnostic");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("malformed JSON") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("all element kinds round-trip through the parser") {
    const Json j = Json::parse(R"({
        "modes": ["a", "b"],
        "polarization": true,
        "ancilla": true,
        "stages": [
            [{"kind": "beam_splitter", "mode_a": "a", "mode_b": "b", "theta": 0.5, "phi": 0.25}],
            [{"kind": "mirror", "mode_from": "a", "mode_to": "b"}],
            [{"kind": "phase_shifter", "mode": "a", "phase": 1.25}],
            [{"kind": "polarization_rotator", "mode": "b", "angle": 0.75}],
            [{"kind": "ancilla_flip", "mode": "a"}],
            [{"kind": "detector", "mode": "a", "name": "D"}]
        ],
        "marked_points": {},
        "presets": {}
    })");
    const CircuitFile file = parse_circuit_json(j);
    REQUIRE(file.circuit.validate().empty());
    REQUIRE(file.circuit.stage_count() == 6);
    const auto& bs = std::get<BeamSplitter>(file.circuit.stages()[0][0]);
    REQUIRE(bs.theta == 0.5);
    REQUIRE(bs.phi == 0.25);
    REQUIRE(std::get<PolarizationRotator>(file.circuit.stages()[3][0]).angle == 0.75);
}
