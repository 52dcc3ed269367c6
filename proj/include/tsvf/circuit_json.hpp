#pragma once

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tsvf/circuit.hpp"

namespace tsvf {

using Json = nlohmann::json;

// One named pre/post-selection recipe stored alongside a circuit.
struct PresetSpec {
    std::string id;
    std::map<std::string, Complex> pre_amplitudes; // basis label -> amplitude
    std::vector<std::string> post_selections;      // e.g. "D2", "D2|H"
    std::string note;
};

struct CircuitFile {
    Circuit circuit;
    std::map<std::string, PresetSpec> presets;
};

namespace detail {

inline void require_keys(const Json& j, const std::set<std::string>& allowed,
                         const std::set<std::string>& required, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
    for (const auto& key : required)
        if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
}

inline std::string str_field(const Json& j, const std::string& key, const std::string& where) {
    if (!j.at(key).is_string()) throw ConfigError(where + ": field '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

inline double num_field(const Json& j, const std::string& key, const std::string& where,
                        double fallback, bool optional) {
    if (!j.contains(key)) {
        if (optional) return fallback;
        throw ConfigError(where + ": missing field '" + key + "'");
    }
    if (!j.at(key).is_number()) throw ConfigError(where + ": field '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline Complex complex_field(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(where + ": complex values are [re, im] number pairs");
    return Complex{j[0].get<double>(), j[1].get<double>()};
}

inline Element parse_element(const Json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError(where + ": element needs a 'kind' field");
    const std::string kind = str_field(j, "kind", where);
    if (kind == "beam_splitter") {
        require_keys(j, {"kind", "mode_a", "mode_b", "theta", "phi"}, {"mode_a", "mode_b"}, where);
        BeamSplitter bs;
        bs.mode_a = str_field(j, "mode_a", where);
        bs.mode_b = str_field(j, "mode_b", where);
        bs.theta = num_field(j, "theta", where, bs.theta, true);
        bs.phi = num_field(j, "phi", where, bs.phi, true);
        return bs;
    }
    if (kind == "mirror") {
        require_keys(j, {"kind", "mode_from", "mode_to"}, {"mode_from", "mode_to"}, where);
        return Mirror{str_field(j, "mode_from", where), str_field(j, "mode_to", where)};
    }
    if (kind == "phase_shifter") {
        require_keys(j, {"kind", "mode", "phase"}, {"mode", "phase"}, where);
        return PhaseShifter{str_field(j, "mode", where), num_field(j, "phase", where, 0.0, false)};
    }
    if (kind == "polarization_rotator") {
        require_keys(j, {"kind", "mode", "angle"}, {"mode", "angle"}, where);
        return PolarizationRotator{str_field(j, "mode", where),
                                   num_field(j, "angle", where, 0.0, false)};
    }
    if (kind == "ancilla_flip") {
        require_keys(j, {"kind", "mode"}, {"mode"}, where);
        return AncillaFlip{str_field(j, "mode", where)};
    }
    if (kind == "detector") {
        require_keys(j, {"kind", "mode", "name"}, {"mode", "name"}, where);
        return Detector{str_field(j, "mode", where), str_field(j, "name", where)};
    }
    throw ConfigError(where + ": unknown element kind '" + kind +
                      "' (expected beam_splitter, mirror, phase_shifter, polarization_rotator, "
                      "ancilla_flip, or detector)");
}

} // namespace detail

inline CircuitFile parse_circuit_json(const Json& j, const std::string& where = "circuit file") {
    detail::require_keys(j, {"modes", "polarization", "ancilla", "stages", "marked_points", "presets"},
                         {"modes", "stages", "marked_points", "presets"}, where);

    if (!j.at("modes").is_array()) throw ConfigError(where + ": 'modes' must be an array");
    std::vector<std::string> modes;
    for (const auto& m : j.at("modes")) {
        if (!m.is_string()) throw ConfigError(where + ": mode names must be strings");
        modes.push_back(m.get<std::string>());
    }
    auto bool_field = [&](const char* key) {
        if (!j.contains(key)) return false;
        if (!j.at(key).is_boolean())
            throw ConfigError(where + ": field '" + std::string(key) + "' must be a boolean");
        return j.at(key).get<bool>();
    };
    const bool has_pol = bool_field("polarization");
    const bool has_anc = bool_field("ancilla");

    if (!j.at("stages").is_array()) throw ConfigError(where + ": 'stages' must be an array");
    std::vector<std::vector<Element>> stages;
    for (std::size_t s = 0; s < j.at("stages").size(); ++s) {
        const Json& js = j.at("stages")[s];
        if (!js.is_array())
            throw ConfigError(where + ": stage " + std::to_string(s) + " must be an array");
        std::vector<Element> stage;
        for (std::size_t e = 0; e < js.size(); ++e)
            stage.push_back(detail::parse_element(
                js[e], where + ": stage " + std::to_string(s) + " element " + std::to_string(e)));
        stages.push_back(std::move(stage));
    }

    if (!j.at("marked_points").is_object())
        throw ConfigError(where + ": 'marked_points' must be an object");
    std::map<std::string, MarkedPoint> points;
    for (const auto& [name, jp] : j.at("marked_points").items()) {
        const std::string pw = where + ": marked point '" + name + "'";
        detail::require_keys(jp, {"boundary", "mode"}, {"boundary", "mode"}, pw);
        if (!jp.at("boundary").is_number_unsigned())
            throw ConfigError(pw + ": 'boundary' must be a nonnegative integer");
        points[name] = MarkedPoint{jp.at("boundary").get<std::size_t>(),
                                   detail::str_field(jp, "mode", pw)};
    }

    CircuitFile file{Circuit(std::move(modes), has_pol, has_anc, std::move(stages), std::move(points)),
                     {}};

    if (!j.at("presets").is_object()) throw ConfigError(where + ": 'presets' must be an object");
    for (const auto& [id, jp] : j.at("presets").items()) {
        const std::string pw = where + ": preset '" + id + "'";
        detail::require_keys(jp, {"pre_selection", "post_selections", "note"},
                             {"pre_selection", "post_selections"}, pw);
        PresetSpec spec;
        spec.id = id;
        const Json& jpre = jp.at("pre_selection");
        detail::require_keys(jpre, {"state"}, {"state"}, pw + " pre_selection");
        if (!jpre.at("state").is_object())
            throw ConfigError(pw + ": pre_selection 'state' must map labels to [re, im]");
        for (const auto& [label, amp] : jpre.at("state").items())
            spec.pre_amplitudes[label] =
                detail::complex_field(amp, pw + " pre_selection amplitude '" + label + "'");
        if (spec.pre_amplitudes.empty()) throw ConfigError(pw + ": empty pre-selection state");
        if (!jp.at("post_selections").is_array())
            throw ConfigError(pw + ": 'post_selections' must be an array");
        for (const auto& p : jp.at("post_selections")) {
            if (!p.is_string()) throw ConfigError(pw + ": post-selections must be strings");
            spec.post_selections.push_back(p.get<std::string>());
        }
        if (jp.contains("note")) spec.note = detail::str_field(jp, "note", pw);
        file.presets[id] = std::move(spec);
    }
    return file;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
    return j;
}

inline CircuitFile load_circuit_file(const std::string& path) {
    return parse_circuit_json(load_json_file(path), path);
}

// Builds the pre-selection state of a preset on the circuit's space.
inline Selection preset_pre_selection(const Circuit& circuit, const PresetSpec& spec) {
    PureState state = PureState::from_amplitudes(circuit.space(), spec.pre_amplitudes);
    if (std::abs(state.norm() - 1.0) > 1e-9)
        throw ConfigError("preset '" + spec.id + "': pre-selection state is not normalized");
    return Selection::input(std::move(state));
}

} // namespace tsvf
