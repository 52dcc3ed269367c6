#pragma once

#include <algorithm>
#include <filesystem>

#include "tsvf/circuit_json.hpp"

namespace tsvf {

// A fully loaded preset: circuit, selections, and the frozen expected-value
// tables used by tests and the CLI's reference output.
struct Scenario {
    std::string id;
    Circuit circuit;
    Selection pre;
    std::vector<std::string> post_selections;
    std::string note;
    // outcome -> probability of that outcome for the uncoupled circuit
    std::map<std::string, double> ideal_probabilities;
    // post-selection -> point -> expected weak value of the point projector
    std::map<std::string, std::map<std::string, Complex>> weak_values;
    // post-selection -> point -> expected weak value of (point projector
    // composed with the right-circular polarization projector)
    std::map<std::string, std::map<std::string, Complex>> circular_weak_values;
};

// Resolution order for the data directory: explicit argument, TSVF_LAB_DATA
// environment variable, compiled-in source location, then ./data.
inline std::string default_data_dir() {
    if (const char* env = std::getenv("TSVF_LAB_DATA")) return env;
#ifdef TSVF_LAB_DATA_DIR
    return TSVF_LAB_DATA_DIR;
#else
    return "data";
#endif
}

inline std::vector<std::string> list_scenarios(const std::string& data_dir = default_data_dir()) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(data_dir) / "circuits";
    if (!fs::is_directory(dir))
        throw ConfigError("data directory '" + dir.string() + "' not found");
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

namespace detail {

inline std::map<std::string, std::map<std::string, Complex>> parse_value_table(
    const Json& j, const std::string& where) {
    std::map<std::string, std::map<std::string, Complex>> table;
    if (!j.is_object()) throw ConfigError(where + ": expected an object keyed by post-selection");
    for (const auto& [post, jpoints] : j.items()) {
        if (!jpoints.is_object())
            throw ConfigError(where + " '" + post + "': expected an object keyed by point");
        for (const auto& [point, jv] : jpoints.items())
            table[post][point] = complex_field(jv, where + " '" + post + "' point '" + point + "'");
    }
    return table;
}

} // namespace detail

inline Scenario load_scenario(const std::string& id,
                              const std::string& data_dir = default_data_dir()) {
    namespace fs = std::filesystem;
    const fs::path circuit_path = fs::path(data_dir) / "circuits" / (id + ".json");
    if (!fs::is_regular_file(circuit_path)) {
        std::string known;
        try {
            for (const auto& s : list_scenarios(data_dir)) known += (known.empty() ? "" : ", ") + s;
        } catch (const ConfigError&) {
        }
        throw ConfigError("unknown scenario '" + id + "'" +
                          (known.empty() ? "" : " (available: " + known + ")"));
    }
    CircuitFile file = load_circuit_file(circuit_path.string());
    auto it = file.presets.find(id);
    if (it == file.presets.end())
        throw ConfigError("'" + circuit_path.string() + "' has no preset named '" + id + "'");
    file.circuit.ensure_valid();

    Scenario sc{id,
                file.circuit,
                preset_pre_selection(file.circuit, it->second),
                it->second.post_selections,
                it->second.note,
                {},
                {},
                {}};

    for (const auto& post : sc.post_selections) {
        const Selection sel = parse_post_selection(post);
        if (!sc.circuit.has_detector(sel.detector))
            throw ConfigError("scenario '" + id + "': post-selection '" + post +
                              "' names no detector in the circuit");
    }

    const fs::path expected_path = fs::path(data_dir) / "expected_values.json";
    if (fs::is_regular_file(expected_path)) {
        const Json all = load_json_file(expected_path.string());
        if (all.contains(id)) {
            const Json& je = all.at(id);
            const std::string where = "expected values for '" + id + "'";
            detail::require_keys(je, {"ideal_probabilities", "weak_values", "circular_weak_values"},
                                 {"ideal_probabilities", "weak_values"}, where);
            for (const auto& [outcome, jp] : je.at("ideal_probabilities").items()) {
                if (!jp.is_number())
                    throw ConfigError(where + ": probabilities must be numbers");
                sc.ideal_probabilities[outcome] = jp.get<double>();
            }
            sc.weak_values = detail::parse_value_table(je.at("weak_values"), where);
            if (je.contains("circular_weak_values"))
                sc.circular_weak_values =
                    detail::parse_value_table(je.at("circular_weak_values"), where);
        }
    }
    return sc;
}

} // namespace tsvf
