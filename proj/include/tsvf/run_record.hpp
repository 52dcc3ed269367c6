#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>

#include <json.hpp>

#include "tsvf/version.hpp"

namespace tsvf {

inline std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Everything needed to reproduce one CLI invocation: the command, the fully
// resolved configuration, tool version, seed (when stochastic), and where the
// outputs went. Serialized with every result.
struct RunRecord {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::optional<std::uint64_t> seed;
    std::string rng; // generator name, set when seed is set
    nlohmann::json outputs = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json j{{"tool", kToolName},
                         {"tool_version", kToolVersion},
                         {"command", command},
                         {"config", config},
                         {"timestamp", iso8601_utc_now()},
                         {"outputs", outputs}};
        if (seed) {
            j["seed"] = *seed;
            j["rng"] = rng;
        }
        return j;
    }
};

} // namespace tsvf
