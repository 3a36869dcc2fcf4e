#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace stokolmo {

/// Self-contained record of one CLI run. Re-running the command on `model`
/// with `seed` and `config` reproduces it byte for byte.
struct RunReport {
    std::string command;
    nlohmann::json model;
    nlohmann::json config;
    std::uint64_t seed = 0;
    nlohmann::json assumptions;
    nlohmann::json measures;
    nlohmann::json invasion_rates;
    nlohmann::json faces;
    nlohmann::json verdict;
    nlohmann::json verification;
    std::optional<nlohmann::json> timing;

    nlohmann::json to_json() const;
};

/// Canonical text: keys sorted, two-space indentation, floats as "%.12g".
/// Inside the top-level keys "model", "config" and "seed" floats fall back to
/// "%.17g" when "%.12g" would not reproduce the parsed value. Non-finite
/// values are written as null.
std::string canonical_json(const nlohmann::json& value);

/// Writes canonical_json(report) to `path` ("-" for stdout). Throws
/// std::runtime_error naming the path on I/O failure.
void write_report(const RunReport& report, const std::string& path);
void write_text(const std::string& text, const std::string& path);

}  // namespace stokolmo
