#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "peum/family.hpp"
#include "peum/observable.hpp"

namespace peum::cli {

inline constexpr const char* kVersion = "0.3.1";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeFailure = 1;
inline constexpr int kConfigError = 2;

using json = nlohmann::json;

// Throw ConfigError on schema violations.
PeumFamily parse_family(const json& j);
Observable parse_observable(const json& j);

std::string config_hash(const json& resolved);

struct RunOptions {
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    int threads = 0;          // 0 keeps the OpenMP default
    bool timestamp = false;   // wall times and a timestamp line in outputs
};

// Fills command defaults into the config; the result is what gets written as resolved_config.json.
json resolve_config(const std::string& command, const json& config, const RunOptions& opt);

// Runs one command and writes its artifacts into opt.out. Returns the exit code;
// on failure an error JSON is written to opt.out/error.json and echoed to stderr.
int run_command(const std::string& command, const json& config, const RunOptions& opt);

// Loads the config file and runs; parse errors map to exit code 2.
int run_from_file(const std::string& command, const std::filesystem::path& config_path, const RunOptions& opt);

std::string error_json(const std::string& kind, const std::string& message, int exit_code);

}  // namespace peum::cli
