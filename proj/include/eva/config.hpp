#pragma once

#include "eva/dynamics.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eva {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Settings read from an INI file. Command-line flags override these.
///
///   [run]       plan, seed, logs, out
///   [dynamics]  any DynamicsParams field by name
struct RunConfig {
    DynamicsParams dynamics;
    std::optional<std::string> plan;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> logs;
    std::optional<std::string> out;
};

RunConfig load_run_config(const std::string &path);
RunConfig parse_run_config(std::string_view ini);

/// Names accepted in [dynamics] and by --dyn.<name> flags.
const std::vector<std::string> &dynamics_field_names();
/// Throws ConfigError for an unknown name.
void set_dynamics_field(DynamicsParams &params, std::string_view name, double value);
double get_dynamics_field(const DynamicsParams &params, std::string_view name);

/// Parses a full 64-bit unsigned seed (decimal or 0x-prefixed hex).
std::uint64_t parse_seed(std::string_view text);

} // namespace eva
