#ifndef NULLCTL_CLI_HPP
#define NULLCTL_CLI_HPP

#include "nullctl/report.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nullctl::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit statuses of `nullctl`.
enum ExitCode : int { kSuccess = 0, kValidation = 2, kFailure = 3 };

struct Invocation {
  std::string command;
  std::string config_path;             // empty: defaults only
  std::vector<std::string> overrides;  // key=value, value parsed as JSON when possible
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

struct KeyInfo {
  std::string name;
  nlohmann::ordered_json default_value;
  std::string description;
};

const std::vector<std::string>& commands();

/// The documented flat key set with defaults, in a fixed order.
const std::vector<KeyInfo>& config_keys();

/// Defaults, then the file, then --set overrides, then --seed. Unknown keys and
/// ill-typed values raise ValidationError.
nlohmann::ordered_json resolve_config(const Invocation& inv);

/// Runs one command on a resolved config. Throws ValidationError,
/// ConvergenceError, BlowupError or UnachievableError.
ReportBundle execute(const std::string& command, const nlohmann::ordered_json& config);

/// --output, then NULLCTL_OUTPUT_DIR, then the output_dir key.
std::string output_directory(const Invocation& inv, const nlohmann::ordered_json& config);

/// Full run with error mapping to exit codes. Validation failures write nothing;
/// solver failures write `<command>_diagnostics.csv` and the manifest.
int run(const Invocation& inv, std::ostream& err);

}  // namespace nullctl::cli

#endif  // NULLCTL_CLI_HPP
