/// @file cli.hpp
/// @brief Command-line front-end: configuration handling and the gen-data,
/// train, solve, sweep-m and analyze commands.

#pragma once

#include "hybrid/fem.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybrid::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNotConverged = 2, kInternal = 3 };

/// Invalid or unknown configuration entries.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Default configuration of a command; some defaults depend on the problem
/// dimension.
nlohmann::json default_config(const std::string& command, int dim = 1);

/// Merges `user` into `base`. Every key of `user` must exist in `base` with
/// a compatible type; `where` prefixes error messages.
void merge_config(nlohmann::json& base, const nlohmann::json& user, const std::string& where = "");

/// Applies "a.b.c=value" to a JSON object, creating intermediate objects.
/// The value is parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& cfg, const std::string& assignment);

/// Effective configuration: defaults, then the file (if any), then the
/// overrides, validated against the defaults.
nlohmann::json resolve_config(const std::string& command, const std::string& config_path,
                              const std::vector<std::string>& overrides);

/// Field specification strings:
///   "const:V", "sine[:A]" (A sin(pi x) [sin(pi y)]),
///   "gp:mean=..,std=..,ls=..,seed=.." (RBF sample on the grid nodes, P1 in
///   between). With `positive_floor` > 0, GP samples are raised to it.
ScalarField parse_field(const std::string& spec, const StructuredGrid& grid, double positive_floor = 0.0);

/// Boundary specification strings for 2-d problems:
///   "none" (homogeneous), "const:V",
///   "gp:mean=..,std=..,ls=..,period=..,seed=.." (ExpSineSquared in t).
/// Returns false for "none".
bool parse_boundary(const std::string& spec, const StructuredGrid& grid, BoundaryField& out);

int cmd_gen_data(const nlohmann::json& cfg, std::ostream& out);
int cmd_train(const nlohmann::json& cfg, std::ostream& out);
int cmd_solve(const nlohmann::json& cfg, std::ostream& out);
int cmd_sweep_m(const nlohmann::json& cfg, std::ostream& out);
int cmd_analyze(const nlohmann::json& cfg, std::ostream& out);

/// Parses arguments, runs the command and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hybrid::cli
