/// @file cli_config.cpp
/// @brief Configuration defaults, merging, field specs and argument parsing.

#include "hybrid/cli.hpp"

#include "hybrid/container.hpp"
#include "hybrid/gp_field.hpp"
#include "hybrid/linalg.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace hybrid::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

const char* const kCommands[] = {"gen-data", "train", "solve", "sweep-m", "analyze"};

json solve_defaults(int dim) {
  return {
      {"problem",
       {{"dim", dim}, {"n", dim == 1 ? 48 : 63}, {"k", "const:1"}, {"f", dim == 1 ? "const:0.01" : "const:1"},
        {"g", "none"}}},
      {"method",
       {{"inner", "smoother"}, {"smoother", dim == 1 ? "richardson" : "gs"}, {"omega", 0.0},
        {"mg_levels", 0}, {"pre_sweeps", 2}, {"post_sweeps", 2}}},
      {"corrector",
       {{"type", "oracle"}, {"oracle_mode", "discrete"}, {"n0", 10}, {"model", ""}, {"scale", 1.0},
        {"padding", "replicate"}, {"initial_guess", true}}},
      {"M", 20},
      {"tol", dim == 1 ? 1e-14 : 1e-12},
      {"max_iter", 100000},
      {"norm", "l2"},
      {"compare_plain", true},
      {"reference", false},
      {"trace_csv", ""},
  };
}

// Splits "a=1,b=2" into a key map; every key must be listed in `allowed`.
std::map<std::string, double> parse_params(const std::string& text, const std::vector<std::string>& allowed,
                                           const std::string& spec) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("field spec '" + spec + "': expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("field spec '" + spec + "': unknown parameter '" + key + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing characters");
      out[key] = v;
    } catch (const std::exception&) {
      throw ConfigError("field spec '" + spec + "': bad number for '" + key + "'");
    }
  }
  return out;
}

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double parse_number(const std::string& text, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("field spec '" + spec + "': bad number '" + text + "'");
}

std::string type_name(const json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number_unsigned() || j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

}  // namespace

json default_config(const std::string& command, int dim) {
  if (dim != 1 && dim != 2) throw ConfigError("dim must be 1 or 2");
  const double ls = dim == 1 ? 0.1 : 0.2;
  if (command == "gen-data") {
    return {
        {"out", "dataset.bin"},
        {"dim", dim},
        {"count", 1000},
        {"seed", 0},
        {"fine_n", dim == 1 ? 255 : 511},
        {"sensors", dim == 1 ? 50 : 100},
        {"query_n", dim == 1 ? 48 : 63},
        {"gp_k", {{"mean", 1.0}, {"std", 0.2}, {"length_scale", ls}}},
        {"gp_f", {{"mean", 0.0}, {"std", 1.0}, {"length_scale", ls}}},
        {"gp_g", {{"enabled", false}, {"mean", 0.0}, {"std", 0.05}, {"length_scale", 1.0}, {"period", 4.0}}},
        {"k_floor", 0.05},
        {"solve_tol", 1e-10},
        {"max_cycles", 200},
        {"skip_failures", false},
    };
  }
  if (command == "train") {
    return {
        {"data", "dataset.bin"},
        {"out", "model.bin"},
        {"loss_csv", "loss.csv"},
        {"resume", ""},
        {"test_data", ""},
        {"epochs", 100},
        {"batch_size", 64},
        {"learning_rate", 1e-3},
        {"lr_decay", 1.0},
        {"seed", 0},
        {"log_every", 10},
        {"arch",
         {{"k_hidden", json::array()}, {"trunk_hidden", json::array()}, {"width", 0}, {"activation", "tanh"}}},
        {"grad_check", {{"enabled", true}, {"epsilon", 1e-6}, {"params", 100}, {"threshold", 1e-4}}},
    };
  }
  if (command == "solve") return solve_defaults(dim);
  if (command == "sweep-m") {
    json j = solve_defaults(dim);
    j.erase("M");
    j.erase("trace_csv");
    j.erase("reference");
    j["M_values"] = {2, 5, 10, 20, 40, 80, 160};
    j["out_csv"] = "";
    return j;
  }
  if (command == "analyze") {
    return {
        {"out_dir", "analysis"},
        {"n", 48},
        {"f", "const:1"},
        {"n0", 10},
        {"corrector",
         {{"type", "oracle"}, {"oracle_mode", "discrete"}, {"model", ""}, {"scale", 1.0}, {"k", "const:1"},
          {"padding", "replicate"}}},
        {"rate",
         {{"source", "params"}, {"eta1", 0.999}, {"eta2", 0.5}, {"eps", 0.1}, {"R", 10.0}, {"M_max", 200}}},
        {"heatmap", {{"enabled", true}, {"method", "plain"}, {"M", 20}, {"steps", 200}}},
        {"empirical_M", {5, 10, 20, 40}},
        {"tol", 1e-14},
        {"max_iter", 100000},
        {"smoothing", {{"rho", {0.5, 0.25}}, {"resolution", 512}}},
        {"zeta0_n", 31},
    };
  }
  throw ConfigError("unknown command '" + command + "'");
}

void merge_config(json& base, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError("config" + (where.empty() ? "" : " '" + where + "'") + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    json& slot = base[key];
    if (slot.is_object()) {
      merge_config(slot, value, path);
      continue;
    }
    const bool ok = (slot.is_boolean() && value.is_boolean()) ||
                    (slot.is_string() && value.is_string()) || (slot.is_array() && value.is_array()) ||
                    (slot.is_number_integer() && value.is_number_integer()) ||
                    (slot.is_number_float() && value.is_number());
    if (!ok)
      throw ConfigError("config key '" + path + "' expects " + type_name(slot) + ", got " + type_name(value));
    if (slot.is_number_integer() && value.is_number_integer() && value.get<long long>() < 0)
      throw ConfigError("config key '" + path + "' must be non-negative");
    slot = slot.is_number_float() ? json(value.get<double>()) : value;
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &cfg;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("override key '" + key + "': '" + parts[i] + "' is not a section");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

json resolve_config(const std::string& command, const std::string& config_path,
                    const std::vector<std::string>& overrides) {
  json user = json::object();
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw ConfigError("cannot open config file '" + config_path + "'");
    user = json::parse(is, nullptr, false);
    if (user.is_discarded()) throw ConfigError("config file '" + config_path + "' is not valid JSON");
    if (!user.is_object()) throw ConfigError("config file '" + config_path + "' must hold a JSON object");
  }
  for (const auto& o : overrides) apply_override(user, o);

  int dim = 1;
  const json* d = nullptr;
  if (user.contains("problem") && user["problem"].is_object() && user["problem"].contains("dim"))
    d = &user["problem"]["dim"];
  else if (user.contains("dim"))
    d = &user["dim"];
  if (d != nullptr) {
    if (!d->is_number_integer()) throw ConfigError("dim must be an integer");
    dim = d->get<int>();
  }
  json cfg = default_config(command, dim);
  merge_config(cfg, user);
  return cfg;
}

ScalarField parse_field(const std::string& spec, const StructuredGrid& grid, double positive_floor) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "const") {
    const double v = parse_number(rest, spec);
    return [v](const Point&) { return v; };
  }
  if (kind == "sine") {
    const double a = rest.empty() ? 1.0 : parse_number(rest, spec);
    if (grid.dim() == 1) return [a](const Point& p) { return a * std::sin(kPi * p[0]); };
    return [a](const Point& p) { return a * std::sin(kPi * p[0]) * std::sin(kPi * p[1]); };
  }
  if (kind == "gp") {
    const auto p = parse_params(rest, {"mean", "std", "ls", "seed"}, spec);
    GpSpec g = GpSpec::rbf(param(p, "mean", 0.0), param(p, "std", 1.0), param(p, "ls", 0.1));
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("field spec '" + spec + "': " + e.what());
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(param(p, "seed", 0.0)));
    Vector v = LatticeGpSampler(g, grid).sample(rng);
    if (positive_floor > 0.0) v = positivity_guard(v, positive_floor).values;
    auto fn = std::make_shared<const PiecewiseLinearFn>(grid, std::move(v));
    return [fn](const Point& q) { return (*fn)(q); };
  }
  throw ConfigError("unknown field spec '" + spec + "' (use const:V, sine[:A] or gp:...)");
}

bool parse_boundary(const std::string& spec, const StructuredGrid& grid, BoundaryField& out) {
  if (spec == "none") return false;
  if (grid.dim() != 2) throw ConfigError("boundary data g needs a 2-d problem");
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "const") {
    const double v = parse_number(rest, spec);
    out = [v](double) { return v; };
    return true;
  }
  if (kind == "gp") {
    const auto p = parse_params(rest, {"mean", "std", "ls", "period", "seed"}, spec);
    GpSpec g = GpSpec::exp_sine_squared(param(p, "mean", 0.0), param(p, "std", 0.05), param(p, "ls", 1.0),
                                        param(p, "period", 4.0));
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("boundary spec '" + spec + "': " + e.what());
    }
    std::vector<double> t;
    std::vector<Point> pts;
    for (std::size_t idx = 0; idx < grid.full_count(); ++idx) {
      if (!grid.is_boundary(idx)) continue;
      t.push_back(boundary_parameter(grid.full_point(idx)));
      pts.push_back({t.back(), 0.0});
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(param(p, "seed", 0.0)));
    const Vector v = GpSampler(g, pts).sample(rng);
    out = periodic_boundary_interpolant(t, std::vector<double>(v.data(), v.data() + v.size()));
    return true;
  }
  throw ConfigError("unknown boundary spec '" + spec + "' (use none, const:V or gp:...)");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid iterative solvers for Poisson problems with operator-network correctors"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for all subcommands");

  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  for (const char* name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("--set", overrides, "Override a config key: key.path=value")->take_all();
    sub->add_flag("--print-config", print_config, "Print the effective config and exit");
  }
  app.get_subcommand("gen-data")->description("Generate a dataset of GP-sampled problems and FEM solutions");
  app.get_subcommand("train")->description("Train an operator network on a dataset");
  app.get_subcommand("solve")->description("Run a plain or hybrid solve and print the outcome");
  app.get_subcommand("sweep-m")->description("Run the hybrid solve for a list of correction periods");
  app.get_subcommand("analyze")->description("Write spectral diagnostics and rate-bound curves");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const json cfg = resolve_config(command, config_path, overrides);
    if (print_config) {
      out << cfg.dump(2) << "\n";
      return kOk;
    }
    if (command == "gen-data") return cmd_gen_data(cfg, out);
    if (command == "train") return cmd_train(cfg, out);
    if (command == "solve") return cmd_solve(cfg, out);
    if (command == "sweep-m") return cmd_sweep_m(cfg, out);
    return cmd_analyze(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "incompatible input: " << e.what() << "\n";
    return kUsage;
  } catch (const ContainerError& e) {
    err << "bad file: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid setting: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace hybrid::cli
