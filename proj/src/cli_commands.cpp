/// @file cli_commands.cpp
/// @brief The five subcommands.

#include "hybrid/cli.hpp"

#include "hybrid/dataset.hpp"
#include "hybrid/hybrid.hpp"
#include "hybrid/spectral.hpp"
#include "hybrid/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>

namespace hybrid::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  return os;
}

// Run-specific, non-reproducible facts go next to the artifact, not into it.
void write_sidecar(const std::string& artifact, const std::string& command, Clock::time_point start) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const json meta = {{"command", command},
                     {"finished_utc", stamp},
                     {"wall_s", std::chrono::duration<double>(Clock::now() - start).count()}};
  std::ofstream os(artifact + ".meta.json", std::ios::trunc);
  if (os) os << meta.dump(2) << "\n";
}

NormKind parse_norm(const std::string& s) {
  if (s == "l2") return NormKind::L2;
  if (s == "linf") return NormKind::Linf;
  throw ConfigError("norm must be 'l2' or 'linf', got '" + s + "'");
}

PaddingMode parse_padding(const std::string& s) {
  if (s == "replicate") return PaddingMode::Replicate;
  if (s == "zero") return PaddingMode::Zero;
  throw ConfigError("padding must be 'replicate' or 'zero', got '" + s + "'");
}

double max_row_sum(const CsrMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) s += std::abs(a.values()[p]);
    m = std::max(m, s);
  }
  return m;
}

// omega = 0 selects 1/max row sum (h/4 for the 1-d k=1 operator) for
// Richardson, 2/3 for Jacobi and 1.5 for SOR.
SmootherKind make_smoother(const std::string& name, double omega, const CsrMatrix& a) {
  if (omega == 0.0) {
    if (name == "richardson")
      omega = 1.0 / max_row_sum(a);
    else if (name == "jacobi")
      omega = 2.0 / 3.0;
    else if (name == "sor")
      omega = 1.5;
    else
      omega = 1.0;
  }
  return parse_smoother(name, omega);
}

struct Problem {
  StructuredGrid grid;
  ScalarField k;
  ScalarField f;
  bool augmented = false;
  BoundaryField g;
  CsrMatrix a;
  Vector b;
};

Problem build_problem(const json& p) {
  Problem pr;
  const int dim = p["dim"].get<int>();
  const auto n = p["n"].get<std::size_t>();
  if (n < 1) throw ConfigError("problem.n must be >= 1");
  pr.grid = StructuredGrid(dim, n);
  pr.k = parse_field(p["k"].get<std::string>(), pr.grid, 0.05);
  pr.f = parse_field(p["f"].get<std::string>(), pr.grid);
  pr.augmented = parse_boundary(p["g"].get<std::string>(), pr.grid, pr.g);
  if (pr.augmented) {
    AugmentedSystem sys = assemble_augmented_2d(pr.grid, pr.k, pr.f, pr.g);
    pr.a = std::move(sys.a);
    pr.b = std::move(sys.b.values);
  } else {
    pr.a = assemble_stiffness(pr.grid, pr.k);
    pr.b = assemble_load(pr.grid, pr.f).values;
  }
  return pr;
}

std::shared_ptr<const Corrector> build_corrector(const json& c, const StructuredGrid& grid, const ScalarField& k,
                                                 const ScalarField& f, const BoundaryField* g) {
  const std::string type = c["type"].get<std::string>();
  std::shared_ptr<const Corrector> corr;
  if (type == "none") return nullptr;
  if (type == "oracle") {
    if (g != nullptr) throw ConfigError("oracle correctors act on homogeneous problems only (set problem.g=none)");
    const auto n0 = c.contains("n0") ? c["n0"].get<std::size_t>() : 0;
    corr = spectral_oracle_corrector(grid, n0, parse_oracle_mode(c["oracle_mode"].get<std::string>()));
  } else if (type == "mionet") {
    const std::string path = c["model"].get<std::string>();
    if (path.empty()) throw ConfigError("corrector.model must name a weights file");
    auto model = std::make_shared<const MionetModel>(load_weights(path));
    auto mc = std::make_shared<MionetCorrector>(model, grid, k, parse_padding(c["padding"].get<std::string>()),
                                                g != nullptr);
    mc->set_forcing_samples(forcing_samples(model->f_sensors(), f, g));
    corr = mc;
  } else {
    throw ConfigError("corrector.type must be none, oracle or mionet, got '" + type + "'");
  }
  const double scale = c["scale"].get<double>();
  if (scale != 1.0) corr = std::make_shared<ScaledCorrector>(corr, scale);
  return corr;
}

HybridConfig build_hybrid_config(const json& cfg, const Problem& pr) {
  HybridConfig hc;
  hc.M = cfg.contains("M") ? cfg["M"].get<std::size_t>() : 1;
  hc.stop.tol = cfg["tol"].get<double>();
  hc.stop.max_iter = cfg["max_iter"].get<std::size_t>();
  hc.stop.norm = parse_norm(cfg["norm"].get<std::string>());
  hc.use_initial_guess = cfg["corrector"]["initial_guess"].get<bool>();
  const json& m = cfg["method"];
  const std::string inner = m["inner"].get<std::string>();
  if (inner == "smoother") {
    hc.inner = make_smoother(m["smoother"].get<std::string>(), m["omega"].get<double>(), pr.a);
  } else if (inner == "multigrid") {
    if (pr.augmented) throw ConfigError("multigrid inner steps need a homogeneous problem");
    std::size_t levels = m["mg_levels"].get<std::size_t>();
    if (levels == 0) levels = max_levels(pr.grid);
    if (levels < 2) throw ConfigError("grid admits no multigrid hierarchy (n+1 must be even)");
    hc.inner = std::make_shared<const MgHierarchy>(build_hierarchy(
        pr.grid, pr.k, levels, m["pre_sweeps"].get<std::size_t>(), m["post_sweeps"].get<std::size_t>()));
  } else {
    throw ConfigError("method.inner must be 'smoother' or 'multigrid', got '" + inner + "'");
  }
  hc.validate();
  return hc;
}

Vector reference_solution(const Problem& pr) {
  if (pr.b.size() <= 4096) return cholesky_solve(cholesky(pr.a.to_dense()), pr.b);
  if (pr.augmented) throw ConfigError("reference solutions of augmented systems are limited to 4096 unknowns");
  const std::size_t levels = max_levels(pr.grid);
  if (levels < 2) throw ConfigError("reference solution: grid too large for a dense solve and has no hierarchy");
  StopRule stop;
  stop.tol = 1e-13 * norm_l2(pr.b);
  stop.max_iter = 500;
  return mg_solve(build_hierarchy(pr.grid, pr.k, levels), pr.b, Vector::Zero(pr.b.size()), stop).solution;
}

void report(std::ostream& out, const std::string& label, const IterationTrace& t) {
  out << label << ": status=" << to_string(t.status) << " iterations=" << t.iterations
      << " time_s=" << fmt("%.6f", t.total_time_ms / 1000.0)
      << " residual=" << fmt("%.3e", t.entries.back().residual_l2);
  if (t.corrector_time_ms > 0.0) out << " corrector_time_s=" << fmt("%.6f", t.corrector_time_ms / 1000.0);
  out << "\n";
}

std::vector<std::size_t> size_list(const json& j, const std::string& key) {
  std::vector<std::size_t> v;
  for (const auto& x : j) {
    if (!x.is_number_integer() || x.get<long long>() < 1) throw ConfigError(key + " entries must be positive integers");
    v.push_back(x.get<std::size_t>());
  }
  return v;
}

// Per-iteration rate of a hybrid trace: the last complete period when one
// exists, otherwise the trailing window.
double hybrid_rate(const IterationTrace& t, std::size_t M) {
  std::size_t corrections = 0;
  for (const auto& e : t.entries) corrections += e.kind == StepKind::Correct ? 1 : 0;
  if (corrections >= 2) return std::pow(period_contraction(t, 1), 1.0 / static_cast<double>(M));
  return empirical_rate(t, std::min(M, t.entries.size() - 1));
}

}  // namespace

int cmd_gen_data(const json& cfg, std::ostream& out) {
  const auto start = Clock::now();
  DatasetConfig dc;
  dc.dim = cfg["dim"].get<int>();
  dc.fine_n = cfg["fine_n"].get<std::size_t>();
  dc.count = cfg["count"].get<std::size_t>();
  dc.seed = cfg["seed"].get<std::uint64_t>();
  auto gp = [](const json& j) {
    return GpSpec::rbf(j["mean"].get<double>(), j["std"].get<double>(), j["length_scale"].get<double>());
  };
  dc.gp_k = gp(cfg["gp_k"]);
  dc.gp_f = gp(cfg["gp_f"]);
  const json& g = cfg["gp_g"];
  if (g["enabled"].get<bool>())
    dc.gp_g = GpSpec::exp_sine_squared(g["mean"].get<double>(), g["std"].get<double>(),
                                       g["length_scale"].get<double>(), g["period"].get<double>());
  dc.k_floor = cfg["k_floor"].get<double>();
  dc.solve_tol = cfg["solve_tol"].get<double>();
  dc.max_cycles = cfg["max_cycles"].get<std::size_t>();
  dc.skip_failures = cfg["skip_failures"].get<bool>();
  const auto m = cfg["sensors"].get<std::size_t>();
  if (m < 2) throw ConfigError("sensors must be >= 2 per axis");
  dc.sensors = sensor_lattice(dc.dim, m);
  const StructuredGrid qgrid(dc.dim, cfg["query_n"].get<std::size_t>());
  // 1-d queries are the interior nodes of the solver grid; 2-d queries cover
  // every node so that augmented systems can be predicted too.
  if (dc.dim == 1) {
    for (std::size_t i = 0; i < qgrid.interior_count(); ++i) dc.query_points.push_back(qgrid.interior_point(i));
  } else {
    for (std::size_t i = 0; i < qgrid.full_count(); ++i) dc.query_points.push_back(qgrid.full_point(i));
  }

  DatasetReport rep;
  const Dataset d = generate_dataset(dc, &rep);
  const std::string path = cfg["out"].get<std::string>();
  save_dataset(d, path);
  write_sidecar(path, "gen-data", start);
  out << "gen-data: wrote " << rep.generated << " records to " << path << " (dim " << dc.dim << ", fine grid n="
      << dc.fine_n << ", " << dc.sensors.size() << " sensors, " << dc.query_points.size() << " query points, seed "
      << dc.seed << ")\n";
  if (rep.skipped > 0) out << "gen-data: skipped " << rep.skipped << " records whose solve failed\n";
  if (rep.clamped_records > 0) out << "gen-data: clamped k in " << rep.clamped_records << " records\n";
  return kOk;
}

int cmd_train(const json& cfg, std::ostream& out) {
  const auto start = Clock::now();
  const Dataset data = load_dataset(cfg["data"].get<std::string>());
  if (data.size() == 0) throw ConfigError("dataset '" + cfg["data"].get<std::string>() + "' has no records");

  TrainOptions opt;
  opt.epochs = cfg["epochs"].get<std::size_t>();
  opt.batch_size = cfg["batch_size"].get<std::size_t>();
  opt.learning_rate = cfg["learning_rate"].get<double>();
  opt.lr_decay = cfg["lr_decay"].get<double>();
  opt.seed = cfg["seed"].get<std::uint64_t>();
  opt.validate();

  MionetModel model;
  AdamState adam;
  std::vector<double> history;
  const std::string resume = cfg["resume"].get<std::string>();
  if (!resume.empty()) {
    const Container c = read_container(resume);
    model = model_from_container(c, &adam);
    if (c.meta.contains("training") && c.meta["training"].contains("loss_history"))
      history = c.meta["training"]["loss_history"].get<std::vector<double>>();
    out << "train: resuming from " << resume << " at epoch " << adam.epoch << "\n";
  } else {
    const json& a = cfg["arch"];
    const std::size_t w = a["width"].get<std::size_t>() > 0 ? a["width"].get<std::size_t>() : (data.dim == 1 ? 100 : 500);
    auto hidden = [&](const json& j, const std::string& key) {
      std::vector<std::size_t> v = j.empty() ? std::vector<std::size_t>{w, w} : size_list(j, "arch." + key);
      return v;
    };
    MionetArchitecture arch;
    arch.dim = data.dim;
    arch.branch_k_dims = {data.k_sensors.size()};
    for (auto x : hidden(a["k_hidden"], "k_hidden")) arch.branch_k_dims.push_back(x);
    arch.branch_k_dims.push_back(w);
    arch.branch_f_dims = {data.f_sensors.size(), w};
    arch.trunk_dims = {static_cast<std::size_t>(data.dim)};
    for (auto x : hidden(a["trunk_hidden"], "trunk_hidden")) arch.trunk_dims.push_back(x);
    arch.trunk_dims.push_back(w);
    arch.activation = parse_activation(a["activation"].get<std::string>());
    arch.validate();
    model = MionetModel(arch, data.k_sensors, data.f_sensors);
    model.initialize(opt.seed);
  }
  check_compatible(model, data);

  const json& gc = cfg["grad_check"];
  if (gc["enabled"].get<bool>()) {
    const double err = grad_check(model, data, 0, gc["epsilon"].get<double>(), gc["params"].get<std::size_t>(), opt.seed);
    out << "train: gradient check max relative error " << fmt("%.3e", err) << "\n";
    if (!(err <= gc["threshold"].get<double>())) {
      out << "train: gradient check above threshold " << fmt("%.1e", gc["threshold"].get<double>())
          << ", aborting\n";
      return kInternal;
    }
  }

  const auto log_every = cfg["log_every"].get<std::size_t>();
  const std::size_t last_epoch = history.size() + opt.epochs;
  // The callback index counts from the first epoch ever trained.
  continue_training(model, adam, data, opt, history, [&](std::size_t e, double loss) {
    if (log_every > 0 && ((e + 1) % log_every == 0 || e + 1 == last_epoch))
      out << "epoch " << e + 1 << " loss " << fmt("%.6e", loss) << "\n";
    return true;
  });

  const std::string path = cfg["out"].get<std::string>();
  json meta = {{"train_options", opt.to_json()}, {"loss_history", history}, {"records", data.size()}};
  save_weights(model, path, &adam, meta);
  write_sidecar(path, "train", start);
  const std::string csv = cfg["loss_csv"].get<std::string>();
  if (!csv.empty()) {
    std::ofstream os = open_output(csv);
    os << "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i) os << i + 1 << ',' << fmt("%.17g", history[i]) << '\n';
  }
  out << "train: " << history.size() << " epochs, final loss " << fmt("%.6e", history.back())
      << ", relative L2 error " << fmt("%.4f", relative_l2_error(model, data)) << " (training set)\n";
  const std::string test = cfg["test_data"].get<std::string>();
  if (!test.empty())
    out << "train: relative L2 error " << fmt("%.4f", relative_l2_error(model, load_dataset(test)))
        << " (test set)\n";
  return std::isfinite(history.back()) ? kOk : kInternal;
}

int cmd_solve(const json& cfg, std::ostream& out) {
  const Problem pr = build_problem(cfg["problem"]);
  json corr_cfg = cfg["corrector"];
  const auto corr = build_corrector(corr_cfg, pr.grid, pr.k, pr.f, pr.augmented ? &pr.g : nullptr);
  const HybridConfig hc = build_hybrid_config(cfg, pr);
  std::optional<Vector> ref;
  if (cfg["reference"].get<bool>()) ref = reference_solution(pr);

  out << "problem: dim " << pr.grid.dim() << ", n " << pr.grid.n() << ", unknowns " << pr.b.size()
      << (pr.augmented ? ", augmented boundary rows" : "") << "\n";
  std::optional<IterationTrace> plain, hyb;
  if (!corr || cfg["compare_plain"].get<bool>()) {
    plain = hybrid_solve(pr.a, pr.b, nullptr, hc, ref);
    report(out, "plain", *plain);
  }
  if (corr) {
    hyb = hybrid_solve(pr.a, pr.b, corr.get(), hc, ref);
    report(out, "hybrid[" + corr->name() + ", M=" + std::to_string(hc.M) + "]", *hyb);
  }
  if (plain && hyb && hyb->status == SolveStatus::Converged && hyb->iterations > 0) {
    out << "iteration ratio (plain/hybrid): "
        << fmt("%.2f", static_cast<double>(plain->iterations) / static_cast<double>(hyb->iterations)) << "\n";
    if (hyb->total_time_ms > 0.0)
      out << "speedup (wall time): " << fmt("%.2f", plain->total_time_ms / hyb->total_time_ms) << "\n";
  }
  const IterationTrace& primary = hyb ? *hyb : *plain;
  if (pr.augmented) {
    double worst = 0.0;
    for (std::size_t idx = 0; idx < pr.grid.full_count(); ++idx) {
      if (!pr.grid.is_boundary(idx)) continue;
      const auto i = static_cast<Eigen::Index>(idx);
      worst = std::max(worst, std::abs(primary.solution[i] - pr.b[i]));
    }
    out << "boundary rows: max |mu - g| = " << fmt("%.3e", worst) << "\n";
  }
  const std::string trace = cfg["trace_csv"].get<std::string>();
  if (!trace.empty()) {
    std::ofstream os = open_output(trace);
    write_trace_csv(primary, os);
  }
  out << "status: " << to_string(primary.status) << "\n";
  return primary.status == SolveStatus::Converged ? kOk : kNotConverged;
}

int cmd_sweep_m(const json& cfg, std::ostream& out) {
  const Problem pr = build_problem(cfg["problem"]);
  const auto corr = build_corrector(cfg["corrector"], pr.grid, pr.k, pr.f, pr.augmented ? &pr.g : nullptr);
  if (!corr) throw ConfigError("sweep-m needs a corrector (corrector.type oracle or mionet)");
  const HybridConfig hc = build_hybrid_config(cfg, pr);
  const auto Ms = size_list(cfg["M_values"], "M_values");
  const SweepResult s = sweep_M(pr.a, pr.b, *corr, Ms, hc, cfg["compare_plain"].get<bool>());

  const std::string path = cfg["out_csv"].get<std::string>();
  if (path.empty()) {
    write_sweep_csv(s, out);
    return kOk;
  }
  std::ofstream os = open_output(path);
  write_sweep_csv(s, os);
  const SweepRow* by_iter = nullptr;
  const SweepRow* by_time = nullptr;
  std::size_t diverged = 0;
  for (const SweepRow& r : s.rows) {
    if (r.status != SolveStatus::Converged) {
      diverged += r.status == SolveStatus::Diverged ? 1 : 0;
      continue;
    }
    if (!by_iter || r.iterations < by_iter->iterations) by_iter = &r;
    if (!by_time || r.time_s < by_time->time_s) by_time = &r;
  }
  out << "sweep-m: " << s.rows.size() << " runs written to " << path << ", " << diverged << " diverged\n";
  if (by_iter)
    out << "sweep-m: fewest iterations at M=" << by_iter->M << " (" << by_iter->iterations
        << "), shortest time at M=" << by_time->M << " (" << fmt("%.6f", by_time->time_s) << " s)\n";
  return kOk;
}

int cmd_analyze(const json& cfg, std::ostream& out) {
  const std::filesystem::path dir = cfg["out_dir"].get<std::string>();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
  const auto n = cfg["n"].get<std::size_t>();
  const auto n0 = cfg["n0"].get<std::size_t>();
  if (n < 1 || n0 < 1 || n0 > n) throw ConfigError("analyze needs 1 <= n0 <= n");
  const StructuredGrid grid(1, n);
  const ScalarField one = [](const Point&) { return 1.0; };
  const CsrMatrix a = assemble_stiffness_1d(grid, one);
  const ScalarField f = parse_field(cfg["f"].get<std::string>(), grid);
  const Vector b = assemble_load(grid, f).values;

  json cc = cfg["corrector"];
  cc["n0"] = n0;
  const ScalarField k = parse_field(cc["k"].get<std::string>(), grid, 0.05);
  const auto corr = build_corrector(cc, grid, k, f, nullptr);
  if (!corr) throw ConfigError("analyze needs a corrector (oracle or mionet)");

  // Model error spectrum and the rate parameters it implies.
  const ModelErrorSpectrum spec = model_error_spectrum(*corr, grid, n0);
  {
    std::ofstream os = open_output((dir / "model_error.csv").string());
    os << "mode,error_l2\n";
    for (Eigen::Index i = 0; i < spec.norms.size(); ++i) os << i + 1 << ',' << fmt("%.10e", spec.norms[i]) << '\n';
  }
  out << "model error: eps (modes <= " << n0 << ") = " << fmt("%.4e", spec.eps) << ", R = " << fmt("%.4e", spec.R)
      << (spec.eps < spec.R / 10.0 ? ", eps < R/10" : ", eps >= R/10") << "\n";
  const RateParams measured = rate_params_1d(grid, n0, spec);

  const json& rc = cfg["rate"];
  RateParams p;
  const std::string source = rc["source"].get<std::string>();
  if (source == "params") {
    p = {rc["eta1"].get<double>(), rc["eta2"].get<double>(), rc["eps"].get<double>(), rc["R"].get<double>()};
  } else if (source == "measured") {
    p = measured;
  } else {
    throw ConfigError("rate.source must be 'params' or 'measured'");
  }
  p.validate();
  const auto M_max = rc["M_max"].get<std::size_t>();
  {
    std::ofstream os = open_output((dir / "rate_curve.csv").string());
    write_rate_csv(p, M_max, os);
  }
  const std::size_t Mstar = argmin_rate(p, M_max);
  out << "rate bound (eta1=" << p.eta1 << ", eta2=" << p.eta2 << ", eps=" << p.eps << ", R=" << p.R
      << "): argmin M*=" << Mstar << ", Rate(M*)=" << fmt("%.4f", rate_bound(Mstar, p));
  if (M_max >= 20) out << ", Rate(20)=" << fmt("%.4f", rate_bound(20, p));
  out << "\n";

  const double omega = grid.h() / 4.0;
  const json& hm = cfg["heatmap"];
  if (hm["enabled"].get<bool>()) {
    const Vector ref = cholesky_solve(cholesky(a.to_dense()), b);
    HybridConfig hc;
    hc.inner = SmootherKind::richardson(omega);
    hc.M = hm["M"].get<std::size_t>();
    hc.use_initial_guess = false;
    hc.keep_error_vectors = true;
    hc.stop.tol = 1e-300;
    hc.stop.max_iter = hm["steps"].get<std::size_t>();
    const std::string method = hm["method"].get<std::string>();
    if (method != "plain" && method != "hybrid") throw ConfigError("heatmap.method must be 'plain' or 'hybrid'");
    const IterationTrace t = hybrid_solve(a, b, method == "hybrid" ? corr.get() : nullptr, hc, ref);
    const SpectralHeatmap map = spectral_heatmap(t, n);
    std::ofstream os = open_output((dir / "heatmap.csv").string());
    write_heatmap_csv(map, os);
    if (method == "plain" && map.values.cols() > 1) {
      const auto last = map.values.cols() - 1;
      const double slope = (map.values(0, last) - map.values(0, 0)) / static_cast<double>(last);
      const double c = std::cos(kPi * grid.h() / 2.0);
      out << "heatmap: row-1 half-life " << fmt("%.2f", std::log10(2.0) / -slope) << " iterations (predicted "
          << fmt("%.2f", std::log(2.0) / -std::log(c * c)) << ")\n";
    }
  }

  {
    std::ofstream os = open_output((dir / "empirical_rate.csv").string());
    os << "M,status,iterations,empirical_rate,rate_bound\n";
    for (std::size_t M : size_list(cfg["empirical_M"], "empirical_M")) {
      HybridConfig hc;
      hc.inner = SmootherKind::richardson(omega);
      hc.M = M;
      hc.stop.tol = cfg["tol"].get<double>();
      hc.stop.max_iter = cfg["max_iter"].get<std::size_t>();
      const IterationTrace t = hybrid_solve(a, b, corr.get(), hc);
      const double rate = t.entries.size() > 1 ? hybrid_rate(t, M) : 0.0;
      os << M << ',' << to_string(t.status) << ',' << t.iterations << ',' << fmt("%.8f", rate) << ','
         << fmt("%.8f", rate_bound(M, measured)) << '\n';
    }
  }

  {
    std::ofstream os = open_output((dir / "smoothing.csv").string());
    os << "rho,smoothing_factor\n";
    const auto res = cfg["smoothing"]["resolution"].get<std::size_t>();
    for (const auto& r : cfg["smoothing"]["rho"]) {
      if (!r.is_number()) throw ConfigError("smoothing.rho entries must be numbers");
      const double rho = r.get<double>();
      const double z = smoothing_factor(rho, res);
      os << fmt("%.6f", rho) << ',' << fmt("%.10f", z) << '\n';
      if (rho == 0.5)
        out << "zeta_1/2 = " << fmt("%.4f", z) << "\n";
      else
        out << "zeta_rho (rho=" << rho << ") = " << fmt("%.4f", z) << "\n";
    }
  }
  const StructuredGrid g2(2, cfg["zeta0_n"].get<std::size_t>());
  out << "zeta0 (estimate: observed GS contraction of the lowest mode, n=" << g2.n()
      << ") = " << fmt("%.6f", estimate_zeta0(g2)) << "\n";
  out << "analyze: wrote model_error.csv, rate_curve.csv, "
      << (hm["enabled"].get<bool>() ? "heatmap.csv, " : "") << "empirical_rate.csv, smoothing.csv to "
      << dir.string() << "\n";
  return kOk;
}

}  // namespace hybrid::cli
