/// @file dataset.cpp
/// @brief Dataset generation by multigrid FEM solves of GP-sampled problems.

#include "hybrid/dataset.hpp"

#include "hybrid/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybrid {

namespace {

constexpr double kEdgeTol = 1e-12;

std::size_t per_axis(int dim, std::size_t count) {
  if (dim == 1) return count;
  const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
  return m;
}

Vector values_at(const PiecewiseLinearFn& u, const std::vector<Point>& pts) {
  Vector out(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) out[static_cast<Eigen::Index>(i)] = u(pts[i]);
  return out;
}

}  // namespace

bool on_boundary(int dim, const Point& p) {
  auto edge = [](double c) { return std::abs(c) <= kEdgeTol || std::abs(c - 1.0) <= kEdgeTol; };
  return edge(p[0]) || (dim == 2 && edge(p[1]));
}

void Dataset::validate() const {
  const auto n = targets.rows();
  if (k_samples.rows() != n || f_samples.rows() != n)
    throw DimensionError("dataset: record counts differ between inputs and targets");
  if (static_cast<std::size_t>(k_samples.cols()) != k_sensors.size())
    throw DimensionError("dataset: k sample width does not match the k sensors");
  if (static_cast<std::size_t>(f_samples.cols()) != f_sensors.size())
    throw DimensionError("dataset: f sample width does not match the f sensors");
  if (static_cast<std::size_t>(targets.cols()) != query_points.size())
    throw DimensionError("dataset: target width does not match the query points");
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw std::out_of_range("dataset: slice out of range");
  Dataset d = *this;
  const auto b = static_cast<Eigen::Index>(begin);
  const auto len = static_cast<Eigen::Index>(end - begin);
  d.k_samples = k_samples.middleRows(b, len);
  d.f_samples = f_samples.middleRows(b, len);
  d.targets = targets.middleRows(b, len);
  return d;
}

Container dataset_to_container(const Dataset& d) {
  d.validate();
  Container c;
  c.meta = d.meta;
  c.meta["kind"] = "dataset";
  c.meta["dim"] = d.dim;
  c.meta["records"] = d.size();
  add_points(c, "k_sensors", d.k_sensors);
  add_points(c, "f_sensors", d.f_sensors);
  add_points(c, "query_points", d.query_points);
  add_matrix(c, "k_samples", d.k_samples);
  add_matrix(c, "f_samples", d.f_samples);
  add_matrix(c, "targets", d.targets);
  return c;
}

Dataset dataset_from_container(const Container& c) {
  if (c.meta.value("kind", std::string()) != "dataset")
    throw ContainerError("dataset: container does not hold a dataset");
  Dataset d;
  d.meta = c.meta;
  d.dim = c.meta.value("dim", 1);
  d.k_sensors = get_points(c, "k_sensors");
  d.f_sensors = get_points(c, "f_sensors");
  d.query_points = get_points(c, "query_points");
  d.k_samples = get_matrix(c, "k_samples", std::nullopt, d.k_sensors.size());
  d.f_samples = get_matrix(c, "f_samples", std::nullopt, d.f_sensors.size());
  d.targets = get_matrix(c, "targets", std::nullopt, d.query_points.size());
  try {
    d.validate();
  } catch (const DimensionError& e) {
    throw ContainerError(e.what());
  }
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
  write_container(dataset_to_container(d), path);
}

Dataset load_dataset(const std::string& path) { return dataset_from_container(read_container(path)); }

void DatasetConfig::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dataset config: dim must be 1 or 2");
  gp_k.validate();
  gp_f.validate();
  if (gp_g) {
    if (dim != 2) throw std::invalid_argument("dataset config: boundary GP needs dim = 2");
    gp_g->validate();
  }
  if (sensors.empty()) throw std::invalid_argument("dataset config: no sensors");
  if (query_points.empty()) throw std::invalid_argument("dataset config: no query points");
  const std::size_t m = per_axis(dim, sensors.size());
  if (m >= 2 && fine_n + 1 < 4 * (m - 1))
    throw std::invalid_argument("dataset config: fine grid (n=" + std::to_string(fine_n) +
                                ") must be at least 4x finer than the sensor lattice");
  if (!(k_floor > 0.0)) throw std::invalid_argument("dataset config: k_floor must be positive");
  if (!(solve_tol > 0.0)) throw std::invalid_argument("dataset config: solve_tol must be positive");
}

Vector solve_fem(const StructuredGrid& grid, const ScalarField& k, const ScalarField& f,
                 const BoundaryField* g, double tol, std::size_t max_cycles) {
  if (g != nullptr && grid.dim() != 2)
    throw std::invalid_argument("solve_fem: boundary data is only supported in 2-d");
  Vector rhs;
  Vector boundary = Vector::Zero(static_cast<Eigen::Index>(grid.full_count()));
  if (g == nullptr) {
    rhs = assemble_load(grid, f).values;
  } else {
    const AugmentedSystem sys = assemble_augmented_2d(grid, k, f, *g);
    for (std::size_t idx = 0; idx < grid.full_count(); ++idx)
      if (grid.is_boundary(idx)) boundary[static_cast<Eigen::Index>(idx)] = sys.b.values[static_cast<Eigen::Index>(idx)];
    // Move the known boundary values to the right-hand side.
    const Vector coupled = spmv(sys.a, boundary);
    rhs = restrict_to_interior(grid, sys.b.values - coupled);
  }

  const std::size_t levels = max_levels(grid, 1);
  Vector u;
  if (levels >= 2) {
    const MgHierarchy mg = build_hierarchy(grid, k, levels);
    StopRule stop;
    stop.tol = tol;
    stop.max_iter = max_cycles;
    const IterationTrace tr = mg_solve(mg, rhs, Vector::Zero(rhs.size()), stop);
    if (tr.status != SolveStatus::Converged)
      throw NumericalError("solve_fem: multigrid stopped with status " + to_string(tr.status) +
                           " after " + std::to_string(tr.iterations) + " cycles");
    u = tr.solution;
  } else {
    if (grid.interior_count() > 4096)
      throw std::invalid_argument("solve_fem: grid admits no multigrid hierarchy (n+1 must be even)");
    u = cholesky_solve(cholesky(assemble_stiffness(grid, k).to_dense()), rhs);
  }
  return extend_to_full(grid, u, &boundary);
}

Vector forcing_samples(const std::vector<Point>& sensors, const ScalarField& f, const BoundaryField* g) {
  Vector out(static_cast<Eigen::Index>(sensors.size()));
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const Point& p = sensors[i];
    out[static_cast<Eigen::Index>(i)] = (g != nullptr && on_boundary(2, p)) ? (*g)(boundary_parameter(p)) : f(p);
  }
  return out;
}

Dataset generate_dataset(const DatasetConfig& cfg, DatasetReport* report) {
  cfg.validate();
  const StructuredGrid grid(cfg.dim, cfg.fine_n);
  const LatticeGpSampler k_sampler(cfg.gp_k, grid);
  const LatticeGpSampler f_sampler(cfg.gp_f, grid);

  std::vector<std::size_t> bnodes;
  std::vector<double> bt;
  std::optional<GpSampler> g_sampler;
  if (cfg.gp_g) {
    std::vector<Point> tpts;
    for (std::size_t idx = 0; idx < grid.full_count(); ++idx) {
      if (!grid.is_boundary(idx)) continue;
      bnodes.push_back(idx);
      bt.push_back(boundary_parameter(grid.full_point(idx)));
      tpts.push_back({bt.back(), 0.0});
    }
    g_sampler.emplace(*cfg.gp_g, tpts);
  }

  Dataset d;
  d.dim = cfg.dim;
  d.k_sensors = cfg.sensors;
  d.f_sensors = cfg.sensors;
  d.query_points = cfg.query_points;
  const auto ns = static_cast<Eigen::Index>(cfg.sensors.size());
  const auto nq = static_cast<Eigen::Index>(cfg.query_points.size());
  std::vector<Vector> ks, fs, us;
  DatasetReport rep;

  std::mt19937_64 rng(cfg.seed);
  for (std::size_t r = 0; r < cfg.count; ++r) {
    const ClampReport kc = positivity_guard(k_sampler.sample(rng), cfg.k_floor);
    const Vector fv = f_sampler.sample(rng);
    if (kc.clamped > 0) ++rep.clamped_records;
    const PiecewiseLinearFn kfn(grid, kc.values);
    const PiecewiseLinearFn ffn(grid, fv);
    const ScalarField kf = [&](const Point& p) { return kfn(p); };
    const ScalarField ff = [&](const Point& p) { return ffn(p); };
    BoundaryField gf;
    if (g_sampler) {
      const Vector gv = g_sampler->sample(rng);
      gf = periodic_boundary_interpolant(bt, std::vector<double>(gv.data(), gv.data() + gv.size()));
    }
    Vector u;
    try {
      u = solve_fem(grid, kf, ff, g_sampler ? &gf : nullptr, cfg.solve_tol, cfg.max_cycles);
    } catch (const NumericalError& e) {
      if (!cfg.skip_failures)
        throw NumericalError("generate_dataset: record " + std::to_string(r) + ": " + e.what());
      ++rep.skipped;
      continue;
    }
    const PiecewiseLinearFn ufn(grid, u);
    ks.push_back(values_at(kfn, cfg.sensors));
    fs.push_back(forcing_samples(cfg.sensors, ff, g_sampler ? &gf : nullptr));
    us.push_back(values_at(ufn, cfg.query_points));
  }

  const auto n = static_cast<Eigen::Index>(ks.size());
  d.k_samples.resize(n, ns);
  d.f_samples.resize(n, ns);
  d.targets.resize(n, nq);
  for (Eigen::Index r = 0; r < n; ++r) {
    d.k_samples.row(r) = ks[static_cast<std::size_t>(r)].transpose();
    d.f_samples.row(r) = fs[static_cast<std::size_t>(r)].transpose();
    d.targets.row(r) = us[static_cast<std::size_t>(r)].transpose();
  }
  rep.generated = static_cast<std::size_t>(n);

  auto gp_json = [](const GpSpec& s) {
    nlohmann::json j = {{"kernel", to_string(s.kernel)},
                        {"mean", s.mean},
                        {"std", s.std},
                        {"length_scale", s.length_scale}};
    if (s.kernel == GpSpec::Kernel::ExpSineSquared) j["period"] = s.period;
    return j;
  };
  d.meta = {{"fine_n", cfg.fine_n},
            {"seed", cfg.seed},
            {"requested", cfg.count},
            {"skipped", rep.skipped},
            {"clamped_records", rep.clamped_records},
            {"k_floor", cfg.k_floor},
            {"solve_tol", cfg.solve_tol},
            {"gp_k", gp_json(cfg.gp_k)},
            {"gp_f", gp_json(cfg.gp_f)}};
  if (cfg.gp_g) d.meta["gp_g"] = gp_json(*cfg.gp_g);
  if (report != nullptr) *report = rep;
  return d;
}

}  // namespace hybrid
