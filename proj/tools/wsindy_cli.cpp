// wsindy command-line front end: simulate | identify | experiment | reproduce.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage error.

#include "wsindy/error.hpp"
#include "wsindy/io.hpp"
#include "wsindy/metrics.hpp"
#include "wsindy/pipeline.hpp"
#include "wsindy/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace wsindy;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct Options {
  std::string system = "duffing";
  std::string variant = "V3";
  std::vector<std::string> params;  // name=value overrides
  std::vector<double> x0;
  double snr = 0.0;
  std::uint64_t seed = 0;
  std::string grid = "uniform";
  std::vector<double> rho{5.0};
  std::vector<double> s{0.5};
  std::vector<int> K;
  int r_whm = 30;
  int p_deriv = 2;
  int s_deriv = 16;
  std::vector<int> p{16};
  std::optional<int> L_override;
  std::optional<double> lambda;
  double gamma = 0.0;
  bool normalize_columns = false;
  int library_degree = 5;
  bool trig = false;
  int realizations = 20;
  double extend = 1.5;
  double tol = 1e-10;
  int threads = 0;
  std::string out = ".";
  std::string data;
  std::string config;
  std::string figure;
};

// ---------------------------------------------------------------- helpers

std::string canonical_system(const std::string& name) {
  static const std::map<std::string, std::string> alias = {
      {"duffing", "duffing"}, {"duff", "duffing"},           {"van_der_pol", "van_der_pol"},
      {"vdp", "van_der_pol"}, {"lotka_volterra", "lotka_volterra"}, {"lv", "lotka_volterra"},
      {"lorenz", "lorenz"}};
  auto it = alias.find(name);
  if (it == alias.end()) throw InvalidArgument("unknown system '" + name + "'");
  return it->second;
}

SystemSpec make_system(const Options& o) {
  const std::string name = canonical_system(o.system);
  SystemSpec spec;
  if (name == "lorenz") {
    Eigen::Vector3d x0 = sample_lorenz_ic(o.seed);
    if (!o.x0.empty()) {
      if (o.x0.size() != 3) throw InvalidArgument("--x0 needs 3 values for lorenz");
      x0 = Eigen::Vector3d(o.x0[0], o.x0[1], o.x0[2]);
    }
    spec = lorenz_system(x0);
  } else {
    spec = benchmark_system(name, o.variant);
    if (!o.x0.empty()) {
      if (static_cast<int>(o.x0.size()) != spec.dim()) throw InvalidArgument("--x0 length does not match the system");
      spec.x0 = Eigen::Map<const Eigen::VectorXd>(o.x0.data(), spec.dim());
    }
  }
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--param expects name=value, got '" + kv + "'");
    try {
      spec.parameters[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("--param value is not a number: '" + kv + "'");
    }
    spec.variant = "custom";
  }
  return spec;
}

SystemSpec system_from_json(const json& j) {
  SystemSpec spec;
  spec.name = j.at("system").get<std::string>();
  spec.variant = j.value("variant", "");
  spec.parameters = j.at("parameters").get<std::map<std::string, double>>();
  const auto x0 = j.at("x0").get<std::vector<double>>();
  spec.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  const auto& s = j.at("sampling");
  spec.sampling = {s.at("t_initial"), s.at("t_first"), s.at("t_end"), s.at("dt")};
  return spec;
}

TrialLibrary make_library(const Options& o, int dim) { return TrialLibrary::polynomial(dim, o.library_degree, o.trig); }

int default_K(const TrialLibrary& lib) { return (lib.dim() >= 3 ? 4 : 6) * lib.size(); }

GridConfig make_grid(const Options& o, const TrialLibrary& lib, double rho, double s, int K, int p) {
  if (o.grid == "uniform") {
    UniformGridConfig g{rho, s, o.L_override};
    g.validate();
    return g;
  }
  if (o.grid == "adaptive") {
    AdaptiveGridConfig g{o.p_deriv, o.s_deriv, K > 0 ? K : default_K(lib), o.r_whm};
    g.validate();
    return g;
  }
  if (o.grid == "square") return SquareGridConfig{p, o.L_override};
  throw InvalidArgument("unknown grid '" + o.grid + "'");
}

GridConfig single_grid(const Options& o, const TrialLibrary& lib) {
  if (o.rho.size() != 1 || o.s.size() != 1 || o.p.size() != 1 || o.K.size() > 1)
    throw InvalidArgument("this command takes a single value for --rho, --s, --K and --p");
  return make_grid(o, lib, o.rho[0], o.s[0], o.K.empty() ? 0 : o.K[0], o.p[0]);
}

SolverConfig make_solver(const Options& o, double fallback_lambda) {
  SolverConfig c;
  c.lambda = o.lambda.value_or(fallback_lambda);
  c.gamma = o.gamma;
  c.normalize_columns = o.normalize_columns;
  c.validate();
  return c;
}

json grid_json(const GridConfig& g) {
  if (const auto* u = std::get_if<UniformGridConfig>(&g)) {
    json j = {{"kind", "uniform"}, {"rho", u->rho}, {"s", u->s}};
    if (u->L_override) j["L_override"] = *u->L_override;
    return j;
  }
  if (const auto* a = std::get_if<AdaptiveGridConfig>(&g))
    return {{"kind", "adaptive"}, {"K", a->K}, {"r_whm", a->r_whm}, {"p_deriv", a->p_deriv}, {"s_deriv", a->s_deriv}};
  const auto& q = std::get<SquareGridConfig>(g);
  json j = {{"kind", "square"}, {"p", q.p}};
  if (q.L_override) j["L_override"] = *q.L_override;
  return j;
}

json solver_json(const SolverConfig& c) {
  return {{"lambda", c.lambda}, {"gamma", c.gamma}, {"normalize_columns", c.normalize_columns}, {"max_iterations", c.max_iterations}};
}

json noise_json(double snr, std::uint64_t seed) { return {{"sigma_snr", snr}, {"seed", seed}}; }

void write_trajectory(const fs::path& csv, const TimeSeries& ts, const json& meta) {
  io::write_trajectory_csv(csv, ts);
  json m = meta;
  m["schema_version"] = kSchemaVersion;
  m["rows"] = ts.size();
  m["columns"] = ts.dim() + 1;
  io::write_json(fs::path(csv).replace_extension(".json"), m);
}

// Columns t, x1..xD, then the same columns for each extra series.
void write_overlay(const fs::path& path, const std::vector<std::pair<std::string, const TimeSeries*>>& series) {
  const TimeSeries& base = *series.front().second;
  std::vector<std::string> header{"t"};
  for (const auto& [name, ts] : series)
    for (Eigen::Index d = 0; d < ts->dim(); ++d) header.push_back(name + "_x" + std::to_string(d + 1));
  std::vector<std::vector<std::string>> rows;
  Eigen::Index n = base.size();
  for (const auto& [name, ts] : series) n = std::max(n, ts->size());
  for (Eigen::Index m = 0; m < n; ++m) {
    std::vector<std::string> row;
    const TimeSeries* longest = series.front().second;
    for (const auto& [name, ts] : series)
      if (ts->size() > longest->size()) longest = ts;
    row.push_back(io::format_double(longest->t(m)));
    for (const auto& [name, ts] : series)
      for (Eigen::Index d = 0; d < ts->dim(); ++d) row.push_back(m < ts->size() ? io::format_double(ts->y(m, d)) : "");
    rows.push_back(std::move(row));
  }
  io::write_table_csv(path, header, rows);
}

void write_adaptive_diagnostics(const fs::path& path, const TimeSeries& data, const AdaptiveGridConfig& cfg) {
  const AdaptiveBasis ab = build_adaptive_basis(data, cfg);
  const Eigen::Index D = data.dim();
  std::vector<std::string> header{"t"};
  for (Eigen::Index d = 0; d < D; ++d) header.push_back("v" + std::to_string(d + 1));
  for (Eigen::Index d = 0; d < D; ++d) header.push_back("psi" + std::to_string(d + 1));
  for (Eigen::Index d = 0; d < D; ++d) header.push_back("c" + std::to_string(d + 1));
  header.push_back("basis_center");
  std::vector<std::vector<int>> hits(static_cast<std::size_t>(D), std::vector<int>(static_cast<std::size_t>(data.size()), 0));
  for (Eigen::Index d = 0; d < D; ++d)
    for (auto c : ab.centers_per_dim[static_cast<std::size_t>(d)]) ++hits[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)];
  std::vector<int> centre(static_cast<std::size_t>(data.size()), 0);
  for (const auto& phi : ab.basis) {
    const auto i = static_cast<std::size_t>(std::lround((phi.peak() - data.t(0)) / data.dt()));
    if (i < centre.size()) centre[i] = 1;
  }
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index m = 0; m < data.size(); ++m) {
    std::vector<std::string> row{io::format_double(data.t(m))};
    for (Eigen::Index d = 0; d < D; ++d) row.push_back(io::format_double(ab.v(m, d)));
    for (Eigen::Index d = 0; d < D; ++d) {
      const auto& psi = ab.psi[static_cast<std::size_t>(d)];
      row.push_back(psi ? io::format_double((*psi)(m)) : "");
    }
    for (Eigen::Index d = 0; d < D; ++d) row.push_back(std::to_string(hits[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)]));
    row.push_back(std::to_string(centre[static_cast<std::size_t>(m)]));
    rows.push_back(std::move(row));
  }
  io::write_table_csv(path, header, rows);
}

unsigned worker_count(const Options& o) {
  if (o.threads > 0) return static_cast<unsigned>(o.threads);
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(0..n-1) over a worker pool; results land by index so output
// order never depends on scheduling.
template <class F>
void parallel_for(int n, unsigned workers, F f) {
  std::atomic<int> next{0};
  auto body = [&] {
    for (int i = next++; i < n; i = next++) f(i);
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < std::min<unsigned>(workers, static_cast<unsigned>(n)); ++w) pool.emplace_back(body);
  body();
}

// ------------------------------------------------------ one noisy run

struct RunResult {
  std::string status = "ok";
  double coeff_error = NAN;
  std::optional<double> traj_error;
  bool support_exact = false;
  int false_positives = 0;
  int false_negatives = 0;
  long K = 0;
  Eigen::MatrixXd w;
};

struct Problem {
  SystemSpec spec;
  TimeSeries clean;
  TrialLibrary lib;
  Eigen::MatrixXd w_star;
  double lambda = 0.0;
};

Problem make_problem(const Options& o, const SystemSpec& spec) {
  Problem p{spec, integrate(spec, Tolerances{o.tol, o.tol}), make_library(o, spec.dim()), {}, 0.0};
  p.w_star = true_weights(spec, p.lib);
  p.lambda = default_lambda(p.w_star);
  return p;
}

RunResult run_once(const Problem& pb, double snr, std::uint64_t seed, std::uint64_t stream, const GridConfig& grid,
                   const SolverConfig& solver, Eigen::Index traj_rows = -1) {
  RunResult r;
  try {
    const TimeSeries y = add_noise(pb.clean, NoiseSpec{snr, seed}, stream);
    const Identification id = identify(y, pb.lib, grid, solver);
    r.K = id.system.K();
    r.w = id.model.w;
    const RecoveryReport rep = make_report(id.model.w, pb.w_star, residual(id.system, id.model.w).norm());
    r.coeff_error = rep.coeff_error;
    r.support_exact = rep.support_exact;
    r.false_positives = rep.false_positives;
    r.false_negatives = rep.false_negatives;
    if (traj_rows >= 0) {
      try {
        const TimeSeries xdd = simulate_learned(id.model.w, pb.lib, pb.spec.x0, pb.spec.sampling);
        r.traj_error = traj_error(xdd.y, pb.clean.y, traj_rows);
      } catch (const IntegrationFailure& e) {
        r.traj_error = INFINITY;
      }
    }
  } catch (const std::exception& e) {
    r.status = e.what();
  }
  return r;
}

struct CellStats {
  int ok = 0, failed = 0, exact = 0;
  double mean_log10 = NAN, std_log10 = NAN, median = NAN;
};

CellStats summarize(const std::vector<RunResult>& runs) {
  CellStats c;
  std::vector<double> logs, errs;
  for (const auto& r : runs) {
    if (r.status != "ok") {
      ++c.failed;
      continue;
    }
    ++c.ok;
    c.exact += r.support_exact;
    errs.push_back(r.coeff_error);
    logs.push_back(std::log10(std::max(r.coeff_error, 1e-300)));
  }
  if (!logs.empty()) {
    c.mean_log10 = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size());
    double ss = 0.0;
    for (double v : logs) ss += (v - c.mean_log10) * (v - c.mean_log10);
    c.std_log10 = logs.size() > 1 ? std::sqrt(ss / static_cast<double>(logs.size() - 1)) : 0.0;
    std::sort(errs.begin(), errs.end());
    const std::size_t n = errs.size();
    c.median = 0.5 * (errs[(n - 1) / 2] + errs[n / 2]);
  }
  return c;
}

// Short form for labels and file names.
std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt(double v) { return std::isfinite(v) ? io::format_double(v) : (std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf")); }

std::vector<std::string> run_row(const std::string& cell, int realization, const RunResult& r) {
  return {cell,
          std::to_string(realization),
          r.status == "ok" ? "ok" : "failed",
          fmt(r.coeff_error),
          r.status == "ok" ? fmt(std::log10(std::max(r.coeff_error, 1e-300))) : "",
          r.traj_error ? fmt(*r.traj_error) : "",
          r.support_exact ? "1" : "0",
          std::to_string(r.false_positives),
          std::to_string(r.false_negatives),
          std::to_string(r.K),
          r.status == "ok" ? "" : "\"" + r.status + "\""};
}

const std::vector<std::string> kRunHeader = {"cell",          "realization",   "status", "coeff_error", "log10_coeff_error",
                                             "traj_error",    "support_exact", "false_positives", "false_negatives", "K",
                                             "message"};

struct Cell {
  std::string label;
  json params;
  GridConfig grid;
};

std::vector<Cell> experiment_cells(const Options& o, const TrialLibrary& lib) {
  std::vector<Cell> cells;
  if (o.grid == "uniform") {
    for (double rho : o.rho)
      for (double s : o.s)
        cells.push_back({"rho=" + tag(rho) + ";s=" + tag(s), {{"rho", rho}, {"s", s}},
                         make_grid(o, lib, rho, s, 0, 0)});
  } else if (o.grid == "adaptive") {
    const std::vector<int> ks = o.K.empty() ? std::vector<int>{default_K(lib)} : o.K;
    for (int K : ks) cells.push_back({"K=" + std::to_string(K), {{"K", K}}, make_grid(o, lib, 0, 0, K, 0)});
  } else if (o.grid == "square") {
    for (int p : o.p) cells.push_back({"p=" + std::to_string(p), {{"p", p}}, make_grid(o, lib, 0, 0, 0, p)});
  } else {
    throw InvalidArgument("unknown grid '" + o.grid + "'");
  }
  return cells;
}

// Monte Carlo over realizations x cells. Every cell sees the same noise
// realizations.
json monte_carlo(const Options& o, const Problem& pb, double snr, const std::vector<Cell>& cells, const SolverConfig& solver,
                 const fs::path& cells_csv, const fs::path& runs_csv, Eigen::Index traj_rows = -1) {
  const int n = o.realizations;
  const int total = n * static_cast<int>(cells.size());
  std::vector<RunResult> results(static_cast<std::size_t>(total));
  parallel_for(total, worker_count(o), [&](int i) {
    const auto& cell = cells[static_cast<std::size_t>(i / n)];
    results[static_cast<std::size_t>(i)] =
        run_once(pb, snr, o.seed, static_cast<std::uint64_t>(i % n), cell.grid, solver, traj_rows);
  });

  std::vector<std::vector<std::string>> cell_rows, run_rows;
  json summary = json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<RunResult> runs(results.begin() + static_cast<long>(c) * n, results.begin() + static_cast<long>(c + 1) * n);
    const CellStats st = summarize(runs);
    std::vector<double> traj;
    for (const auto& r : runs)
      if (r.traj_error) traj.push_back(*r.traj_error);
    std::sort(traj.begin(), traj.end());
    const double traj_median = traj.empty() ? NAN : 0.5 * (traj[(traj.size() - 1) / 2] + traj[traj.size() / 2]);
    std::vector<std::string> row{cells[c].label};
    for (const auto& [k, v] : cells[c].params.items()) row.push_back(v.dump());
    row.insert(row.end(), {std::to_string(st.ok), std::to_string(st.failed), fmt(st.mean_log10), fmt(st.std_log10),
                           fmt(st.median), st.ok ? fmt(static_cast<double>(st.exact) / st.ok) : "", fmt(traj_median)});
    cell_rows.push_back(std::move(row));
    json s = cells[c].params;
    s["cell"] = cells[c].label;
    s["ok"] = st.ok;
    s["failed"] = st.failed;
    s["mean_log10_coeff_error"] = std::isfinite(st.mean_log10) ? json(st.mean_log10) : json(nullptr);
    s["std_log10_coeff_error"] = std::isfinite(st.std_log10) ? json(st.std_log10) : json(nullptr);
    s["median_coeff_error"] = std::isfinite(st.median) ? json(st.median) : json(nullptr);
    s["support_exact_fraction"] = st.ok ? json(static_cast<double>(st.exact) / st.ok) : json(nullptr);
    if (!traj.empty()) s["median_traj_error"] = traj_median;
    summary.push_back(s);
    for (int r = 0; r < n; ++r) run_rows.push_back(run_row(cells[c].label, r, runs[static_cast<std::size_t>(r)]));
  }
  std::vector<std::string> header{"cell"};
  for (const auto& [k, v] : cells.front().params.items()) header.push_back(k);
  header.insert(header.end(), {"ok", "failed", "mean_log10_coeff_error", "std_log10_coeff_error", "median_coeff_error",
                               "support_exact_fraction", "median_traj_error"});
  io::write_table_csv(cells_csv, header, cell_rows);
  io::write_table_csv(runs_csv, kRunHeader, run_rows);
  return summary;
}

// ------------------------------------------------------------ commands

int cmd_simulate(const Options& o) {
  const SystemSpec spec = make_system(o);
  const Tolerances tol{o.tol, o.tol};
  const TimeSeries x = integrate(spec, tol);
  const TimeSeries y = add_noise(x, NoiseSpec{o.snr, o.seed});
  fs::create_directories(o.out);
  const fs::path csv = fs::path(o.out) / "trajectory.csv";
  write_trajectory(csv, y,
                   {{"kind", "trajectory"},
                    {"spec", spec.to_json()},
                    {"noise", noise_json(o.snr, o.seed)},
                    {"noise_sigma", o.snr * rms_norm(x.y)},
                    {"tolerances", {{"abs", tol.abs}, {"rel", tol.rel}}}});
  std::cout << "wrote " << csv.string() << " (" << y.size() << " rows)\n";
  return 0;
}

int cmd_identify(const Options& o) {
  if (o.data.empty()) throw InvalidArgument("identify needs --data <trajectory.csv>");
  const TimeSeries data = io::read_trajectory_csv(o.data);
  const TrialLibrary lib = make_library(o, static_cast<int>(data.dim()));

  // A sidecar from `simulate` carries the generating system; use it for
  // reference weights and metrics.
  std::optional<SystemSpec> truth;
  const fs::path sidecar = fs::path(o.data).replace_extension(".json");
  if (fs::exists(sidecar)) {
    const json meta = io::read_json(sidecar);
    if (meta.contains("spec")) truth = system_from_json(meta["spec"]);
  }
  std::optional<Eigen::MatrixXd> w_star;
  if (truth && truth->dim() == lib.dim()) {
    try {
      w_star = true_weights(*truth, lib);
    } catch (const InvalidArgument&) {
    }
  }

  const GridConfig grid = single_grid(o, lib);
  const SolverConfig solver = make_solver(o, w_star ? default_lambda(*w_star) : 0.001);
  const Identification id = identify(data, lib, grid, solver);

  fs::create_directories(o.out);
  json model = id.model.to_json(lib);
  model["schema_version"] = kSchemaVersion;
  model["library"] = lib.to_json();
  io::write_json(fs::path(o.out) / "model.json", model);

  json report = id.report();
  report["schema_version"] = kSchemaVersion;
  report["data"] = o.data;
  report["grid_config"] = grid_json(grid);
  report["solver"] = solver_json(solver);
  if (w_star) {
    RecoveryReport rec = make_report(id.model.w, *w_star, report["residual_norm"].get<double>());
    try {
      const TimeSeries xdd = simulate_learned(id.model.w, lib, truth->x0, truth->sampling);
      const TimeSeries x = integrate(*truth);
      rec.traj_error = traj_error(xdd.y, x.y);
    } catch (const IntegrationFailure& e) {
      report["warnings"].push_back(std::string("learned model blew up at t = ") + std::to_string(e.time()));
    }
    report["recovery"] = rec.to_json();
  }
  io::write_json(fs::path(o.out) / "report.json", report);
  if (const auto* ag = std::get_if<AdaptiveGridConfig>(&grid))
    write_adaptive_diagnostics(fs::path(o.out) / "adaptive_diagnostics.csv", data, *ag);

  std::cout << model["equations"].dump(2) << '\n';
  for (const auto& w : id.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_experiment(const Options& o) {
  if (o.realizations < 1) throw InvalidArgument("--realizations must be >= 1");
  const Problem pb = make_problem(o, make_system(o));
  const SolverConfig solver = make_solver(o, pb.lambda);
  const auto cells = experiment_cells(o, pb.lib);
  fs::create_directories(o.out);
  const fs::path out(o.out);
  const json summary = monte_carlo(o, pb, o.snr, cells, solver, out / "experiment_cells.csv", out / "experiment_runs.csv");
  io::write_json(out / "experiment_summary.json", {{"schema_version", kSchemaVersion},
                                                   {"system", pb.spec.to_json()},
                                                   {"noise", noise_json(o.snr, o.seed)},
                                                   {"grid", o.grid},
                                                   {"solver", solver_json(solver)},
                                                   {"library", {{"degree", o.library_degree}, {"trig", o.trig}, {"J", pb.lib.size()}}},
                                                   {"realizations", o.realizations},
                                                   {"cells", summary}});
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ------------------------------------------------------------ reproduce

struct Manifest {
  json j;
  fs::path dir;
  void file(const std::string& name, const std::string& what) { j["files"].push_back({{"name", name}, {"contents", what}}); }
  void write() const { io::write_json(dir / "manifest.json", j); }
};

void reproduce_oz(const Options& o, Manifest& m) {
  const std::vector<int> ps{2, 4, 8, 16, 32, 64};
  std::vector<SystemSpec> specs;
  for (const char* name : {"duffing", "van_der_pol", "lotka_volterra"})
    for (const char* v : {"V1", "V2", "V3", "V4"}) specs.push_back(benchmark_system(name, v));
  for (std::uint64_t i = 0; i < 5; ++i) {
    specs.push_back(lorenz_system(sample_lorenz_ic(o.seed, i)));
    specs.back().variant = "ic" + std::to_string(i);
  }
  std::vector<std::vector<std::string>> rows(specs.size() * ps.size());
  parallel_for(static_cast<int>(specs.size()), worker_count(o), [&](int si) {
    const SystemSpec& spec = specs[static_cast<std::size_t>(si)];
    const TimeSeries x = integrate(spec, Tolerances{o.tol, o.tol});
    const TrialLibrary lib = TrialLibrary::polynomial(spec.dim(), 5, true);
    const Eigen::MatrixXd w_star = true_weights(spec, lib);
    SolverConfig solver;
    solver.lambda = 0.001;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      std::string err = "", status = "ok";
      try {
        const Identification id = identify(x, lib, SquareGridConfig{ps[k], {}}, solver);
        err = fmt(coeff_error(id.model.w, w_star));
      } catch (const std::exception& e) {
        status = e.what();
      }
      rows[static_cast<std::size_t>(si) * ps.size() + k] = {spec.name, spec.variant, std::to_string(ps[k]), err,
                                                           status == "ok" ? "ok" : "\"" + status + "\""};
    }
  });
  io::write_table_csv(m.dir / "oz_errors.csv", {"system", "variant", "p", "coeff_error", "status"}, rows);
  m.file("oz_errors.csv", "relative coefficient error against test-function degree p, square system K = J");
  m.j["settings"] = {{"library", "degree 5 polynomials + sin/cos(n x_d), n = 1, 2"},
                     {"grid", "square"},
                     {"p", ps},
                     {"lambda", 0.001},
                     {"gamma", 0.0},
                     {"noise", 0.0},
                     {"lorenz_ic_seed", o.seed}};
}

void reproduce_lownz(const Options& o, Manifest& m, SystemSpec spec) {
  Options oo = o;
  oo.grid = "uniform";
  const Problem pb = make_problem(oo, spec);
  const SolverConfig solver = make_solver(oo, pb.lambda);
  const std::vector<double> rhos{1, 2, 3, 4, 5};
  const std::vector<double> ss{0.1, 0.3, 0.5, 0.7, 0.9};
  oo.rho = rhos;
  oo.s = ss;
  const double snr = 0.04;
  const json heat = monte_carlo(oo, pb, snr, experiment_cells(oo, pb.lib), solver, m.dir / "heatmap_cells.csv",
                                m.dir / "heatmap_runs.csv");
  m.file("heatmap_cells.csv", "mean and std of log10 coefficient error over (rho, s), sigma_SNR = 0.04");
  m.file("heatmap_runs.csv", "per-realization rows of the heat map");

  oo.s = {0.5};
  json trend = json::array();
  std::vector<std::vector<std::string>> trend_rows;
  for (double level : {0.01, 0.02, 0.04, 0.08}) {
    const std::string label = tag(level);
    const json cells = monte_carlo(oo, pb, level, experiment_cells(oo, pb.lib), solver,
                                   m.dir / ("trend_cells_snr" + label + ".csv"), m.dir / ("trend_runs_snr" + label + ".csv"));
    for (const auto& c : cells) {
      auto field = [&](const char* key) { return c[key].is_null() ? std::string() : c[key].dump(); };
      trend_rows.push_back({label, field("rho"), field("mean_log10_coeff_error"), field("std_log10_coeff_error"),
                            field("median_coeff_error")});
    }
  }
  io::write_table_csv(m.dir / "trend.csv",
                      {"sigma_snr", "rho", "mean_log10_coeff_error", "std_log10_coeff_error", "median_coeff_error"},
                      trend_rows);
  m.file("trend.csv", "error against rho at s = 0.5 for several noise levels");

  // example trajectory at rho = 5, s = 0.5
  const TimeSeries y = add_noise(pb.clean, NoiseSpec{snr, o.seed}, 0);
  const Identification id = identify(y, pb.lib, UniformGridConfig{5.0, 0.5, {}}, solver);
  json model = id.model.to_json(pb.lib);
  model["schema_version"] = kSchemaVersion;
  model["coeff_error"] = coeff_error(id.model.w, pb.w_star);
  io::write_json(m.dir / "example_model.json", model);
  try {
    const TimeSeries xdd = simulate_learned(id.model.w, pb.lib, spec.x0, spec.sampling);
    write_overlay(m.dir / "example_trajectory.csv", {{"x", &pb.clean}, {"y", &y}, {"xdd", &xdd}});
  } catch (const IntegrationFailure& e) {
    write_overlay(m.dir / "example_trajectory.csv", {{"x", &pb.clean}, {"y", &y}});
  }
  m.file("example_model.json", "model learned from one realization at rho = 5, s = 0.5");
  m.file("example_trajectory.csv", "true x, noisy y and learned x_dd for the example");
  m.j["settings"] = {{"system", spec.to_json()}, {"sigma_snr", snr}, {"rho", rhos}, {"s", ss},
                     {"lambda", solver.lambda}, {"gamma", solver.gamma}, {"library_degree", o.library_degree},
                     {"realizations", o.realizations}, {"seed", o.seed}};
}

void reproduce_hnz(const Options& o, Manifest& m, const SystemSpec& spec, double snr, SolverConfig base) {
  const Problem pb = make_problem(o, spec);
  SolverConfig solver = base;
  solver.lambda = o.lambda.value_or(pb.lambda);
  const AdaptiveGridConfig grid{o.p_deriv, o.s_deriv, default_K(pb.lib), o.r_whm};
  const TimeSeries y = add_noise(pb.clean, NoiseSpec{snr, o.seed}, 0);
  const Identification id = identify(y, pb.lib, grid, solver);

  json model = id.model.to_json(pb.lib);
  model["schema_version"] = kSchemaVersion;
  model["library"] = pb.lib.to_json();
  io::write_json(m.dir / "model.json", model);
  json report = id.report();
  report["schema_version"] = kSchemaVersion;
  RecoveryReport rec = make_report(id.model.w, pb.w_star, report["residual_norm"].get<double>());
  std::optional<TimeSeries> xdd;
  try {
    xdd = simulate_learned(id.model.w, pb.lib, spec.x0, spec.sampling, o.extend);
    // the truth over the same extended window
    const TimeSeries x_ext = simulate_learned(pb.w_star, pb.lib, spec.x0, spec.sampling, o.extend);
    const Eigen::Index window = spec.name == "lorenz" ? std::lround((3.0 - spec.sampling.t_first) / spec.sampling.dt) + 1
                                                      : pb.clean.size();
    rec.traj_error = traj_error(xdd->y, x_ext.y, window);
    write_overlay(m.dir / "trajectories.csv", {{"x", &x_ext}, {"xdd", &*xdd}});
  } catch (const IntegrationFailure& e) {
    report["warnings"].push_back("learned model blew up at t = " + std::to_string(e.time()));
  }
  report["recovery"] = rec.to_json();
  io::write_json(m.dir / "report.json", report);
  write_trajectory(m.dir / "noisy.csv", y, {{"kind", "trajectory"}, {"spec", spec.to_json()}, {"noise", noise_json(snr, o.seed)}});
  write_adaptive_diagnostics(m.dir / "adaptive_diagnostics.csv", y, grid);
  m.file("noisy.csv", "noisy observations y (sidecar noisy.json)");
  m.file("model.json", "recovered model");
  m.file("report.json", "residuals, grid parameters and recovery metrics");
  m.file("trajectories.csv", "true x and learned x_dd, extended by the --extend factor");
  m.file("adaptive_diagnostics.csv", "weak derivative v, cumulative distribution psi, centre counts c");

  if (o.realizations > 1) {
    Options oo = o;
    oo.grid = "adaptive";
    oo.K = {grid.K};
    const Eigen::Index rows = spec.name == "lorenz" ? std::lround((3.0 - spec.sampling.t_first) / spec.sampling.dt) + 1 : -1;
    m.j["realizations_summary"] =
        monte_carlo(oo, pb, snr, experiment_cells(oo, pb.lib), solver, m.dir / "realizations_cells.csv",
                    m.dir / "realizations_runs.csv", rows);
    m.file("realizations_cells.csv", "median error and support recovery over realizations");
    m.file("realizations_runs.csv", "per-realization rows");
  }
  m.j["settings"] = {{"system", spec.to_json()},
                     {"sigma_snr", snr},
                     {"grid", grid_json(grid)},
                     {"solver", solver_json(solver)},
                     {"library_degree", o.library_degree},
                     {"extend", o.extend},
                     {"seed", o.seed},
                     {"realizations", o.realizations}};
  m.j["result"] = rec.to_json();
}

int cmd_reproduce(const Options& o) {
  static const std::vector<std::string> ids = {"oz", "lownz-duff", "lownz-vdp", "duff-hnz", "vp-hnz", "lv-hnz", "lorenz-hnz"};
  if (std::find(ids.begin(), ids.end(), o.figure) == ids.end())
    throw InvalidArgument("unknown figure id '" + o.figure + "'");
  Manifest m;
  m.dir = fs::path(o.out) / o.figure;
  fs::create_directories(m.dir);
  m.j = {{"schema_version", kSchemaVersion}, {"figure", o.figure}, {"files", json::array()}};

  SystemSpec vdp4 = benchmark_system("van_der_pol", "V3");
  vdp4.parameters["beta"] = 4.0;
  vdp4.variant = "mu4";
  SolverConfig plain;
  plain.gamma = o.gamma;
  plain.normalize_columns = o.normalize_columns;

  if (o.figure == "oz") reproduce_oz(o, m);
  else if (o.figure == "lownz-duff") reproduce_lownz(o, m, benchmark_system("duffing", "V3"));
  else if (o.figure == "lownz-vdp") reproduce_lownz(o, m, vdp4);
  else if (o.figure == "duff-hnz") reproduce_hnz(o, m, benchmark_system("duffing", "V3"), 0.1, plain);
  else if (o.figure == "vp-hnz") reproduce_hnz(o, m, vdp4, 0.1, plain);
  else if (o.figure == "lv-hnz") {
    SolverConfig lv;
    lv.gamma = 0.01;
    lv.normalize_columns = true;
    reproduce_hnz(o, m, benchmark_system("lotka_volterra", "V4"), 0.05, lv);
  } else {
    reproduce_hnz(o, m, lorenz_system(Eigen::Vector3d(-8, 7, 27)), 0.1, plain);
  }
  m.write();
  std::cout << "wrote " << (m.dir / "manifest.json").string() << '\n';
  return 0;
}

// -------------------------------------------------------------- parsing

void add_common(CLI::App* c, Options& o) {
  c->add_option("--config", o.config, "JSON file of option values; flags override it");
  c->add_option("--out", o.out, "output directory")->capture_default_str();
  c->add_option("--library-degree", o.library_degree, "maximum monomial degree")->capture_default_str()->check(CLI::NonNegativeNumber);
  c->add_flag("--trig", o.trig, "add sin(n x_d), cos(n x_d) for n = 1, 2");
  c->add_option("--tol", o.tol, "integrator absolute and relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--threads", o.threads, "worker threads (0 = hardware concurrency)")->capture_default_str();
}

void add_system(CLI::App* c, Options& o) {
  c->add_option("--system", o.system, "duffing | van_der_pol (vdp) | lotka_volterra (lv) | lorenz")->capture_default_str();
  c->add_option("--variant", o.variant, "parameter set V1-V4")->capture_default_str();
  c->add_option("--param", o.params, "override a system parameter, name=value (repeatable)");
  c->add_option("--x0", o.x0, "initial condition")->delimiter(',');
  c->add_option("--snr", o.snr, "noise level sigma_SNR")->capture_default_str()->check(CLI::NonNegativeNumber);
  c->add_option("--seed", o.seed, "random seed")->capture_default_str();
}

void add_method(CLI::App* c, Options& o, bool lists) {
  c->add_option("--grid", o.grid, "uniform | adaptive | square")
      ->capture_default_str()
      ->check(CLI::IsMember({"uniform", "adaptive", "square"}));
  auto* rho = c->add_option("--rho", o.rho, "uniform grid sup-norm ratio")->capture_default_str()->check(CLI::PositiveNumber);
  auto* s = c->add_option("--s", o.s, "uniform grid overlap height in (0, 1)")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  auto* k = c->add_option("--K", o.K, "adaptive grid test function count (default 6J, 4J for D = 3)");
  auto* p = c->add_option("--p", o.p, "square grid test function degree")->capture_default_str()->check(CLI::PositiveNumber);
  for (auto* opt : {rho, s, k, p}) {
    opt->delimiter(',');
    if (!lists) opt->expected(1);
  }
  c->add_option("--r-whm", o.r_whm, "adaptive grid width at half max, timepoints")->capture_default_str();
  c->add_option("--p-deriv", o.p_deriv, "degree of the differentiating test function")->capture_default_str();
  c->add_option("--s-deriv", o.s_deriv, "support of the differentiating test function, timepoints")->capture_default_str();
  c->add_option("--L-override", o.L_override, "test function support in timepoints");
  c->add_option("--lambda", o.lambda, "sparsity threshold (default: quarter of the smallest true weight, or 0.001)")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--gamma", o.gamma, "ridge coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
  c->add_flag("--normalize-columns", o.normalize_columns, "scale Gram matrix columns to unit 2-norm");
}

// Fills every option not given on the command line from the JSON file.
void apply_config(CLI::App* sub, const std::string& path) {
  const json cfg = io::read_json(path);
  if (!cfg.is_object()) throw InvalidArgument("config '" + path + "' must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (!opt) {
      for (auto* o : sub->get_options())
        if (o->check_lname(name)) opt = o;
    }
    if (!opt || name == "config") throw InvalidArgument("config key '" + key + "' is not an option of " + sub->get_name());
    if (opt->count() > 0) continue;  // the command line wins
    std::vector<json> items = value.is_array() ? value.get<std::vector<json>>() : std::vector<json>{value};
    for (const auto& v : items) opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak SINDy: sparse identification of ODEs from the weak form"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "integrate a benchmark system and write a trajectory CSV");
  add_system(sim, o);
  add_common(sim, o);

  auto* idf = app.add_subcommand("identify", "recover a sparse model from a trajectory CSV");
  idf->add_option("--data", o.data, "trajectory CSV (header t,x1,...)")->check(CLI::ExistingFile);
  add_method(idf, o, false);
  add_common(idf, o);

  auto* exp = app.add_subcommand("experiment", "Monte Carlo over noise realizations and a hyperparameter grid");
  add_system(exp, o);
  add_method(exp, o, true);
  add_common(exp, o);
  exp->add_option("--realizations", o.realizations, "noise realizations per cell")->capture_default_str();

  auto* rep = app.add_subcommand("reproduce", "regenerate the data behind one figure");
  rep->add_option("figure", o.figure, "oz | lownz-duff | lownz-vdp | duff-hnz | vp-hnz | lv-hnz | lorenz-hnz")->required();
  rep->add_option("--realizations", o.realizations, "noise realizations")->capture_default_str();
  rep->add_option("--seed", o.seed, "random seed")->capture_default_str();
  rep->add_option("--extend", o.extend, "end-time factor for learned trajectories")->capture_default_str();
  rep->add_option("--r-whm", o.r_whm, "adaptive grid width at half max")->capture_default_str();
  rep->add_option("--p-deriv", o.p_deriv, "degree of the differentiating test function")->capture_default_str();
  rep->add_option("--s-deriv", o.s_deriv, "support of the differentiating test function")->capture_default_str();
  rep->add_option("--lambda", o.lambda, "sparsity threshold override");
  rep->add_option("--gamma", o.gamma, "ridge coefficient")->capture_default_str();
  rep->add_flag("--normalize-columns", o.normalize_columns, "scale Gram matrix columns to unit 2-norm");
  add_common(rep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (auto* sub : app.get_subcommands()) {
      if (!o.config.empty()) {
        apply_config(sub, o.config);
      }
    }
    if (o.realizations < 1) throw InvalidArgument("--realizations must be >= 1");
    if (sim->parsed()) return cmd_simulate(o);
    if (idf->parsed()) return cmd_identify(o);
    if (exp->parsed()) return cmd_experiment(o);
    return cmd_reproduce(o);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SingularSystem& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
