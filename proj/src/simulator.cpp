#include "wsindy/simulator.hpp"

#include "wsindy/error.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <random>
#include <tuple>

namespace wsindy {

namespace odeint = boost::numeric::odeint;

Eigen::Index Sampling::count() const {
  if (!(dt > 0.0) || !(t_end >= t_first) || !(t_first >= t_initial)) throw InvalidArgument("invalid sampling window");
  return static_cast<Eigen::Index>(std::llround((t_end - t_first) / dt)) + 1;
}

Eigen::VectorXd Sampling::grid() const { return TimeSeries::uniform_grid(t_first, dt, count()); }

nlohmann::json SystemSpec::to_json() const {
  nlohmann::json j;
  j["system"] = name;
  j["variant"] = variant;
  j["parameters"] = parameters;
  j["x0"] = std::vector<double>(x0.data(), x0.data() + x0.size());
  j["sampling"] = {{"t_initial", sampling.t_initial}, {"t_first", sampling.t_first}, {"t_end", sampling.t_end}, {"dt", sampling.dt}};
  return j;
}

namespace {

double param(const SystemSpec& spec, const std::string& key) {
  auto it = spec.parameters.find(key);
  if (it == spec.parameters.end()) throw InvalidArgument(spec.name + " is missing parameter '" + key + "'");
  return it->second;
}

// (equation, exponents, coefficient)
using Term = std::tuple<int, std::vector<int>, double>;

std::vector<Term> true_terms(const SystemSpec& spec) {
  if (spec.name == "duffing") {
    const double mu = param(spec, "mu"), alpha = param(spec, "alpha"), beta = param(spec, "beta");
    return {{0, {0, 1}, 1.0}, {1, {0, 1}, -mu}, {1, {1, 0}, -alpha}, {1, {3, 0}, -beta}};
  }
  if (spec.name == "van_der_pol") {
    const double beta = param(spec, "beta");
    return {{0, {0, 1}, 1.0}, {1, {0, 1}, beta}, {1, {2, 1}, -beta}, {1, {1, 0}, -1.0}};
  }
  if (spec.name == "lotka_volterra") {
    const double alpha = param(spec, "alpha"), beta = param(spec, "beta");
    return {{0, {1, 0}, alpha}, {0, {1, 1}, -beta}, {1, {1, 1}, beta}, {1, {0, 1}, -2.0 * alpha}};
  }
  if (spec.name == "lorenz") {
    const double sigma = param(spec, "sigma"), rho = param(spec, "rho"), beta = param(spec, "beta");
    return {{0, {1, 0, 0}, -sigma}, {0, {0, 1, 0}, sigma}, {1, {1, 0, 0}, rho}, {1, {1, 0, 1}, -1.0},
            {1, {0, 1, 0}, -1.0},   {2, {1, 1, 0}, 1.0},   {2, {0, 0, 1}, -beta}};
  }
  throw InvalidArgument("unknown system '" + spec.name + "'");
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

constexpr double kBlowup = 1e8;

}  // namespace

VectorField vector_field(const SystemSpec& spec) {
  if (spec.name == "duffing") {
    const double mu = param(spec, "mu"), alpha = param(spec, "alpha"), beta = param(spec, "beta");
    return [=](std::span<const double> x, std::span<double> dx) {
      dx[0] = x[1];
      dx[1] = -mu * x[1] - alpha * x[0] - beta * x[0] * x[0] * x[0];
    };
  }
  if (spec.name == "van_der_pol") {
    const double beta = param(spec, "beta");
    return [=](std::span<const double> x, std::span<double> dx) {
      dx[0] = x[1];
      dx[1] = beta * x[1] * (1.0 - x[0] * x[0]) - x[0];
    };
  }
  if (spec.name == "lotka_volterra") {
    const double alpha = param(spec, "alpha"), beta = param(spec, "beta");
    return [=](std::span<const double> x, std::span<double> dx) {
      dx[0] = alpha * x[0] - beta * x[0] * x[1];
      dx[1] = beta * x[0] * x[1] - 2.0 * alpha * x[1];
    };
  }
  if (spec.name == "lorenz") {
    const double sigma = param(spec, "sigma"), rho = param(spec, "rho"), beta = param(spec, "beta");
    return [=](std::span<const double> x, std::span<double> dx) {
      dx[0] = sigma * (x[1] - x[0]);
      dx[1] = x[0] * (rho - x[2]) - x[1];
      dx[2] = x[0] * x[1] - beta * x[2];
    };
  }
  throw InvalidArgument("unknown system '" + spec.name + "'");
}

Eigen::MatrixXd true_weights(const SystemSpec& spec, const TrialLibrary& lib) {
  if (lib.dim() != spec.dim()) throw InvalidArgument("library dimension does not match the system");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(lib.size(), spec.dim());
  for (const auto& [eq, exps, coeff] : true_terms(spec)) {
    const int j = lib.index_of(TermSpec::monomial(exps));
    if (j < 0) throw InvalidArgument("library lacks term " + TermSpec::monomial(exps).label() + " of " + spec.name);
    w(j, eq) = coeff;
  }
  return w;
}

TimeSeries integrate(const VectorField& f, const Eigen::VectorXd& x0, const Sampling& sampling, Tolerances tol) {
  if (!(tol.abs > 0.0) || !(tol.rel > 0.0)) throw InvalidArgument("integration tolerances must be > 0");
  if (!x0.allFinite()) throw InvalidArgument("initial condition must be finite");
  using State = std::vector<double>;
  const auto dim = static_cast<std::size_t>(x0.size());
  const Eigen::VectorXd grid = sampling.grid();

  std::vector<double> times;
  const bool skip_initial = sampling.t_first > sampling.t_initial;
  if (skip_initial) times.push_back(sampling.t_initial);
  times.insert(times.end(), grid.data(), grid.data() + grid.size());

  TimeSeries out;
  out.t = grid;
  out.y.resize(grid.size(), x0.size());

  auto rhs = [&](const State& x, State& dx, double t) {
    for (double v : x)
      if (!std::isfinite(v) || std::abs(v) > kBlowup) throw IntegrationFailure("state blew up", t);
    f(x, dx);
  };
  Eigen::Index row = 0;
  bool first = true;
  auto observer = [&](const State& x, double) {
    if (first && skip_initial) {
      first = false;
      return;
    }
    first = false;
    for (std::size_t d = 0; d < dim; ++d) out.y(row, static_cast<Eigen::Index>(d)) = x[d];
    ++row;
  };

  State x(x0.data(), x0.data() + x0.size());
  auto stepper = odeint::make_dense_output(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), sampling.dt / 10.0, observer,
                            odeint::max_step_checker(1000000));
  } catch (const odeint::odeint_error& e) {
    throw IntegrationFailure(std::string("step size control failed: ") + e.what(), stepper.current_time());
  }
  if (row != grid.size()) throw IntegrationFailure("integration stopped early", stepper.current_time());
  if (!out.y.allFinite()) throw IntegrationFailure("non-finite state", sampling.t_end);
  return out;
}

TimeSeries integrate(const SystemSpec& spec, Tolerances tol) {
  return integrate(vector_field(spec), spec.x0, spec.sampling, tol);
}

double rms_norm(const Eigen::MatrixXd& x) {
  if (x.size() == 0) throw InvalidArgument("rms_norm of an empty matrix");
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

TimeSeries add_noise(const TimeSeries& x, const NoiseSpec& noise, std::uint64_t stream) {
  if (!(noise.sigma_snr >= 0.0)) throw InvalidArgument("sigma_snr must be >= 0");
  TimeSeries y = x;
  if (noise.sigma_snr == 0.0) return y;
  const double sigma = noise.sigma_snr * rms_norm(x.y);
  auto engine = make_engine(noise.seed, stream);
  std::normal_distribution<double> normal(0.0, sigma);
  // column-major fill keeps each coordinate's noise contiguous in the stream
  for (Eigen::Index d = 0; d < y.y.cols(); ++d)
    for (Eigen::Index m = 0; m < y.y.rows(); ++m) y.y(m, d) += normal(engine);
  return y;
}

TimeSeries simulate_learned(const Eigen::MatrixXd& w, const TrialLibrary& lib, const Eigen::VectorXd& x0,
                            const Sampling& sampling, double extend, Tolerances tol) {
  if (!w.allFinite()) throw InvalidArgument("weights must be finite");
  if (w.rows() != lib.size() || w.cols() != lib.dim() || x0.size() != lib.dim())
    throw InvalidArgument("weights, library and initial condition disagree in shape");
  if (!(extend >= 1.0)) throw InvalidArgument("extend factor must be >= 1");
  Sampling s = sampling;
  if (extend != 1.0) {
    const double span = (sampling.t_end - sampling.t_initial) * extend;
    const auto steps = std::llround((sampling.t_initial + span - sampling.t_first) / sampling.dt);
    s.t_end = sampling.t_first + static_cast<double>(steps) * sampling.dt;
  }
  // Only the active rows of w contribute; skip the rest when evaluating.
  std::vector<int> rows;
  for (int j = 0; j < lib.size(); ++j)
    if (w.row(j).cwiseAbs().maxCoeff() > 0.0) rows.push_back(j);
  const Eigen::MatrixXd wt = w.transpose();
  VectorField f = [&lib, rows, wt](std::span<const double> x, std::span<double> dx) {
    std::fill(dx.begin(), dx.end(), 0.0);
    for (int j : rows) {
      const double v = lib.terms()[static_cast<std::size_t>(j)].eval(x);
      for (std::size_t d = 0; d < dx.size(); ++d) dx[d] += wt(static_cast<Eigen::Index>(d), j) * v;
    }
  };
  return integrate(f, x0, s, tol);
}

SystemSpec benchmark_system(const std::string& name, const std::string& variant) {
  static const std::map<std::string, std::vector<double>> betas = {
      {"duffing", {0.005, 0.08, 1.0, 100.0}},
      {"van_der_pol", {0.01, 0.1, 1.0, 10.0}},
      {"lotka_volterra", {0.05, 0.1, 1.0, 10.0}},
  };
  auto it = betas.find(name);
  if (it == betas.end()) throw InvalidArgument("unknown benchmark system '" + name + "'");
  static const std::vector<std::string> variants = {"V1", "V2", "V3", "V4"};
  const auto v = std::find(variants.begin(), variants.end(), variant);
  if (v == variants.end()) throw InvalidArgument("unknown variant '" + variant + "' (expected V1-V4)");
  const double beta = it->second[static_cast<std::size_t>(v - variants.begin())];

  SystemSpec spec;
  spec.name = name;
  spec.variant = variant;
  spec.sampling = {0.0, 0.0, 30.0, 0.01};
  if (name == "duffing") {
    spec.parameters = {{"mu", 0.2}, {"alpha", 0.05}, {"beta", beta}};
    spec.x0 = Eigen::Vector2d(0.0, 2.0);
  } else if (name == "van_der_pol") {
    spec.parameters = {{"beta", beta}};
    spec.x0 = Eigen::Vector2d(0.0, 1.0);
  } else {
    spec.parameters = {{"alpha", 1.0}, {"beta", beta}};
    spec.x0 = Eigen::Vector2d(1.0, 2.0);
  }
  return spec;
}

SystemSpec lorenz_system(const Eigen::Vector3d& x0) {
  SystemSpec spec;
  spec.name = "lorenz";
  spec.variant = "";
  spec.parameters = {{"sigma", 10.0}, {"beta", 8.0 / 3.0}, {"rho", 28.0}};
  spec.x0 = x0;
  spec.sampling = {0.0, 0.001, 10.0, 0.001};
  return spec;
}

Eigen::Vector3d sample_lorenz_ic(std::uint64_t seed, std::uint64_t stream) {
  auto engine = make_engine(seed, stream);
  std::uniform_real_distribution<double> xy(-15.0, 15.0);
  std::uniform_real_distribution<double> z(10.0, 40.0);
  const double a = xy(engine);
  const double b = xy(engine);
  return {a, b, z(engine)};
}

std::vector<SystemSpec> benchmark_suite(std::uint64_t lorenz_seed) {
  std::vector<SystemSpec> out;
  for (const char* name : {"duffing", "van_der_pol", "lotka_volterra"})
    for (const char* v : {"V1", "V2", "V3", "V4"}) out.push_back(benchmark_system(name, v));
  out.push_back(lorenz_system(sample_lorenz_ic(lorenz_seed)));
  return out;
}

}  // namespace wsindy
