#pragma once

#include "wsindy/time_series.hpp"
#include "wsindy/trial_library.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wsindy {

using VectorField = std::function<void(std::span<const double> x, std::span<double> dxdt)>;

/// Sampling grid t_first, t_first + dt, ..., t_end; the initial condition
/// is given at t_initial <= t_first.
struct Sampling {
  double t_initial = 0.0;
  double t_first = 0.0;
  double t_end = 30.0;
  double dt = 0.01;

  Eigen::Index count() const;
  Eigen::VectorXd grid() const;
};

struct SystemSpec {
  std::string name;  // duffing | van_der_pol | lotka_volterra | lorenz
  std::string variant;
  std::map<std::string, double> parameters;
  Eigen::VectorXd x0;
  Sampling sampling;

  int dim() const { return static_cast<int>(x0.size()); }
  nlohmann::json to_json() const;
};

struct NoiseSpec {
  double sigma_snr = 0.0;
  std::uint64_t seed = 0;
};

struct Tolerances {
  double abs = 1e-10;
  double rel = 1e-10;
};

/// Throws InvalidArgument for unknown names or missing parameters.
VectorField vector_field(const SystemSpec& spec);

/// True weights of a benchmark system in `lib`'s column order. Throws
/// InvalidArgument if a required term is missing from the library.
Eigen::MatrixXd true_weights(const SystemSpec& spec, const TrialLibrary& lib);

/// Dormand-Prince 5(4) with dense output, sampled on spec.sampling.
/// Throws IntegrationFailure on blowup (|x| > 1e8 or non-finite) or when
/// the step size collapses.
TimeSeries integrate(const SystemSpec& spec, Tolerances tol = {});
TimeSeries integrate(const VectorField& f, const Eigen::VectorXd& x0, const Sampling& sampling, Tolerances tol = {});

/// sqrt(mean of squares) over every entry.
double rms_norm(const Eigen::MatrixXd& x);

/// Independent stream for (seed, stream) pairs; identical inputs give
/// identical output on the same standard library.
TimeSeries add_noise(const TimeSeries& x, const NoiseSpec& noise, std::uint64_t stream = 0);

/// Integrates x' = Theta(x) w from x0. `extend` stretches the end time
/// (1.5 reproduces the 50% extension used for limit-behaviour plots).
TimeSeries simulate_learned(const Eigen::MatrixXd& w, const TrialLibrary& lib, const Eigen::VectorXd& x0,
                            const Sampling& sampling, double extend = 1.0, Tolerances tol = {});

/// Duffing beta  {0.005, 0.08, 1, 100}
/// Van der Pol   {0.01, 0.1, 1, 10}
/// Lotka-Volterra{0.05, 0.1, 1, 10}
/// indexed by variant "V1".."V4"; sampled on t = 0:0.01:30.
SystemSpec benchmark_system(const std::string& name, const std::string& variant);

/// Lorenz (sigma 10, beta 8/3, rho 28) on t = 0.001:0.001:10.
SystemSpec lorenz_system(const Eigen::Vector3d& x0);

/// x1, x2 ~ U[-15, 15], x3 ~ U[10, 40] from a seeded stream.
Eigen::Vector3d sample_lorenz_ic(std::uint64_t seed, std::uint64_t stream = 0);

/// Every Table-style variant V1-V4 of the three 2-D systems plus one
/// Lorenz system with a seeded random initial condition.
std::vector<SystemSpec> benchmark_suite(std::uint64_t lorenz_seed = 0);

}  // namespace wsindy
