#include "wsindy/error.hpp"
#include "wsindy/simulator.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace wsindy;

namespace {

// Classic fixed-step RK4, returns the state at every step multiple of `every`.
template <class F>
Eigen::MatrixXd rk4(F f, Eigen::VectorXd x, double h, long steps, long every) {
  Eigen::MatrixXd out(steps / every + 1, x.size());
  out.row(0) = x.transpose();
  for (long n = 1; n <= steps; ++n) {
    const Eigen::VectorXd k1 = f(x);
    const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (n % every == 0) out.row(n / every) = x.transpose();
  }
  return out;
}

Eigen::VectorXd duffing_rhs(const Eigen::VectorXd& x) {
  Eigen::VectorXd d(2);
  d << x(1), -0.2 * x(1) - 0.05 * x(0) - x(0) * x(0) * x(0);
  return d;
}

}  // namespace

TEST_CASE("sampling grid") {
  const Sampling s{0.0, 0.0, 30.0, 0.01};
  CHECK(s.count() == 3001);
  CHECK(s.grid()(3000) == doctest::Approx(30.0));
  const Sampling l{0.0, 0.001, 10.0, 0.001};
  CHECK(l.count() == 10000);
  CHECK(l.grid()(0) == 0.001);
}

TEST_CASE("exponential decay") {
  const VectorField f = [](std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
  const TimeSeries ts = integrate(f, Eigen::VectorXd::Ones(1), Sampling{0, 0, 1, 0.01});
  CHECK(ts.size() == 101);
  CHECK(std::fabs(ts.y(100, 0) - std::exp(-1.0)) < 1e-9);
  CHECK(ts.y(0, 0) == 1.0);
}

TEST_CASE("harmonic oscillator returns to its start") {
  const VectorField f = [](std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = -x[0];
  };
  const double T = 2 * std::numbers::pi;
  const TimeSeries ts = integrate(f, Eigen::Vector2d(1, 0), Sampling{0, 0, T, T / 1000});
  CHECK((ts.y.row(1000) - Eigen::RowVector2d(1, 0)).norm() < 1e-8);
  double drift = 0;
  for (Eigen::Index m = 0; m < ts.size(); ++m) drift = std::max(drift, std::fabs(ts.y.row(m).squaredNorm() - 1.0));
  CHECK(drift <= 1e-8);
}

TEST_CASE("Lorenz stays on the attractor") {
  const SystemSpec spec = lorenz_system(Eigen::Vector3d(-8, 7, 27));
  const TimeSeries ts = integrate(spec);
  CHECK(ts.size() == 10000);
  CHECK(ts.t(0) == doctest::Approx(0.001));
  const double zmax = ts.y.col(2).cwiseAbs().maxCoeff();
  CHECK(zmax >= 30);
  CHECK(zmax <= 60);
  auto f = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd d(3);
    d << 10 * (x(1) - x(0)), x(0) * (28 - x(2)) - x(1), x(0) * x(1) - 8.0 / 3.0 * x(2);
    return d;
  };
  const Eigen::MatrixXd ref = rk4(f, Eigen::Vector3d(-8, 7, 27), 1e-4, 100000, 10);
  const double ref_max = ref.col(2).cwiseAbs().maxCoeff();
  CHECK(ref_max >= 30);
  CHECK(ref_max <= 60);
  CHECK(zmax == doctest::Approx(ref_max).epsilon(0.05));
  // the two agree closely before chaos separates them
  CHECK((ts.y.row(999) - ref.row(1000)).norm() < 1e-6);
}

TEST_CASE("blowup is reported with its time") {
  const VectorField f = [](std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
  try {
    integrate(f, Eigen::VectorXd::Ones(1), Sampling{0, 0, 2, 0.01});
    FAIL("expected IntegrationFailure");
  } catch (const IntegrationFailure& e) {
    CHECK(e.time() <= 1.0);
    CHECK(e.time() > 0.9);
  }
  CHECK_THROWS_AS(integrate(f, Eigen::VectorXd::Ones(1), Sampling{0, 0, 0.5, 0.01}, Tolerances{0, 1e-10}), InvalidArgument);
}

TEST_CASE("rms norm") {
  CHECK(rms_norm(Eigen::MatrixXd::Constant(7, 3, 2.0)) == 2.0);
  CHECK(rms_norm(Eigen::RowVector2d(3, 4)) == doctest::Approx(std::sqrt(12.5)));
  const TimeSeries ts = integrate(benchmark_system("duffing", "V3"));
  long double acc = 0;
  for (Eigen::Index i = 0; i < ts.y.size(); ++i) acc += static_cast<long double>(ts.y.data()[i]) * ts.y.data()[i];
  CHECK(rms_norm(ts.y) == doctest::Approx(static_cast<double>(std::sqrt(acc / ts.y.size()))).epsilon(1e-12));
}

TEST_CASE("noise examples") {
  TimeSeries x{TimeSeries::uniform_grid(0, 0.01, 100000), Eigen::MatrixXd::Constant(100000, 1, 2.0)};
  CHECK(add_noise(x, NoiseSpec{0.0, 3}).y == x.y);
  const TimeSeries y = add_noise(x, NoiseSpec{0.1, 3});
  const Eigen::VectorXd e = y.y.col(0) - x.y.col(0);
  const double mean = e.mean();
  const double sd = std::sqrt((e.array() - mean).square().sum() / (e.size() - 1));
  CHECK(sd == doctest::Approx(0.2).epsilon(0.01));
  CHECK(std::fabs(mean) < 0.005);
  CHECK_THROWS_AS(add_noise(x, NoiseSpec{-1, 3}), InvalidArgument);
}

TEST_CASE("benchmark parameters") {
  const SystemSpec d = benchmark_system("duffing", "V3");
  CHECK(d.parameters.at("beta") == 1.0);
  CHECK(d.parameters.at("mu") == 0.2);
  CHECK(d.parameters.at("alpha") == 0.05);
  CHECK(d.x0 == Eigen::Vector2d(0, 2));
  CHECK(benchmark_system("duffing", "V4").parameters.at("beta") == 100.0);
  CHECK(benchmark_system("van_der_pol", "V1").parameters.at("beta") == 0.01);
  CHECK(benchmark_system("lotka_volterra", "V2").parameters.at("beta") == 0.1);

  const SystemSpec lv = benchmark_system("lotka_volterra", "V4");
  const auto lib = TrialLibrary::polynomial(2, 2);
  const Eigen::MatrixXd w = true_weights(lv, lib);
  CHECK(w(lib.index_of(TermSpec::monomial({0, 1})), 1) == -2.0);
  CHECK(w(lib.index_of(TermSpec::monomial({1, 1})), 1) == 10.0);
  CHECK_THROWS_AS(true_weights(d, TrialLibrary::polynomial(2, 2)), InvalidArgument);
  CHECK_THROWS_AS(benchmark_system("rossler", "V1"), InvalidArgument);
  CHECK_THROWS_AS(benchmark_system("duffing", "V5"), InvalidArgument);

  for (std::uint64_t s = 0; s < 200; ++s) {
    const Eigen::Vector3d ic = sample_lorenz_ic(17, s);
    CHECK(std::fabs(ic(0)) <= 15);
    CHECK(std::fabs(ic(1)) <= 15);
    CHECK(ic(2) >= 10);
    CHECK(ic(2) <= 40);
  }
  CHECK(benchmark_suite(1).size() == 13);
}

TEST_CASE("learned model with zero weights stays put") {
  const auto lib = TrialLibrary::polynomial(2, 3);
  const TimeSeries ts = simulate_learned(Eigen::MatrixXd::Zero(lib.size(), 2), lib, Eigen::Vector2d(0.3, -1),
                                         Sampling{0, 0, 5, 0.01});
  for (Eigen::Index m = 0; m < ts.size(); ++m) CHECK(ts.y.row(m) == Eigen::RowVector2d(0.3, -1));
  const TimeSeries ext = simulate_learned(Eigen::MatrixXd::Zero(lib.size(), 2), lib, Eigen::Vector2d(0.3, -1),
                                          Sampling{0, 0, 5, 0.01}, 1.5);
  CHECK(ext.size() == 751);
  CHECK(ext.t(750) == doctest::Approx(7.5));
}

TEST_SUITE("properties") {
  TEST_CASE("tighter tolerances do not move away from the reference") {
    const SystemSpec spec = benchmark_system("duffing", "V3");
    const Eigen::MatrixXd ref = rk4(duffing_rhs, spec.x0, 1e-5, 3000000, 3000000);
    double prev = INFINITY;
    for (double tol : {1e-6, 5e-7, 2.5e-7, 1.25e-7, 6.25e-8}) {
      const TimeSeries ts = integrate(spec, Tolerances{tol, tol});
      const double err = (ts.y.row(3000) - ref.row(1)).norm();
      CHECK(err <= 10 * prev);
      prev = std::min(prev, err);
    }
  }

  TEST_CASE("noise reproducibility and independence") {
    TimeSeries x{TimeSeries::uniform_grid(0, 0.01, 10000), Eigen::MatrixXd::Constant(10000, 1, 1.0)};
    const TimeSeries a = add_noise(x, NoiseSpec{0.5, 42});
    const TimeSeries b = add_noise(x, NoiseSpec{0.5, 42});
    CHECK(a.y == b.y);
    for (auto [seed, stream] : {std::array<std::uint64_t, 2>{43, 0}, {42, 1}, {0, 0}}) {
      const TimeSeries c = add_noise(x, NoiseSpec{0.5, seed}, stream);
      const Eigen::VectorXd u = a.y.col(0).array() - 1, v = c.y.col(0).array() - 1;
      const Eigen::VectorXd uc = u.array() - u.mean(), vc = v.array() - v.mean();
      CHECK(std::fabs(uc.dot(vc) / (uc.norm() * vc.norm())) <= 0.02);
    }
  }

  TEST_CASE("learned model with the true weights matches native integration") {
    std::vector<SystemSpec> specs = {benchmark_system("duffing", "V3"), benchmark_system("van_der_pol", "V3"),
                                     benchmark_system("lotka_volterra", "V3"), lorenz_system(Eigen::Vector3d(-8, 7, 27))};
    for (auto& spec : specs) {
      const auto lib = TrialLibrary::polynomial(spec.dim(), 3);
      const TimeSeries native = integrate(spec);
      const TimeSeries learned = simulate_learned(true_weights(spec, lib), lib, spec.x0, spec.sampling);
      CHECK(learned.t == native.t);
      CHECK((learned.y - native.y).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}
