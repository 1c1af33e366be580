#include "wsindy/error.hpp"
#include "wsindy/simulator.hpp"
#include "wsindy/weak_system.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wsindy;

namespace {

TimeSeries duffing_v3() {
  static const TimeSeries ts = integrate(benchmark_system("duffing", "V3"));
  return ts;
}

// Equal-width symmetric functions with grid-aligned endpoints.
std::vector<TestFunction> tiled_basis(const Eigen::VectorXd& t, double p, int width_pts, int step_pts) {
  const double dt = t(1) - t(0);
  std::vector<TestFunction> basis;
  for (Eigen::Index a = 0; a + width_pts < t.size(); a += step_pts)
    basis.push_back(TestFunction::symmetric(p, t(a), t(a) + width_pts * dt));
  return basis;
}

// Least-squares residual norm relative to |b|.
double min_relative_residual(const WeakSystem& ws) {
  const Eigen::MatrixXd w = ws.G.colPivHouseholderQr().solve(ws.b);
  return (ws.G * w - ws.b).norm() / ws.b.norm();
}

}  // namespace

TEST_CASE("time series validation") {
  TimeSeries ts{TimeSeries::uniform_grid(0, 0.1, 5), Eigen::MatrixXd::Zero(5, 1)};
  CHECK_NOTHROW(ts.validate());
  ts.t(3) += 1e-6;
  CHECK_THROWS_AS(ts.validate(), InvalidArgument);
  TimeSeries short_ts{TimeSeries::uniform_grid(0, 0.1, 1), Eigen::MatrixXd::Zero(1, 1)};
  CHECK_THROWS_AS(short_ts.validate(), InvalidArgument);
}

TEST_CASE("quadrature examples") {
  const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 101);
  const Quadrature q = build_quadrature({TestFunction::symmetric(2, 0, 1)}, t);
  CHECK(std::fabs(q.Vp.row(0).sum()) < 1e-14);
  // C (b-a)^(2p+1) B(p+1, p+1) with C = 4, p = 1 gives 2/3
  const Quadrature q1 = build_quadrature({TestFunction::symmetric(1, 0, 1)}, t);
  CHECK(q1.V.row(0).sum() == doctest::Approx(4.0 * std::tgamma(2) * std::tgamma(2) / std::tgamma(4)).epsilon(1e-4));
  const Quadrature empty = build_quadrature({}, t);
  CHECK(empty.V.rows() == 0);
  CHECK(empty.V.cols() == 101);
  CHECK(empty.Vp.rows() == 0);
  CHECK_THROWS_AS(build_quadrature({TestFunction::symmetric(2, -0.5, 0.5)}, t), InvalidArgument);
  CHECK_THROWS_AS(build_quadrature({TestFunction::symmetric(2, 0.5, 1.5)}, t), InvalidArgument);
}

TEST_CASE("quadrature rows are zero outside the support") {
  const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 301);
  const auto basis = tiled_basis(t, 4, 60, 25);
  const Quadrature q = build_quadrature(basis, t);
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (Eigen::Index m = 0; m < t.size(); ++m) {
      const bool inside = t(m) > basis[k].a() && t(m) < basis[k].b();
      if (!inside) {
        CHECK(q.V(static_cast<Eigen::Index>(k), m) == 0.0);
        CHECK(q.Vp(static_cast<Eigen::Index>(k), m) == 0.0);
      }
      const auto& r = q.support[k];
      if (m < r.first || m >= r.last) CHECK(q.V(static_cast<Eigen::Index>(k), m) == 0.0);
    }
}

TEST_CASE("assembly examples") {
  const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 401);
  const auto basis = tiled_basis(t, 3, 80, 40);
  const auto lib = TrialLibrary::polynomial(1, 2);

  TimeSeries flat{t, Eigen::MatrixXd::Constant(401, 1, 3.7)};
  const WeakSystem ws = assemble(basis, lib, flat);
  CHECK(ws.b.cwiseAbs().maxCoeff() < 1e-13);

  const TestFunction one = TestFunction::symmetric(2, 1.0, 2.0);
  const TrialLibrary constant(1, {TermSpec::monomial({0})});
  const WeakSystem single = assemble({one}, constant, flat);
  double direct = 0;
  for (Eigen::Index m = 0; m < t.size(); ++m) direct += 0.01 * one.eval(t(m));
  CHECK(single.G.rows() == 1);
  CHECK(single.G(0, 0) == doctest::Approx(direct).epsilon(1e-14));

  CHECK_THROWS_AS(assemble({}, lib, flat), InvalidArgument);
}

TEST_CASE("residual examples") {
  const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 401);
  TimeSeries ts{t, t.array().sin().matrix()};
  const WeakSystem ws = assemble(tiled_basis(t, 3, 80, 40), TrialLibrary::polynomial(1, 2), ts);
  CHECK(residual(ws, Eigen::MatrixXd::Zero(3, 1)) == -ws.b);
  CHECK_THROWS_AS(residual(ws, Eigen::MatrixXd::Zero(2, 1)), InvalidArgument);

  WeakSystem id;
  id.G = Eigen::MatrixXd::Identity(3, 3);
  id.b = Eigen::MatrixXd::Random(3, 2);
  CHECK(residual(id, id.b).isZero(0));
}

TEST_CASE("noise-free Duffing residual at the true weights") {
  const TimeSeries ts = duffing_v3();
  const auto lib = TrialLibrary::polynomial(2, 5);
  const auto spec = benchmark_system("duffing", "V3");
  const WeakSystem ws = assemble(tiled_basis(ts.t, 16, 200, 100), lib, ts);
  const Eigen::MatrixXd r = residual(ws, true_weights(spec, lib));
  CHECK(r.norm() <= 1e-6 * ws.b.norm());
}

TEST_CASE("whitener examples") {
  const Whitener eye = cholesky_whitener(Eigen::MatrixXd::Identity(4, 4));
  CHECK(eye.L.isIdentity(0));
  CHECK(eye.jitter == 0.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d.diagonal() << 4, 9;
  const Whitener w = cholesky_whitener(d);
  CHECK(w.L(0, 0) == 2.0);
  CHECK(w.L(1, 1) == 3.0);
  CHECK(w.L(1, 0) == 0.0);
  CHECK_THROWS_AS(cholesky_whitener(Eigen::MatrixXd::Zero(2, 3)), InvalidArgument);

  // 50 heavily overlapping functions
  const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 1401);
  const int width = 200;
  const int step = static_cast<int>(std::lround(width * std::sqrt(1 - std::pow(0.9, 1.0 / 8))));
  auto basis = tiled_basis(t, 8, width, step);
  REQUIRE(basis.size() >= 50);
  basis.erase(basis.begin() + 50, basis.end());
  const Quadrature q = build_quadrature(basis, t);
  const Eigen::MatrixXd sigma = covariance(q);
  const Whitener c = cholesky_whitener(sigma);
  Eigen::MatrixXd target = sigma;
  target.diagonal().array() += c.jitter;
  CHECK((c.L * c.L.transpose() - target).norm() <= 1e-10 * target.norm());
  CHECK(c.L.isLowerTriangular());
}

TEST_CASE("jitter ladder rescues a singular covariance") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Ones(3, 3);
  const Whitener w = cholesky_whitener(s);
  CHECK(w.jitter > 0.0);
  s.diagonal().array() += w.jitter;
  CHECK((w.L * w.L.transpose() - s).norm() <= 1e-12 * s.norm());
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 2);
  CHECK((w.L * w.whiten(x) - x).norm() < 1e-8 * x.norm());
}

TEST_SUITE("properties") {
  TEST_CASE("covariance equals Vp Vp^T") {
    const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 701);
    for (int step : {7, 30, 90}) {
      const Quadrature q = build_quadrature(tiled_basis(t, 5, 120, step), t);
      const Eigen::MatrixXd dense = Eigen::MatrixXd(q.Vp) * Eigen::MatrixXd(q.Vp).transpose();
      const Eigen::MatrixXd sigma = covariance(q);
      CHECK((sigma - dense).cwiseAbs().maxCoeff() <= 1e-15 * dense.cwiseAbs().maxCoeff() * 8);
      CHECK(sigma == sigma.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
      CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());
    }
  }

  TEST_CASE("covariance ignores the data") {
    const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 301);
    const auto basis = tiled_basis(t, 4, 50, 20);
    const auto lib = TrialLibrary::polynomial(2, 2);
    Eigen::MatrixXd y(301, 2);
    y.col(0) = t.array().sin();
    y.col(1) = t.array().cos();
    Eigen::MatrixXd swapped(301, 2);
    swapped << y.col(1), y.col(0);
    const WeakSystem a = assemble(basis, lib, TimeSeries{t, y});
    const WeakSystem b = assemble(basis, lib, TimeSeries{t, swapped});
    CHECK(a.Sigma == b.Sigma);
    CHECK(a.b.col(0) == b.b.col(1));
  }

  TEST_CASE("G is linear in Theta") {
    const Eigen::VectorXd t = TimeSeries::uniform_grid(0, 0.01, 301);
    const auto basis = tiled_basis(t, 4, 50, 20);
    Eigen::MatrixXd y(301, 2);
    y.col(0) = t.array().sin();
    y.col(1) = (0.5 * t).array().cos();
    const TimeSeries ts{t, y};
    const TrialLibrary l1(2, {TermSpec::monomial({1, 0}), TermSpec::monomial({2, 1})});
    const TrialLibrary l2(2, {TermSpec::sine(1, 1), TermSpec::monomial({0, 0})});
    const TrialLibrary both(2, {TermSpec::monomial({1, 0}), TermSpec::monomial({2, 1}), TermSpec::sine(1, 1),
                                TermSpec::monomial({0, 0})});
    const WeakSystem a = assemble(basis, l1, ts);
    const WeakSystem b = assemble(basis, l2, ts);
    const WeakSystem c = assemble(basis, both, ts);
    Eigen::MatrixXd cat(a.K(), 4);
    cat << a.G, b.G;
    CHECK((c.G - cat).cwiseAbs().maxCoeff() <= 1e-15 * cat.cwiseAbs().maxCoeff());

    const Eigen::MatrixXd theta = both.evaluate(y);
    const WeakSystem d = assemble(basis, 2.5 * theta, ts);
    CHECK((d.G - 2.5 * c.G).cwiseAbs().maxCoeff() <= 1e-14 * c.G.cwiseAbs().maxCoeff());
  }

  TEST_CASE("least-squares residual falls with degree") {
    const TimeSeries ts = duffing_v3();
    const auto lib = TrialLibrary::polynomial(2, 5);
    double prev = INFINITY;
    for (int p : {2, 4, 8, 16}) {
      // falls until it reaches the integrator's accuracy
      const double r = min_relative_residual(assemble(tiled_basis(ts.t, p, 200, 50), lib, ts));
      CHECK(r < std::max(prev, 1e-10));
      prev = r;
    }
  }
}
