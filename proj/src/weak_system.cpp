#include "wsindy/weak_system.hpp"

#include "wsindy/error.hpp"
#include "wsindy/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsindy {

namespace {

std::span<const double> row_segment(const RowMatrix& m, Eigen::Index row, Eigen::Index first, Eigen::Index len) {
  return {m.data() + row * m.cols() + first, static_cast<std::size_t>(len)};
}

std::span<const double> col_segment(const Eigen::MatrixXd& m, Eigen::Index col, Eigen::Index first, Eigen::Index len) {
  return {m.data() + col * m.rows() + first, static_cast<std::size_t>(len)};
}

}  // namespace

void TimeSeries::validate() const {
  const Eigen::Index m = t.size();
  if (m < 2) throw InvalidArgument("time series needs at least 2 samples");
  if (y.rows() != m) throw InvalidArgument("time series has " + std::to_string(m) + " timestamps but " + std::to_string(y.rows()) + " rows");
  if (y.cols() < 1) throw InvalidArgument("time series has no state columns");
  if (!t.allFinite() || !y.allFinite()) throw InvalidArgument("time series contains non-finite values");
  const double h = dt();
  if (!(h > 0.0)) throw InvalidArgument("timestamps must be strictly increasing");
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    if (std::abs((t(i + 1) - t(i)) - h) > 1e-12 * h + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t(i + 1)))
      throw InvalidArgument("timestamps are not uniformly spaced near index " + std::to_string(i));
  }
}

Eigen::VectorXd TimeSeries::uniform_grid(double t0, double dt, Eigen::Index m) {
  Eigen::VectorXd t(m);
  for (Eigen::Index i = 0; i < m; ++i) t(i) = t0 + static_cast<double>(i) * dt;
  return t;
}

Quadrature build_quadrature(const std::vector<TestFunction>& basis, const Eigen::VectorXd& t) {
  const Eigen::Index m = t.size();
  const auto k = static_cast<Eigen::Index>(basis.size());
  Quadrature q;
  q.V = RowMatrix::Zero(k, m);
  q.Vp = RowMatrix::Zero(k, m);
  q.support.resize(basis.size());
  if (m < 2) {
    if (k > 0) throw InvalidArgument("time grid needs at least 2 points");
    return q;
  }
  const double t0 = t(0);
  const double dt = (t(m - 1) - t0) / static_cast<double>(m - 1);
  const double slack = 1e-9 * dt;
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& phi = basis[static_cast<std::size_t>(r)];
    if (phi.a() < t0 - slack || phi.b() > t(m - 1) + slack)
      throw InvalidArgument("test function support [" + std::to_string(phi.a()) + ", " + std::to_string(phi.b()) + "] exceeds the time grid");
    const auto first = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((phi.a() - t0) / dt)), 0, m - 1);
    const auto last = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil((phi.b() - t0) / dt)) + 1, first, m);
    q.support[static_cast<std::size_t>(r)] = {first, last};
    for (Eigen::Index i = first; i < last; ++i) {
      q.V(r, i) = dt * phi.eval(t(i));
      q.Vp(r, i) = dt * phi.eval_deriv(t(i));
    }
  }
  return q;
}

Eigen::MatrixXd covariance(const Quadrature& quad) {
  const Eigen::Index k = quad.Vp.rows();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& si = quad.support[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i; j < k; ++j) {
      const auto& sj = quad.support[static_cast<std::size_t>(j)];
      const Eigen::Index lo = std::max(si.first, sj.first);
      const Eigen::Index hi = std::min(si.last, sj.last);
      if (hi <= lo) continue;
      const double v = kernels::dot(row_segment(quad.Vp, i, lo, hi - lo), row_segment(quad.Vp, j, lo, hi - lo));
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  return sigma;
}

WeakSystem assemble(const std::vector<TestFunction>& basis, const Eigen::MatrixXd& theta, const TimeSeries& data) {
  if (basis.empty()) throw InvalidArgument("test function basis is empty");
  data.validate();
  if (theta.rows() != data.size()) throw InvalidArgument("Theta row count does not match the data");
  WeakSystem ws;
  ws.basis = basis;
  ws.quad = build_quadrature(basis, data.t);
  const Eigen::Index k = ws.quad.V.rows();
  const Eigen::Index nj = theta.cols();
  const Eigen::Index nd = data.dim();
  ws.G.resize(k, nj);
  ws.b.resize(k, nd);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& s = ws.quad.support[static_cast<std::size_t>(r)];
    const auto v = row_segment(ws.quad.V, r, s.first, s.size());
    const auto vp = row_segment(ws.quad.Vp, r, s.first, s.size());
    for (Eigen::Index j = 0; j < nj; ++j) ws.G(r, j) = kernels::dot(v, col_segment(theta, j, s.first, s.size()));
    for (Eigen::Index d = 0; d < nd; ++d) ws.b(r, d) = -kernels::dot(vp, col_segment(data.y, d, s.first, s.size()));
  }
  ws.Sigma = covariance(ws.quad);
  return ws;
}

WeakSystem assemble(const std::vector<TestFunction>& basis, const TrialLibrary& lib, const TimeSeries& data) {
  data.validate();
  return assemble(basis, lib.evaluate(data.y), data);
}

Eigen::MatrixXd residual(const WeakSystem& ws, const Eigen::MatrixXd& w) {
  if (w.rows() != ws.J() || w.cols() != ws.D())
    throw InvalidArgument("weight matrix is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) + ", expected " +
                          std::to_string(ws.J()) + "x" + std::to_string(ws.D()));
  return ws.G * w - ws.b;
}

nlohmann::json WeakSystem::diagnostics() const {
  nlohmann::json j;
  j["K"] = K();
  j["J"] = J();
  j["D"] = D();
  j["M"] = quad.V.cols();
  j["b_norm"] = b.norm();
  if (!basis.empty()) {
    double pmin = basis.front().p(), pmax = pmin, rho_min = 0, rho_max = 0;
    bool first = true;
    for (const auto& phi : basis) {
      pmin = std::min(pmin, phi.p());
      pmax = std::max(pmax, phi.p());
      if (phi.p() == phi.q()) {
        const double rho = sup_ratio(phi);
        rho_min = first ? rho : std::min(rho_min, rho);
        rho_max = first ? rho : std::max(rho_max, rho);
        first = false;
      }
    }
    j["p_min"] = pmin;
    j["p_max"] = pmax;
    j["support_width"] = basis.front().width();
    if (!first) {
      j["rho_min"] = rho_min;
      j["rho_max"] = rho_max;
    }
  }
  return j;
}

Eigen::MatrixXd Whitener::whiten(const Eigen::MatrixXd& x) const {
  return L.triangularView<Eigen::Lower>().solve(x);
}

Whitener cholesky_whitener(const Eigen::MatrixXd& Sigma) {
  if (Sigma.rows() != Sigma.cols()) throw InvalidArgument("covariance must be square");
  const Eigen::Index k = Sigma.rows();
  if (k == 0) return {Eigen::MatrixXd(0, 0), 0.0};
  const double scale = Sigma.trace() / static_cast<double>(k);
  double jitter = 0.0;
  for (int step = 0;; ++step) {
    if (step > 0) jitter = scale * std::pow(10.0, -12.0 + 2.0 * (step - 1));
    if (step > 6) break;
    Eigen::MatrixXd shifted = Sigma;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd L = llt.matrixL();
    const Eigen::VectorXd diag = L.diagonal();
    // LLT accepts pivots that are positive but swamped by rounding; treat
    // those as failures too.
    if (diag.minCoeff() <= std::sqrt(scale) * 1e-9) continue;
    return {std::move(L), jitter};
  }
  throw NumericalError("covariance factorization failed even with jitter; reduce test function overlap");
}

}  // namespace wsindy
