#include "wsindy/sparse_solver.hpp"

#include "wsindy/error.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace wsindy {

void SolverConfig::validate() const {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
}

namespace {

struct ColumnSolve {
  Eigen::VectorXd w;
  bool rank_deficient = false;
};

// Solves one output dimension on pre-whitened data. Near-singular systems get
// the minimum-norm solution on the numerical range; only structurally
// singular ones (more unknowns than rows, or a zero column) are rejected.
ColumnSolve solve_column(const Eigen::MatrixXd& gw, const Eigen::VectorXd& bw, double gamma,
                         const std::vector<Eigen::Index>& cols) {
  const auto n = static_cast<Eigen::Index>(cols.size());
  const Eigen::Index k = gw.rows();
  const Eigen::Index rows = gamma > 0.0 ? k + n : k;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index c = 0; c < n; ++c) a.col(c).head(k) = gw.col(cols[static_cast<std::size_t>(c)]);
  rhs.head(k) = bw;
  if (gamma > 0.0) {
    a.bottomRows(n).diagonal().setConstant(gamma);
  } else {
    if (n > k)
      throw SingularSystem("system has " + std::to_string(n) + " active terms but only " + std::to_string(k) +
                           " test functions; increase gamma or add test functions");
    for (Eigen::Index c = 0; c < n; ++c)
      if (a.col(c).cwiseAbs().maxCoeff() == 0.0)
        throw SingularSystem("library column " + std::to_string(cols[static_cast<std::size_t>(c)]) +
                             " vanishes on every test function; increase gamma or change the basis");
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  return {cod.solve(rhs), cod.rank() < n};
}

}  // namespace

Eigen::MatrixXd gls_solve(const Eigen::MatrixXd& G, const Eigen::MatrixXd& b, const Whitener& whitener, double gamma,
                          const BoolMatrix& active) {
  if (b.rows() != G.rows()) throw InvalidArgument("G and b row counts differ");
  if (active.rows() != G.cols() || active.cols() != b.cols()) throw InvalidArgument("active mask shape mismatch");
  if (whitener.L.rows() != G.rows()) throw InvalidArgument("whitener size does not match G");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  const Eigen::MatrixXd gw = whitener.whiten(G);
  const Eigen::MatrixXd bw = whitener.whiten(b);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(G.cols(), b.cols());
  for (Eigen::Index d = 0; d < b.cols(); ++d) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < G.cols(); ++j)
      if (active(j, d)) cols.push_back(j);
    if (cols.empty()) continue;
    const Eigen::VectorXd sol = solve_column(gw, bw.col(d), gamma, cols).w;
    for (std::size_t c = 0; c < cols.size(); ++c) w(cols[c], d) = sol(static_cast<Eigen::Index>(c));
  }
  return w;
}

WeightMatrix sequential_threshold(const WeakSystem& ws, const SolverConfig& cfg) {
  return sequential_threshold(ws, cholesky_whitener(ws.Sigma), cfg);
}

WeightMatrix sequential_threshold(const WeakSystem& ws, const Whitener& whitener, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index nj = ws.J();
  const Eigen::Index nd = ws.D();

  Eigen::MatrixXd G = ws.G;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(nj);
  if (cfg.normalize_columns) {
    for (Eigen::Index j = 0; j < nj; ++j) {
      const double n = G.col(j).norm();
      if (n > 0.0) scale(j) = 1.0 / n;
    }
    G = G * scale.asDiagonal();
  }
  const Eigen::MatrixXd gw = whitener.whiten(G);
  const Eigen::MatrixXd bw = whitener.whiten(ws.b);

  WeightMatrix out;
  out.w = Eigen::MatrixXd::Zero(nj, nd);
  out.support = BoolMatrix::Constant(nj, nd, false);
  out.converged = true;

  for (Eigen::Index d = 0; d < nd; ++d) {
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(nj));
    for (Eigen::Index j = 0; j < nj; ++j) cols[static_cast<std::size_t>(j)] = j;
    Eigen::VectorXd w_d = Eigen::VectorXd::Zero(nj);
    bool converged = false;
    bool rank_deficient = false;
    int iter = 0;
    while (iter < cfg.max_iterations) {
      ++iter;
      const ColumnSolve solved = solve_column(gw, bw.col(d), cfg.gamma, cols);
      const Eigen::VectorXd& sol = solved.w;
      rank_deficient = solved.rank_deficient;
      w_d.setZero();
      std::vector<Eigen::Index> kept;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double v = sol(static_cast<Eigen::Index>(c)) * scale(cols[c]);
        w_d(cols[c]) = v;
        if (std::abs(v) >= cfg.lambda) kept.push_back(cols[c]);
      }
      if (kept.size() == cols.size()) {
        converged = true;
        break;
      }
      cols = std::move(kept);
      if (cols.empty()) {
        w_d.setZero();
        break;
      }
    }
    if (!converged && !cols.empty()) {
      // hit the iteration cap; report the last solve restricted to the kept set
      Eigen::VectorXd masked = Eigen::VectorXd::Zero(nj);
      for (auto j : cols) masked(j) = w_d(j);
      w_d = masked;
    }
    out.w.col(d) = w_d;
    for (auto j : cols) out.support(j, d) = w_d(j) != 0.0;
    out.iterations = std::max(out.iterations, iter);
    out.converged = out.converged && converged;
    out.rank_deficient = out.rank_deficient || rank_deficient;
  }
  return out;
}

double default_lambda(const Eigen::MatrixXd& w_star) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < w_star.size(); ++i) {
    const double v = std::abs(w_star.data()[i]);
    if (v > 0.0) best = std::min(best, v);
  }
  if (!std::isfinite(best)) throw InvalidArgument("reference weights are all zero");
  return best / 4.0;
}

nlohmann::json WeightMatrix::to_json(const TrialLibrary& lib) const {
  nlohmann::json eqs = nlohmann::json::array();
  for (Eigen::Index d = 0; d < w.cols(); ++d) {
    nlohmann::json terms = nlohmann::json::array();
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
      if (w(j, d) == 0.0) continue;
      terms.push_back({{"index", j}, {"term", lib.terms()[static_cast<std::size_t>(j)].label()}, {"coefficient", w(j, d)}});
    }
    eqs.push_back({{"dimension", d}, {"lhs", "dx" + std::to_string(d + 1) + "/dt"}, {"terms", terms}});
  }
  nlohmann::json dense = nlohmann::json::array();
  for (Eigen::Index j = 0; j < w.rows(); ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < w.cols(); ++d) row.push_back(w(j, d));
    dense.push_back(row);
  }
  return {{"equations", eqs}, {"weights", dense}, {"iterations", iterations}, {"converged", converged},
          {"rank_deficient", rank_deficient}};
}

}  // namespace wsindy
