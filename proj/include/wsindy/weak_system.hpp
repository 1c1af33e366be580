#pragma once

#include "wsindy/test_function.hpp"
#include "wsindy/time_series.hpp"
#include "wsindy/trial_library.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <vector>

namespace wsindy {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Index range [first, last) of grid points where a test function is nonzero.
struct SupportRange {
  Eigen::Index first = 0;
  Eigen::Index last = 0;
  Eigen::Index size() const noexcept { return last - first; }
};

/// V_km = dt phi_k(t_m), Vp_km = dt phi_k'(t_m). Rows are stored
/// contiguously and are zero outside `support[k]`.
struct Quadrature {
  RowMatrix V;
  RowMatrix Vp;
  std::vector<SupportRange> support;
};

/// Throws InvalidArgument when a support leaves [t_1, t_M] (beyond
/// 1e-9 dt of slack) or the grid is not uniform.
Quadrature build_quadrature(const std::vector<TestFunction>& basis, const Eigen::VectorXd& t);

struct WeakSystem {
  Quadrature quad;
  Eigen::MatrixXd G;      // K x J
  Eigen::MatrixXd b;      // K x D
  Eigen::MatrixXd Sigma;  // K x K
  std::vector<TestFunction> basis;

  Eigen::Index K() const noexcept { return G.rows(); }
  Eigen::Index J() const noexcept { return G.cols(); }
  Eigen::Index D() const noexcept { return b.cols(); }

  nlohmann::json diagnostics() const;
};

/// Sigma = Vp Vp^T using only overlapping support ranges.
Eigen::MatrixXd covariance(const Quadrature& quad);

/// G = V Theta, b = -Vp y, Sigma = Vp Vp^T. Throws InvalidArgument on an
/// empty basis or invalid data.
WeakSystem assemble(const std::vector<TestFunction>& basis, const TrialLibrary& lib, const TimeSeries& data);

/// Same, from a precomputed Theta(y).
WeakSystem assemble(const std::vector<TestFunction>& basis, const Eigen::MatrixXd& theta, const TimeSeries& data);

/// G w - b. Throws InvalidArgument on shape mismatch.
Eigen::MatrixXd residual(const WeakSystem& ws, const Eigen::MatrixXd& w);

/// Lower-triangular factor of Sigma + jitter I.
struct Whitener {
  Eigen::MatrixXd L;
  double jitter = 0.0;

  /// L^{-1} X
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& x) const;
};

/// Cholesky with a jitter ladder {0, 1e-12, 1e-10, ..., 1e-2} * trace/K.
/// Throws NumericalError if even the largest jitter fails.
Whitener cholesky_whitener(const Eigen::MatrixXd& Sigma);

}  // namespace wsindy
