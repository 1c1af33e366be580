#pragma once

#include <Eigen/Dense>

namespace wsindy {

/// Uniformly sampled trajectory: t (M) and observations y (M x D).
struct TimeSeries {
  Eigen::VectorXd t;
  Eigen::MatrixXd y;

  Eigen::Index size() const noexcept { return t.size(); }
  Eigen::Index dim() const noexcept { return y.cols(); }
  double dt() const { return t.size() > 1 ? (t(t.size() - 1) - t(0)) / static_cast<double>(t.size() - 1) : 0.0; }

  /// Throws InvalidArgument unless M >= 2, rows agree, t is uniform to
  /// 1e-12 relative spacing and every value is finite.
  void validate() const;

  /// Uniform grid t0, t0 + dt, ..., with m samples.
  static Eigen::VectorXd uniform_grid(double t0, double dt, Eigen::Index m);
};

}  // namespace wsindy
