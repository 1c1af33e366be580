#pragma once

#include "wsindy/test_function.hpp"
#include "wsindy/time_series.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace wsindy {

struct AdaptiveGridConfig {
  int p_deriv = 2;   // degree of the differentiating test function
  int s_deriv = 16;  // its support, in timepoints
  int K = 1;         // total number of test functions requested
  int r_whm = 30;    // centre to half-maximum distance, in timepoints

  void validate() const;
};

/// Convolution estimate of y'. Each row m applies the stencil -phi'(t_j)
/// of a degree-p_deriv test function spanning s_deriv timepoints centred at
/// t_m, normalized so that ramps are differentiated exactly. Near the
/// ends the stencil is truncated and renormalized the same way.
/// Constant columns give exactly zero.
Eigen::MatrixXd weak_derivative(const TimeSeries& data, int p_deriv, int s_deriv);

/// Normalized cumulative sum of |v|; last entry is 1. Throws FlatChannel
/// when v is identically zero.
Eigen::VectorXd tv_cdf(const Eigen::VectorXd& v);

/// Index form of c_k = min{t_m : psi_m >= k/K}, k = 0..K-1.
std::vector<Eigen::Index> sample_center_indices(const Eigen::VectorXd& psi, int K);
std::vector<double> sample_centers(const Eigen::VectorXd& psi, const Eigen::VectorXd& t, int K);

/// Shape of the symmetric test function whose half maximum sits r_whm
/// points from its centre and whose last interior point is <= 1e-16.
struct WhmShape {
  double p_root = 0.0;    // real solution of the two-condition system
  int p = 0;              // ceil(p_root)
  int half_width = 0;     // support half-width in timepoints
};

/// Throws NumericalError if no root exists for p in [1, 512].
WhmShape solve_whm_shape(int r_whm);

/// The shape above centred at `center` on a grid of step dt.
TestFunction solve_testfn_from_whm(double center, int r_whm, double dt);

struct AdaptiveBasis {
  std::vector<TestFunction> basis;         // deduplicated, ordered by centre
  WhmShape shape;
  std::vector<std::vector<Eigen::Index>> centers_per_dim;  // raw samples before clipping
  Eigen::MatrixXd v;                       // weak derivative
  std::vector<std::optional<Eigen::VectorXd>> psi;  // empty for flat channels
};

/// Splits K across non-flat coordinates (remainder to the first ones),
/// samples centres from each coordinate's psi, shifts centres inward so
/// every support fits, and drops duplicate centres.
AdaptiveBasis build_adaptive_basis(const TimeSeries& data, const AdaptiveGridConfig& cfg);

}  // namespace wsindy
