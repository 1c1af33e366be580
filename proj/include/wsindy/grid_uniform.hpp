#pragma once

#include "wsindy/test_function.hpp"
#include "wsindy/time_series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wsindy {

// Throughout, a test function "supported on L timepoints" has both
// endpoints on the grid and spans (L - 1) dt.

struct UniformGridConfig {
  double rho = 1.0;                  // target ||phi'||_inf / ||phi||_inf, 1/time
  double s = 0.5;                    // intersection height of neighbours, in (0, 1)
  std::optional<int> L_override;     // support size in timepoints

  void validate() const;
};

struct UniformBasis {
  std::vector<TestFunction> basis;
  int L = 0;                 // support size in timepoints
  int p = 0;
  double spacing = 0.0;      // left-endpoint spacing in timepoints (before rounding)
  std::vector<std::string> warnings;
};

/// L = round(M / (2 n*)) where n* maximizes the summed magnitude spectrum
/// of the mean-removed columns over modes 1..M/2; clamped to [4, M-1].
/// Throws NumericalError if every column is constant.
int dominant_mode_support(const TimeSeries& data);

/// ceil(rho^2 width^2 / 2.8), at least 1.
int degree_from_rho(double rho, double support_width);

/// Translates copies of one symmetric test function across the record with
/// left endpoints a_k = t_1 + round((k-1) L sqrt(1 - s^(1/p))) dt.
UniformBasis build_uniform_basis(const TimeSeries& data, const UniformGridConfig& cfg);

/// Exactly J equispaced functions of degree p spanning the record, left
/// endpoints round((k-1)(M-L)/(J-1)) points apart. Throws InvalidArgument
/// when they cannot be placed at distinct grid points.
UniformBasis basis_for_square_system(const TimeSeries& data, int J, int p, std::optional<int> L_override = {});

}  // namespace wsindy
