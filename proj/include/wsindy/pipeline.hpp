#pragma once

#include "wsindy/grid_adaptive.hpp"
#include "wsindy/grid_uniform.hpp"
#include "wsindy/sparse_solver.hpp"
#include "wsindy/trial_library.hpp"
#include "wsindy/weak_system.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wsindy {

/// K = J equispaced functions of fixed degree, so G is square.
struct SquareGridConfig {
  int p = 16;
  std::optional<int> L_override;
};

using GridConfig = std::variant<UniformGridConfig, AdaptiveGridConfig, SquareGridConfig>;

struct Identification {
  WeightMatrix model;
  WeakSystem system;
  double jitter = 0.0;
  nlohmann::json grid;  // grid-specific parameters (L, p, spacing, r_whm shape, ...)
  std::vector<std::string> warnings;

  /// Residual norms, dimensions, grid parameters and solver status.
  nlohmann::json report() const;
};

/// Builds the test basis, assembles the weak system and runs the
/// thresholded GLS solve.
Identification identify(const TimeSeries& data, const TrialLibrary& lib, const GridConfig& grid, const SolverConfig& solver);

std::vector<TestFunction> build_basis(const TimeSeries& data, const TrialLibrary& lib, const GridConfig& grid,
                                      nlohmann::json* info = nullptr, std::vector<std::string>* warnings = nullptr);

}  // namespace wsindy
