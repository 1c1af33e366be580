#pragma once

#include "wsindy/trial_library.hpp"
#include "wsindy/weak_system.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace wsindy {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct SolverConfig {
  double lambda = 0.0;             // threshold in physical weight units
  double gamma = 0.0;              // ridge coefficient; penalty is gamma^2 ||w||^2
  bool normalize_columns = false;  // scale G columns to unit 2-norm before solving
  int max_iterations = 25;

  void validate() const;
};

struct WeightMatrix {
  Eigen::MatrixXd w;     // J x D
  BoolMatrix support;    // J x D
  int iterations = 0;    // max over output dimensions
  bool converged = false;
  bool rank_deficient = false;  // last solve was numerically rank deficient

  nlohmann::json to_json(const TrialLibrary& lib) const;
};

/// Ridge-regularized generalized least squares restricted, per output
/// dimension d, to the rows of `active.col(d)`:
///
///     min_w || L^{-1} (G w - b_d) ||^2 + gamma^2 ||w||^2
///
/// Inactive entries are exactly zero. Numerically rank-deficient systems
/// return the minimum-norm solution. Throws SingularSystem when gamma == 0
/// and the system is structurally singular (more active terms than rows,
/// or an identically zero column).
Eigen::MatrixXd gls_solve(const Eigen::MatrixXd& G, const Eigen::MatrixXd& b, const Whitener& whitener, double gamma,
                          const BoolMatrix& active);

/// Sequentially thresholded GLS. Each output dimension keeps its own
/// active set; entries with |w| < lambda are dropped and the remainder
/// re-solved until the set stops changing.
WeightMatrix sequential_threshold(const WeakSystem& ws, const SolverConfig& cfg);
WeightMatrix sequential_threshold(const WeakSystem& ws, const Whitener& whitener, const SolverConfig& cfg);

/// Quarter of the smallest nonzero |w_star|.
double default_lambda(const Eigen::MatrixXd& w_star);

}  // namespace wsindy
