#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>

namespace wsindy {

struct SupportMetrics {
  bool exact = false;
  int false_positives = 0;
  int false_negatives = 0;
};

struct RecoveryReport {
  double coeff_error = 0.0;
  std::optional<double> traj_error;
  bool support_exact = false;
  int false_positives = 0;
  int false_negatives = 0;
  double residual_norm = 0.0;
  Eigen::VectorXd coeff_error_per_dim;

  nlohmann::json to_json() const;
};

/// ||w_hat - w_star||_F / ||w_star||_F. Throws InvalidArgument on shape
/// mismatch or zero w_star.
double coeff_error(const Eigen::MatrixXd& w_hat, const Eigen::MatrixXd& w_star);

/// Stacked relative l2 error over the first `rows` samples (all when 0).
double traj_error(const Eigen::MatrixXd& x_dd, const Eigen::MatrixXd& x, Eigen::Index rows = 0);

SupportMetrics support_metrics(const Eigen::MatrixXd& w_hat, const Eigen::MatrixXd& w_star);

RecoveryReport make_report(const Eigen::MatrixXd& w_hat, const Eigen::MatrixXd& w_star, double residual_norm);

}  // namespace wsindy
