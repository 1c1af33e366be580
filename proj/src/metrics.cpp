#include "wsindy/metrics.hpp"

#include "wsindy/error.hpp"

namespace wsindy {

double coeff_error(const Eigen::MatrixXd& w_hat, const Eigen::MatrixXd& w_star) {
  if (w_hat.rows() != w_star.rows() || w_hat.cols() != w_star.cols()) throw InvalidArgument("weight matrices differ in shape");
  const double ref = w_star.norm();
  if (ref == 0.0) throw InvalidArgument("reference weights are all zero");
  return (w_hat - w_star).norm() / ref;
}

double traj_error(const Eigen::MatrixXd& x_dd, const Eigen::MatrixXd& x, Eigen::Index rows) {
  if (x_dd.cols() != x.cols()) throw InvalidArgument("trajectories differ in dimension");
  const Eigen::Index n = rows > 0 ? rows : x.rows();
  if (x_dd.rows() < n || x.rows() < n) throw InvalidArgument("trajectory grids do not cover the compared window");
  const double ref = x.topRows(n).norm();
  if (ref == 0.0) throw InvalidArgument("reference trajectory is identically zero");
  return (x_dd.topRows(n) - x.topRows(n)).norm() / ref;
}

SupportMetrics support_metrics(const Eigen::MatrixXd& w_hat, const Eigen::MatrixXd& w_star) {
  if (w_hat.rows() != w_star.rows() || w_hat.cols() != w_star.cols()) throw InvalidArgument("weight matrices differ in shape");
  SupportMetrics m;
  for (Eigen::Index i = 0; i < w_hat.size(); ++i) {
    const bool h = w_hat.data()[i] != 0.0;
    const bool s = w_star.data()[i] != 0.0;
    m.false_positives += (h && !s);
    m.false_negatives += (!h && s);
  }
  m.exact = m.false_positives == 0 && m.false_negatives == 0;
  return m;
}

RecoveryReport make_report(const Eigen::MatrixXd& w_hat, const Eigen::MatrixXd& w_star, double residual_norm) {
  RecoveryReport r;
  r.coeff_error = coeff_error(w_hat, w_star);
  const auto s = support_metrics(w_hat, w_star);
  r.support_exact = s.exact;
  r.false_positives = s.false_positives;
  r.false_negatives = s.false_negatives;
  r.residual_norm = residual_norm;
  r.coeff_error_per_dim.resize(w_star.cols());
  for (Eigen::Index d = 0; d < w_star.cols(); ++d) {
    const double ref = w_star.col(d).norm();
    r.coeff_error_per_dim(d) = ref > 0.0 ? (w_hat.col(d) - w_star.col(d)).norm() / ref : w_hat.col(d).norm();
  }
  return r;
}

nlohmann::json RecoveryReport::to_json() const {
  nlohmann::json j;
  j["coeff_error"] = coeff_error;
  j["traj_error"] = traj_error ? nlohmann::json(*traj_error) : nlohmann::json(nullptr);
  j["support_exact"] = support_exact;
  j["false_positives"] = false_positives;
  j["false_negatives"] = false_negatives;
  j["residual_norm"] = residual_norm;
  j["coeff_error_per_dim"] = std::vector<double>(coeff_error_per_dim.data(), coeff_error_per_dim.data() + coeff_error_per_dim.size());
  return j;
}

}  // namespace wsindy
