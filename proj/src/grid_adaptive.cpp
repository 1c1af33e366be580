#include "wsindy/grid_adaptive.hpp"

#include "wsindy/error.hpp"
#include "wsindy/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsindy {

void AdaptiveGridConfig::validate() const {
  if (p_deriv < 1) throw InvalidArgument("p_deriv must be >= 1");
  if (s_deriv < 3) throw InvalidArgument("s_deriv must be >= 3");
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (r_whm < 2) throw InvalidArgument("r_whm must be >= 2");
}

Eigen::MatrixXd weak_derivative(const TimeSeries& data, int p_deriv, int s_deriv) {
  data.validate();
  if (p_deriv < 1 || s_deriv < 3) throw InvalidArgument("weak derivative needs p_deriv >= 1 and s_deriv >= 3");
  const Eigen::Index m = data.size();
  if (s_deriv >= m) throw InvalidArgument("s_deriv must be smaller than the record length");
  const double dt = data.dt();

  // Stencil in point units on (-s/2, s/2); offsets with nonzero weight only.
  const double half = s_deriv / 2.0;
  const TestFunction phi = TestFunction::symmetric(p_deriv, -half, half);
  const auto reach = static_cast<Eigen::Index>(std::ceil(half) - 1);
  const Eigen::Index width = 2 * reach + 1;
  Eigen::VectorXd c(width);
  for (Eigen::Index j = -reach; j <= reach; ++j) c(j + reach) = -phi.eval_deriv(static_cast<double>(j));

  double c_sum = 0.0, c_moment = 0.0;
  for (Eigen::Index j = -reach; j <= reach; ++j) {
    c_sum += c(j + reach);
    c_moment += c(j + reach) * static_cast<double>(j);
  }

  Eigen::MatrixXd v(m, data.dim());
  for (Eigen::Index d = 0; d < data.dim(); ++d) {
    const double* col = data.y.col(d).data();
    // exact zero for a constant channel, so it registers as flat downstream
    if (data.y.col(d).maxCoeff() == data.y.col(d).minCoeff()) {
      v.col(d).setZero();
      continue;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i >= reach && i + reach < m) {
        const double acc = kernels::dot({c.data(), static_cast<std::size_t>(width)},
                                        {col + i - reach, static_cast<std::size_t>(width)});
        v(i, d) = (acc - c_sum * col[i]) / (c_moment * dt);
        continue;
      }
      double acc = 0.0, moment = 0.0;
      for (Eigen::Index j = -reach; j <= reach; ++j) {
        if (i + j < 0 || i + j >= m) continue;
        acc += c(j + reach) * (col[i + j] - col[i]);
        moment += c(j + reach) * static_cast<double>(j);
      }
      v(i, d) = acc / (moment * dt);
    }
  }
  return v;
}

Eigen::VectorXd tv_cdf(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw InvalidArgument("weak derivative contains non-finite values");
  const double total = kernels::sum_abs({v.data(), static_cast<std::size_t>(v.size())});
  if (!(total > 0.0)) throw FlatChannel("channel has zero total variation");
  Eigen::VectorXd psi(v.size());
  double run = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    run += std::abs(v(i));
    psi(i) = run / total;
  }
  psi(v.size() - 1) = 1.0;
  return psi;
}

std::vector<Eigen::Index> sample_center_indices(const Eigen::VectorXd& psi, int K) {
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (psi.size() == 0) throw InvalidArgument("empty distribution");
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(K));
  const double* begin = psi.data();
  const double* end = begin + psi.size();
  for (int k = 0; k < K; ++k) {
    const double u = static_cast<double>(k) / K;
    const double* it = std::lower_bound(begin, end, u);
    out.push_back(it == end ? psi.size() - 1 : it - begin);
  }
  return out;
}

std::vector<double> sample_centers(const Eigen::VectorXd& psi, const Eigen::VectorXd& t, int K) {
  if (psi.size() != t.size()) throw InvalidArgument("psi and t lengths differ");
  std::vector<double> out;
  for (auto i : sample_center_indices(psi, K)) out.push_back(t(i));
  return out;
}

namespace {

constexpr double kTail = 1e-16;

// For a symmetric phi with half-width h points, phi(c + x) = (1 - (x/h)^2)^p.
// Half max at x = r fixes h = r / sqrt(1 - 2^{-1/p}); the residual below is
// log phi(b - dt) - log(1e-16) with that h.
double tail_residual(double p, double r) {
  const double u = std::sqrt(1.0 - std::pow(2.0, -1.0 / p)) / r;
  return p * std::log(2.0 * u - u * u) - std::log(kTail);
}

}  // namespace

WhmShape solve_whm_shape(int r_whm) {
  if (r_whm < 2) throw InvalidArgument("r_whm must be >= 2");
  const double r = r_whm;
  double lo = 1.0, hi = 512.0;
  double flo = tail_residual(lo, r), fhi = tail_residual(hi, r);
  if (flo * fhi > 0.0) throw NumericalError("no test function degree in [1, 512] matches r_whm = " + std::to_string(r_whm));
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double fm = tail_residual(mid, r);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  WhmShape shape;
  shape.p_root = 0.5 * (lo + hi);
  shape.p = std::max(1, static_cast<int>(std::ceil(shape.p_root - 1e-9)));
  // Half-max condition at the integer degree, widened to the next grid point;
  // the larger degree only lowers the tail value.
  const double h = r / std::sqrt(1.0 - std::pow(2.0, -1.0 / shape.p));
  shape.half_width = static_cast<int>(std::ceil(h - 1e-9));
  return shape;
}

TestFunction solve_testfn_from_whm(double center, int r_whm, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  const WhmShape shape = solve_whm_shape(r_whm);
  const double h = shape.half_width * dt;
  return TestFunction::symmetric(shape.p, center - h, center + h);
}

AdaptiveBasis build_adaptive_basis(const TimeSeries& data, const AdaptiveGridConfig& cfg) {
  cfg.validate();
  data.validate();
  const Eigen::Index m = data.size();
  const auto nd = static_cast<int>(data.dim());

  AdaptiveBasis out;
  out.shape = solve_whm_shape(cfg.r_whm);
  const Eigen::Index h = out.shape.half_width;
  if (2 * h + 1 > m)
    throw InvalidArgument("record of " + std::to_string(m) + " samples is shorter than the " + std::to_string(2 * h + 1) +
                          "-point test function support");

  out.v = weak_derivative(data, cfg.p_deriv, cfg.s_deriv);
  out.psi.resize(static_cast<std::size_t>(nd));
  std::vector<int> live;
  for (int d = 0; d < nd; ++d) {
    try {
      out.psi[static_cast<std::size_t>(d)] = tv_cdf(out.v.col(d));
      live.push_back(d);
    } catch (const FlatChannel&) {
    }
  }
  if (live.empty()) throw FlatChannel("every channel is flat; cannot place test functions");

  out.centers_per_dim.assign(static_cast<std::size_t>(nd), {});
  const int n_live = static_cast<int>(live.size());
  std::vector<Eigen::Index> pooled;
  for (int i = 0; i < n_live; ++i) {
    const int budget = cfg.K / n_live + (i < cfg.K % n_live ? 1 : 0);
    if (budget == 0) continue;
    const int d = live[static_cast<std::size_t>(i)];
    auto idx = sample_center_indices(*out.psi[static_cast<std::size_t>(d)], budget);
    out.centers_per_dim[static_cast<std::size_t>(d)] = idx;
    for (auto c : idx) pooled.push_back(std::clamp(c, h, m - 1 - h));
  }
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  for (auto c : pooled) out.basis.push_back(TestFunction::symmetric(out.shape.p, data.t(c - h), data.t(c + h)));
  return out;
}

}  // namespace wsindy
