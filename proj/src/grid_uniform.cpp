#include "wsindy/grid_uniform.hpp"

#include "wsindy/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>

namespace wsindy {

void UniformGridConfig::validate() const {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be > 0");
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("shift parameter s must lie in (0, 1)");
  if (L_override && *L_override < 2) throw InvalidArgument("L override must be >= 2 timepoints");
}

int dominant_mode_support(const TimeSeries& data) {
  data.validate();
  const auto m = static_cast<int>(data.size());
  if (m < 4) throw InvalidArgument("dominant mode search needs at least 4 samples");
  const int modes = m / 2;
  Eigen::VectorXd spectrum = Eigen::VectorXd::Zero(modes + 1);

  std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(static_cast<std::size_t>(m)), &fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(
      reinterpret_cast<fftw_complex*>(fftw_alloc_complex(static_cast<std::size_t>(m / 2 + 1))), &fftw_free);
  fftw_plan plan = fftw_plan_dft_r2c_1d(m, in.get(), out.get(), FFTW_ESTIMATE);
  for (Eigen::Index d = 0; d < data.dim(); ++d) {
    const double mean = data.y.col(d).mean();
    for (int i = 0; i < m; ++i) in.get()[i] = data.y(i, d) - mean;
    fftw_execute(plan);
    for (int n = 1; n <= modes; ++n) spectrum(n) += std::hypot(out.get()[n][0], out.get()[n][1]);
  }
  fftw_destroy_plan(plan);

  int best = 0;
  double best_mag = 0.0;
  for (int n = 1; n <= modes; ++n) {
    if (spectrum(n) > best_mag) {
      best_mag = spectrum(n);
      best = n;
    }
  }
  // Relative floor so a constant signal's rounding residue is not a mode.
  double scale = 0.0;
  for (Eigen::Index d = 0; d < data.dim(); ++d) scale += data.y.col(d).cwiseAbs().maxCoeff();
  if (best == 0 || best_mag <= 1e-12 * scale * m) throw NumericalError("cannot infer a timescale from constant data");
  const int L = static_cast<int>(std::lround(static_cast<double>(m) / (2.0 * best)));
  return std::clamp(L, 4, m - 1);
}

int degree_from_rho(double rho, double support_width) {
  if (!(rho > 0.0) || !(support_width > 0.0)) throw InvalidArgument("rho and support width must be > 0");
  const double p = std::ceil(rho * rho * support_width * support_width / 2.8);
  return static_cast<int>(std::max(1.0, p));
}

namespace {

std::vector<TestFunction> place(const TimeSeries& data, const std::vector<long>& starts, int L, int p) {
  std::vector<TestFunction> out;
  out.reserve(starts.size());
  for (long i : starts) out.push_back(TestFunction::symmetric(p, data.t(i), data.t(i + L - 1)));
  return out;
}

void warn_low_degree(UniformBasis& ub) {
  if (ub.p < 2) ub.warnings.push_back("test function degree p = 1: trapezoidal weak-derivative error is only O(dt^2)");
}

}  // namespace

UniformBasis build_uniform_basis(const TimeSeries& data, const UniformGridConfig& cfg) {
  cfg.validate();
  data.validate();
  const auto m = static_cast<long>(data.size());
  UniformBasis ub;
  ub.L = cfg.L_override ? *cfg.L_override : dominant_mode_support(data);
  if (ub.L > m) throw InvalidArgument("support of " + std::to_string(ub.L) + " timepoints exceeds the record length");
  const double width = (ub.L - 1) * data.dt();
  ub.p = degree_from_rho(cfg.rho, width);
  ub.spacing = ub.L * std::sqrt(1.0 - std::pow(cfg.s, 1.0 / ub.p));
  std::vector<long> starts;
  for (long k = 0;; ++k) {
    const long i = std::lround(static_cast<double>(k) * ub.spacing);
    if (i + ub.L - 1 > m - 1) break;
    if (!starts.empty() && starts.back() == i) continue;
    starts.push_back(i);
    if (ub.spacing == 0.0) break;
  }
  ub.basis = place(data, starts, ub.L, ub.p);
  warn_low_degree(ub);
  return ub;
}

UniformBasis basis_for_square_system(const TimeSeries& data, int J, int p, std::optional<int> L_override) {
  if (J < 1) throw InvalidArgument("square system needs J >= 1");
  if (p < 1) throw InvalidArgument("test function degree must be >= 1");
  data.validate();
  const auto m = static_cast<long>(data.size());
  UniformBasis ub;
  ub.L = L_override ? *L_override : dominant_mode_support(data);
  ub.p = p;
  if (ub.L < 2 || ub.L > m) throw InvalidArgument("support of " + std::to_string(ub.L) + " timepoints does not fit the record");
  std::vector<long> starts;
  if (J == 1) {
    ub.spacing = 0.0;
    starts.push_back(std::lround(static_cast<double>(m - ub.L) / 2.0));
  } else {
    ub.spacing = static_cast<double>(m - ub.L) / static_cast<double>(J - 1);
    if (ub.spacing < 1.0)
      throw InvalidArgument(std::to_string(J) + " supports of " + std::to_string(ub.L) +
                            " timepoints cannot be placed at distinct grid points");
    for (int k = 0; k < J; ++k) starts.push_back(std::lround(k * ub.spacing));
  }
  ub.basis = place(data, starts, ub.L, ub.p);
  warn_low_degree(ub);
  return ub;
}

}  // namespace wsindy
