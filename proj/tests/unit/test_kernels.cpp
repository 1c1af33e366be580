#include <doctest.h>

#include "wsindy/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace k = wsindy::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

// Sums in long double to get a reference independent of accumulation order.
long double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

struct IsaGuard {
  k::Isa saved = k::active_isa();
  ~IsaGuard() { k::force_isa(saved); }
};

}  // namespace

TEST_CASE("scalar kernels against extended-precision reference") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1001u}) {
    const auto a = random_vec(n, rng), b = random_vec(n, rng);
    long double abs_sum = 0, mag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      abs_sum += std::fabs(a[i]);
      mag += std::fabs(a[i] * b[i]);
    }
    CHECK(std::fabs(k::scalar::dot(a, b) - static_cast<double>(ref_dot(a, b))) <= 1e-14 * static_cast<double>(mag) + 1e-300);
    CHECK(k::scalar::sum_abs(a) == doctest::Approx(static_cast<double>(abs_sum)).epsilon(1e-14));

    auto y = b;
    k::scalar::axpy(-0.5, a, y);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == std::fma(-0.5, a[i], b[i]));
  }
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!k::avx2_available()) {
    MESSAGE("AVX2 not available on this machine; equivalence check skipped");
    return;
  }
  std::mt19937_64 rng(12);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto a = random_vec(n, rng), b = random_vec(n, rng);
    double mag = 0, abs_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mag += std::fabs(a[i] * b[i]);
      abs_sum += std::fabs(a[i]);
    }
    CAPTURE(n);
    CHECK(std::fabs(k::avx2::dot(a, b) - k::scalar::dot(a, b)) <= 4e-16 * static_cast<double>(n + 1) * mag);
    CHECK(std::fabs(k::avx2::sum_abs(a) - k::scalar::sum_abs(a)) <= 4e-16 * static_cast<double>(n + 1) * abs_sum);

    auto y1 = b, y2 = b;
    k::avx2::axpy(1.75, a, y1);
    k::scalar::axpy(1.75, a, y2);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == y2[i]);
  }
}

TEST_CASE("avx2 sum_abs clears the sign of negative zero and infinities") {
  if (!k::avx2_available()) return;
  std::vector<double> v = {-0.0, -1.0, 2.0, -3.0, -0.0, 4.0};
  CHECK(k::avx2::sum_abs(v) == 10.0);
  v.push_back(-INFINITY);
  CHECK(std::isinf(k::avx2::sum_abs(v)));
}

TEST_CASE("runtime dispatch follows force_isa") {
  IsaGuard guard;
  k::force_isa(k::Isa::scalar);
  CHECK(k::active_isa() == k::Isa::scalar);
  CHECK(k::isa_name(k::Isa::scalar) == "scalar");
  const std::vector<double> a = {1, 2, 3, 4, 5}, b = {5, 4, 3, 2, 1};
  CHECK(k::dot(a, b) == 35.0);
  if (k::avx2_available()) {
    k::force_isa(k::Isa::avx2);
    CHECK(k::active_isa() == k::Isa::avx2);
    CHECK(k::dot(a, b) == 35.0);
  } else {
    CHECK_THROWS(k::force_isa(k::Isa::avx2));
  }
}
