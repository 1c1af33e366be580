#include "wsindy/error.hpp"
#include "wsindy/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace wsindy::kernels {

#ifndef WSINDY_BUILD_AVX2
namespace avx2 {
// Not compiled in; avx2_available() is false so these are never selected.
double dot(std::span<const double> a, std::span<const double> b) { return scalar::dot(a, b); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { scalar::axpy(alpha, x, y); }
double sum_abs(std::span<const double> x) { return scalar::sum_abs(x); }
}  // namespace avx2
#endif

namespace {

Isa detect() {
  if (const char* env = std::getenv("WSINDY_ISA"); env && std::string(env) == "scalar") return Isa::scalar;
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_available() {
#if defined(WSINDY_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available()) throw InvalidArgument("AVX2 kernels unavailable on this host");
  selected().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active_isa() == Isa::avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (active_isa() == Isa::avx2)
    avx2::axpy(alpha, x, y);
  else
    scalar::axpy(alpha, x, y);
}

double sum_abs(std::span<const double> x) {
  return active_isa() == Isa::avx2 ? avx2::sum_abs(x) : scalar::sum_abs(x);
}

}  // namespace wsindy::kernels
