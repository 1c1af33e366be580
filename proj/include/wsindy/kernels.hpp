#pragma once

// Inner-loop arithmetic shared by quadrature assembly, covariance
// construction and the convolution derivative. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2/FMA variant; the
// variant is picked once at runtime from CPUID. Set WSINDY_ISA=scalar in
// the environment to pin the reference path.

#include <span>
#include <string_view>

namespace wsindy::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
std::string_view isa_name(Isa isa);

// True when the AVX2 variant was compiled in and the CPU supports it.
bool avx2_available();

// Overrides runtime selection. Throws InvalidArgument if the ISA is unavailable.
void force_isa(Isa isa);

// Precondition for the binary kernels: a.size() == b.size().
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum_abs(std::span<const double> x);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum_abs(std::span<const double> x);
}  // namespace scalar

namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum_abs(std::span<const double> x);
}  // namespace avx2

}  // namespace wsindy::kernels
