#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation (namespace scalar) and, on x86-64, an AVX2+FMA variant
// (namespace avx2) compiled in its own translation unit. The public entry
// points in this header dispatch through a table selected once at startup
// from CPUID; set_isa() overrides the choice (tests use it to run both paths
// on identical inputs).
//
// Results of the two paths agree to rounding, not bitwise: the AVX2 dot
// products reduce in a different order and the transcendental functions come
// from glibc's libmvec. Within one ISA every kernel is deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace pcest::simd {

/// Coefficients of B(tau) = u shc^2(alpha tau) + v sinc^2(beta tau).
struct BracketShape {
  double u = 0.0;
  double v = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// True when the CPU and the build both support the AVX2 path.
bool avx2_available();

Isa active_isa();

/// Selects the kernel set. Requesting avx2 on a machine without it throws
/// std::runtime_error.
void set_isa(Isa isa);

/// RAII override of the active ISA.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_isa(isa); }
  ~ScopedIsa() { set_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

/// sum_i ln B(tau_i). B is even in tau, so negative delays are accepted.
double sum_log_bracket(const BracketShape& shape, std::span<const double> taus);

/// out_i = B(tau_i).
void bracket(const BracketShape& shape, std::span<const double> taus,
             std::span<double> out);

/// out_i = exp(log_prefactor - half_gamma tau_i) tau_i^2 B(tau_i).
void waiting_time_density(double log_prefactor, double half_gamma,
                          const BracketShape& shape, std::span<const double> taus,
                          std::span<double> out);

float dot(std::span<const float> x, std::span<const float> y);
double dot(std::span<const double> x, std::span<const double> y);

/// y += a * x
void axpy(float a, std::span<const float> x, std::span<float> y);
void axpy(double a, std::span<const double> x, std::span<double> y);

// Raw-pointer kernel sets behind the dispatcher. Exposed for the equivalence
// tests and benchmarks; prefer the span API above.
#define PCEST_SIMD_KERNEL_DECLS                                                  \
  double sum_log_bracket(const BracketShape& s, const double* taus,            \
                         std::size_t n);                                       \
  void bracket(const BracketShape& s, const double* taus, std::size_t n,       \
               double* out);                                                   \
  void waiting_time_density(double log_prefactor, double half_gamma,           \
                            const BracketShape& s, const double* taus,         \
                            std::size_t n, double* out);                       \
  float dot_f32(const float* x, const float* y, std::size_t n);                \
  double dot_f64(const double* x, const double* y, std::size_t n);             \
  void axpy_f32(float a, const float* x, float* y, std::size_t n);             \
  void axpy_f64(double a, const double* x, double* y, std::size_t n);

namespace scalar {
PCEST_SIMD_KERNEL_DECLS
}
namespace avx2 {
PCEST_SIMD_KERNEL_DECLS
}

#undef PCEST_SIMD_KERNEL_DECLS

}  // namespace pcest::simd
