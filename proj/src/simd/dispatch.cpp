#include <atomic>
#include <stdexcept>

#include "pcest/simd/kernels.hpp"

namespace pcest::simd {

namespace {

struct KernelTable {
  double (*sum_log_bracket)(const BracketShape&, const double*, std::size_t);
  void (*bracket)(const BracketShape&, const double*, std::size_t, double*);
  void (*waiting_time_density)(double, double, const BracketShape&, const double*,
                               std::size_t, double*);
  float (*dot_f32)(const float*, const float*, std::size_t);
  double (*dot_f64)(const double*, const double*, std::size_t);
  void (*axpy_f32)(float, const float*, float*, std::size_t);
  void (*axpy_f64)(double, const double*, double*, std::size_t);
};

constexpr KernelTable kScalar{scalar::sum_log_bracket, scalar::bracket,
                              scalar::waiting_time_density, scalar::dot_f32,
                              scalar::dot_f64,         scalar::axpy_f32,
                              scalar::axpy_f64};

#ifdef PCEST_HAS_AVX2_KERNELS
constexpr KernelTable kAvx2{avx2::sum_log_bracket, avx2::bracket,
                            avx2::waiting_time_density, avx2::dot_f32,
                            avx2::dot_f64,         avx2::axpy_f32,
                            avx2::axpy_f64};
#endif

bool cpu_has_avx2() {
#if defined(PCEST_HAS_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
#ifdef PCEST_HAS_AVX2_KERNELS
  if (isa == Isa::avx2) return &kAvx2;
#endif
  (void)isa;
  return &kScalar;
}

Isa default_isa() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{default_isa()};
  return isa;
}

const KernelTable& active() { return *table_for(current().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
  static const bool available = cpu_has_avx2();
  return available;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available())
    throw std::runtime_error("AVX2 kernels are not available on this machine/build");
  current().store(isa, std::memory_order_relaxed);
}

double sum_log_bracket(const BracketShape& shape, std::span<const double> taus) {
  return active().sum_log_bracket(shape, taus.data(), taus.size());
}

void bracket(const BracketShape& shape, std::span<const double> taus,
             std::span<double> out) {
  if (out.size() != taus.size()) throw std::invalid_argument("bracket: size mismatch");
  active().bracket(shape, taus.data(), taus.size(), out.data());
}

void waiting_time_density(double log_prefactor, double half_gamma,
                          const BracketShape& shape, std::span<const double> taus,
                          std::span<double> out) {
  if (out.size() != taus.size())
    throw std::invalid_argument("waiting_time_density: size mismatch");
  active().waiting_time_density(log_prefactor, half_gamma, shape, taus.data(),
                                taus.size(), out.data());
}

float dot(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  return active().dot_f32(x.data(), y.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  return active().dot_f64(x.data(), y.data(), x.size());
}

void axpy(float a, std::span<const float> x, std::span<float> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  active().axpy_f32(a, x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  active().axpy_f64(a, x.data(), y.data(), x.size());
}

}  // namespace pcest::simd
