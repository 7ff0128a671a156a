// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has checked CPUID. Keep it free
// of inline library templates that other translation units also instantiate.

#include <immintrin.h>

#include <cmath>

#include "pcest/simd/kernels.hpp"

// glibc libmvec AVX2 entry points (vector ABI names for 4 x double).
extern "C" {
__m256d _ZGVdN4v_exp(__m256d);
__m256d _ZGVdN4v_log(__m256d);
__m256d _ZGVdN4v_sin(__m256d);
}

namespace pcest::simd::avx2 {

namespace {

constexpr double kLogDomainThreshold = 300.0;

inline __m256d vabs(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

// sinh(x)/x for x >= 0. Taylor series below 1, exponentials above.
inline __m256d vshc(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d x2 = _mm256_mul_pd(x, x);
  // sum_k x^(2k) / (2k+1)!, k = 0..9
  __m256d p = _mm256_set1_pd(1.0 / 121645100408832000.0);
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 355687428096000.0));
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 1307674368000.0));
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 6227020800.0));
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, x2, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, x2, one);

  const __m256d small = _mm256_cmp_pd(x, one, _CMP_LT_OQ);
  if (_mm256_movemask_pd(small) == 0xF) return p;
  const __m256d e = _ZGVdN4v_exp(x);
  const __m256d big = _mm256_div_pd(_mm256_sub_pd(e, _mm256_div_pd(one, e)),
                                    _mm256_add_pd(x, x));
  return _mm256_blendv_pd(big, p, small);
}

// sin(x)/x with the removable singularity at 0.
inline __m256d vsinc(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d is_zero = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
  const __m256d safe_x = _mm256_blendv_pd(x, _mm256_set1_pd(1.0), is_zero);
  const __m256d s = _mm256_div_pd(_ZGVdN4v_sin(safe_x), safe_x);
  return _mm256_blendv_pd(s, _mm256_set1_pd(1.0), is_zero);
}

inline __m256d vbracket(const BracketShape& s, __m256d t) {
  const __m256d a = vshc(_mm256_mul_pd(_mm256_set1_pd(s.alpha), t));
  const __m256d b = vsinc(_mm256_mul_pd(_mm256_set1_pd(s.beta), t));
  const __m256d hyper = _mm256_mul_pd(_mm256_set1_pd(s.u), _mm256_mul_pd(a, a));
  return _mm256_fmadd_pd(_mm256_set1_pd(s.v), _mm256_mul_pd(b, b), hyper);
}

// True if some lane needs the scalar log-domain path.
inline bool needs_log_domain(const BracketShape& s, __m256d t) {
  const __m256d x = _mm256_mul_pd(_mm256_set1_pd(s.alpha), t);
  const __m256d over = _mm256_cmp_pd(x, _mm256_set1_pd(kLogDomainThreshold), _CMP_GT_OQ);
  return _mm256_movemask_pd(over) != 0;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline float hsum(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x1));
  return _mm_cvtss_f32(s);
}

}  // namespace

double sum_log_bracket(const BracketShape& s, const double* taus, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = vabs(_mm256_loadu_pd(taus + i));
    if (needs_log_domain(s, t)) {
      tail += scalar::sum_log_bracket(s, taus + i, 4);
      continue;
    }
    acc = _mm256_add_pd(acc, _ZGVdN4v_log(vbracket(s, t)));
  }
  if (i < n) tail += scalar::sum_log_bracket(s, taus + i, n - i);
  return hsum(acc) + tail;
}

void bracket(const BracketShape& s, const double* taus, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = vabs(_mm256_loadu_pd(taus + i));
    _mm256_storeu_pd(out + i, vbracket(s, t));
  }
  if (i < n) scalar::bracket(s, taus + i, n - i, out + i);
}

void waiting_time_density(double log_prefactor, double half_gamma,
                          const BracketShape& s, const double* taus, std::size_t n,
                          double* out) {
  const __m256d lp = _mm256_set1_pd(log_prefactor);
  const __m256d hg = _mm256_set1_pd(half_gamma);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_loadu_pd(taus + i);
    const __m256d at = vabs(t);
    if (needs_log_domain(s, at)) {
      scalar::waiting_time_density(log_prefactor, half_gamma, s, taus + i, 4, out + i);
      continue;
    }
    // exp(lp - hg t) t^2 B(t); exp alone cannot overflow for the argument
    // ranges reached before the log-domain switch.
    const __m256d env = _ZGVdN4v_exp(_mm256_fnmadd_pd(hg, t, lp));
    const __m256d w = _mm256_mul_pd(_mm256_mul_pd(env, _mm256_mul_pd(t, t)), vbracket(s, at));
    _mm256_storeu_pd(out + i, w);
  }
  if (i < n) scalar::waiting_time_density(log_prefactor, half_gamma, s, taus + i, n - i, out + i);
}

float dot_f32(const float* x, const float* y, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
  float acc = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot_f64(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_f64(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace pcest::simd::avx2
