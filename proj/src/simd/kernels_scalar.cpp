#include <cmath>
#include <limits>
#include <numbers>

#include "pcest/simd/kernels.hpp"

namespace pcest::simd::scalar {

namespace {

// Beyond this argument shc^2 leaves the double range; switch to logs.
constexpr double kLogDomainThreshold = 300.0;

double shc(double x) { return x == 0.0 ? 1.0 : std::sinh(x) / x; }
double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// ln shc(x) for large positive x.
double log_shc_large(double x) {
  return x - std::log(2.0 * x) + std::log1p(-std::exp(-2.0 * x));
}

double log_bracket(const BracketShape& s, double tau) {
  const double t = std::abs(tau);
  const double x = s.alpha * t;
  const double y = s.beta * t;
  if (x <= kLogDomainThreshold) {
    const double a = shc(x);
    const double b = sinc(y);
    return std::log(s.u * a * a + s.v * b * b);
  }
  const double log_hyper = std::log(s.u) + 2.0 * log_shc_large(x);
  const double b = sinc(y);
  return log_hyper + std::log1p(s.v * b * b * std::exp(-log_hyper));
}

}  // namespace

double sum_log_bracket(const BracketShape& s, const double* taus, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += log_bracket(s, taus[i]);
  return acc;
}

void bracket(const BracketShape& s, const double* taus, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::abs(taus[i]);
    const double a = shc(s.alpha * t);
    const double b = sinc(s.beta * t);
    out[i] = s.u * a * a + s.v * b * b;
  }
}

void waiting_time_density(double log_prefactor, double half_gamma,
                          const BracketShape& s, const double* taus, std::size_t n,
                          double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = taus[i];
    if (t == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double log_w =
        log_prefactor - half_gamma * t + 2.0 * std::log(std::abs(t)) + log_bracket(s, t);
    out[i] = std::exp(log_w);
  }
}

float dot_f32(const float* x, const float* y, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot_f64(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_f64(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace pcest::simd::scalar
