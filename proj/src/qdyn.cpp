#include "pcest/qdyn.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace pcest::qdyn {

namespace {

const double kInvFourSqrt2 = 1.0 / (4.0 * std::numbers::sqrt2);

// Internal stencils step across delta = 0; only delta^2 enters the physics
// used here, so a signed detuning is accepted.
void validate_signed(const SystemParams& p) {
  validate(SystemParams{std::abs(p.delta), p.omega, p.gamma});
}

}  // namespace

WaitingTimeCoeffs waiting_time_coeffs(const SystemParams& p) {
  validate_emitting(SystemParams{std::abs(p.delta), p.omega, p.gamma});
  const double g2 = p.gamma * p.gamma;
  const double o2 = p.omega * p.omega;
  const double d4 = 4.0 * p.delta * p.delta;
  const double s4 = d4 + 16.0 * o2;  // 4 (delta^2 + 4 omega^2)

  // R^2 = (g2 + s4)^2 - 64 g2 o2, rearranged as a sum of non-negative terms.
  const double a = g2 + 16.0 * o2;
  const double r = std::sqrt((g2 - 16.0 * o2) * (g2 - 16.0 * o2) + d4 * (2.0 * a + d4));
  const double d = g2 - s4;

  // X+ = d + R and X- = d - R, each written without cancellation using
  // R^2 - d^2 = 16 g2 delta^2.
  const double num = 4.0 * g2 * d4;
  const double x_plus = d >= 0.0 ? d + r : (r - d > 0.0 ? num / (r - d) : 0.0);
  const double x_minus = d <= 0.0 ? d - r : -num / (d + r);

  WaitingTimeCoeffs c;
  c.log_prefactor = std::log(p.gamma * o2 / 2.0);
  c.half_gamma = 0.5 * p.gamma;
  if (r == 0.0) {
    // delta = 0, omega = gamma/4: both branches coincide, B(tau) -> 2.
    c.shape = {1.0, 1.0, 0.0, 0.0};
    return c;
  }
  c.shape.u = x_plus / r;
  c.shape.v = -x_minus / r;
  c.shape.alpha = std::sqrt(std::max(x_plus, 0.0)) * kInvFourSqrt2;
  c.shape.beta = std::sqrt(std::max(-x_minus, 0.0)) * kInvFourSqrt2;
  return c;
}

double bracket(const WaitingTimeShape& s, double tau) {
  double out = 0.0;
  simd::scalar::bracket(s, &tau, 1, &out);
  return out;
}

double waiting_time_density(double tau, const SystemParams& p) {
  validate_emitting(p);
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw DomainError("waiting_time_density: tau must be finite and >= 0");
  const auto c = waiting_time_coeffs(p);
  double out = 0.0;
  simd::scalar::waiting_time_density(c.log_prefactor, c.half_gamma, c.shape, &tau, 1, &out);
  return out;
}

double log_waiting_time_density_formal(double tau, const WaitingTimeCoeffs& c) {
  if (tau == 0.0) return -std::numeric_limits<double>::infinity();
  return c.log_prefactor - c.half_gamma * tau + 2.0 * std::log(std::abs(tau)) +
         simd::scalar::sum_log_bracket(c.shape, &tau, 1);
}

double log_waiting_time_density(double tau, const SystemParams& p) {
  validate_emitting(p);
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw DomainError("log_waiting_time_density: tau must be finite and >= 0");
  return log_waiting_time_density_formal(tau, waiting_time_coeffs(p));
}

void waiting_time_density(std::span<const double> taus, const SystemParams& p,
                          std::span<double> out) {
  validate_emitting(p);
  for (double t : taus)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw DomainError("waiting_time_density: tau must be finite and >= 0");
  const auto c = waiting_time_coeffs(p);
  simd::waiting_time_density(c.log_prefactor, c.half_gamma, c.shape, taus, out);
}

double steady_state_population(const SystemParams& p) {
  validate(p);
  const double o2 = p.omega * p.omega;
  return 4.0 * o2 / (p.gamma * p.gamma + 4.0 * p.delta * p.delta + 8.0 * o2);
}

ClassicalMoments classical_moments(const SystemParams& p, int n_clicks) {
  validate_emitting(p);
  if (n_clicks < 1) throw DomainError("classical_moments: n_clicks must be >= 1");
  const double g = p.gamma, g2 = g * g;
  const double d2 = p.delta * p.delta, o2 = p.omega * p.omega;
  ClassicalMoments m;
  m.n_clicks = n_clicks;
  m.mu = (g2 + 4.0 * d2 + 8.0 * o2) / (4.0 * g * o2);
  const double a = g2 + 4.0 * d2;
  const double var = (a * a - 8.0 * (g2 - 12.0 * d2) * o2 + 64.0 * o2 * o2) /
                     (static_cast<double>(n_clicks) * 16.0 * g2 * o2 * o2);
  m.sigma = std::sqrt(var);
  return m;
}

LiouvillianMatrix liouvillian(const SystemParams& left, const SystemParams& right) {
  validate_signed(left);
  validate_signed(right);
  using C = std::complex<double>;
  using M2 = Eigen::Matrix2cd;
  const auto hamiltonian = [](const SystemParams& p) {
    M2 h;
    h << C(0.0), C(p.omega), C(p.omega), C(p.delta);
    return h;
  };
  const auto kron = [](const M2& a, const M2& b) {
    Matrix4c k;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
  };
  const M2 id = M2::Identity();
  M2 lower;  // |0><1|
  lower << C(0.0), C(1.0), C(0.0), C(0.0);
  const M2 number = lower.adjoint() * lower;
  const double g = left.gamma;
  const C i(0.0, 1.0);

  // vec(A rho B) = (B^T (x) A) vec(rho)
  Matrix4c l = -i * (kron(id, hamiltonian(left)) - kron(hamiltonian(right).transpose(), id));
  l += (g / 2.0) * (2.0 * kron(lower.conjugate(), lower) - kron(id, number) -
                    kron(number.transpose(), id));
  return {l, left, right};
}

Eigen::Matrix2cd steady_state(const SystemParams& p) {
  const auto l = liouvillian(p, p);
  Eigen::ComplexEigenSolver<Matrix4c> es(l.entries);
  if (es.info() != Eigen::Success) throw NumericalError("steady_state: eigensolver failed");
  Eigen::Index k = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&k);
  const auto v = es.eigenvectors().col(k);
  Eigen::Matrix2cd rho;
  rho << v(0), v(2), v(1), v(3);
  rho /= rho.trace();
  return rho;
}

}  // namespace pcest::qdyn
