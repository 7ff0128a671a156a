#pragma once

// Closed-form physics of the coherently driven, spontaneously decaying
// two-level emitter
//
//   d rho/dt = -i [H, rho] + (gamma/2) (2 s rho s^+ - {s^+ s, rho}),
//   H = delta s^+ s + omega (s + s^+),   s = |0><1|.
//
// Waiting-time distribution
// -------------------------
// The delay density between consecutive photodetections is
//
//   w(tau) = (8 gamma omega^2 / R) exp(-gamma tau / 2)
//            [cosh(tau sqrt(X+) / 2sqrt2) - cosh(tau sqrt(X-) / 2sqrt2)]
//
// with X+- = gamma^2 - 4(delta^2 + 4 omega^2) +- R and
// R = sqrt((gamma^2 + 4(delta^2 + 4 omega^2))^2 - 64 gamma^2 omega^2).
// X+ >= 0 always, X- < 0 unless delta = 0 and omega <= gamma/4, so the second
// hyperbolic cosine is almost always a cosine. With cosh a - cos b =
// 2 sinh^2(a/2) + 2 sin^2(b/2) the density becomes
//
//   w(tau) = (gamma omega^2 / 2) tau^2 exp(-gamma tau / 2) B(tau),
//   B(tau) = u shc^2(alpha tau) + v sinc^2(beta tau),
//
// where shc(x) = sinh(x)/x, sinc(x) = sin(x)/x, alpha = sqrt(X+)/(4 sqrt2),
// beta = sqrt(|X-|)/(4 sqrt2), u = X+/R, v = |X-|/R and u + v = 2. This form
// has no cancellation near the degenerate point R -> 0 and makes the tau^2
// antibunching factor explicit. WaitingTimeShape carries (u, v, alpha, beta).
//
// Liouvillian vectorization
// -------------------------
// Density matrices are vectorized by column stacking:
// vec(rho) = (rho00, rho10, rho01, rho11), so vec(A rho B) = (B^T (x) A) vec(rho).
// Index 0 is the ground state |0>, index 1 the excited state |1>.

#include <complex>
#include <span>

#include <Eigen/Core>

#include "pcest/simd/kernels.hpp"
#include "pcest/types.hpp"

namespace pcest::qdyn {

/// theta-dependent constants of the bracket B(tau) above.
using WaitingTimeShape = simd::BracketShape;

/// Precomputed constants for repeated evaluation of w(tau; theta).
struct WaitingTimeCoeffs {
  WaitingTimeShape shape;
  double log_prefactor = 0.0;  ///< ln(gamma omega^2 / 2)
  double half_gamma = 0.0;
};

/// Accepts a signed delta (w depends on delta^2 only); finite-difference
/// stencils around delta = 0 rely on this. Throws DomainError for omega <= 0.
WaitingTimeCoeffs waiting_time_coeffs(const SystemParams& p);

/// B(tau) from the module notes, scalar reference evaluation.
double bracket(const WaitingTimeShape& s, double tau);

/// w(tau; theta). Throws DomainError for tau < 0 or omega == 0.
double waiting_time_density(double tau, const SystemParams& p);

/// ln w(tau; theta); -inf where w vanishes.
double log_waiting_time_density(double tau, const SystemParams& p);

/// ln w evaluated through the analytic continuation of w to tau < 0. Used for
/// noise-unaware inference on jittered delays, which may be negative.
double log_waiting_time_density_formal(double tau, const WaitingTimeCoeffs& c);

/// Batch evaluation of w on a grid of non-negative delays (SIMD dispatched).
void waiting_time_density(std::span<const double> taus, const SystemParams& p,
                          std::span<double> out);

/// Steady-state excited population 4 omega^2 / (gamma^2 + 4 delta^2 + 8 omega^2).
double steady_state_population(const SystemParams& p);

struct ClassicalMoments {
  double mu = 0.0;     ///< E[tau]
  double sigma = 0.0;  ///< std. dev. of the mean of n_clicks delays
  int n_clicks = 0;
};

/// Mean and sample-mean spread of the delays. Throws DomainError for omega == 0
/// or n_clicks < 1.
ClassicalMoments classical_moments(const SystemParams& p, int n_clicks);

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;

struct LiouvillianMatrix {
  Matrix4c entries;
  SystemParams left;
  SystemParams right;
};

/// Generalized Liouvillian
///   rho -> -i(H(left) rho - rho H(right)) + (gamma/2)(2 s rho s^+ - {s^+ s, rho})
/// in the column-stacking convention. left == right gives the ordinary
/// Liouvillian of the master equation. gamma is taken from `left`; delta may
/// carry either sign.
LiouvillianMatrix liouvillian(const SystemParams& left, const SystemParams& right);

/// Steady state of the ordinary Liouvillian as a 2x2 density matrix, obtained
/// from the eigenvector of the eigenvalue closest to zero.
Eigen::Matrix2cd steady_state(const SystemParams& p);

}  // namespace pcest::qdyn
