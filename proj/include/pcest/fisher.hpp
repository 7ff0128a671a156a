#pragma once

// Fisher information about the detuning and the Cramer-Rao family of bounds.
//
// All derivatives are central finite differences in delta; the waiting-time
// density is even in delta, so stencils may cross delta = 0. At delta = 0 the
// Fisher information vanishes exactly and the CRB is undefined there.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pcest/types.hpp"

namespace pcest::fisher {

inline constexpr double kDefaultStep = 1e-3;

/// N * integral_0^200 w (d ln w / d delta)^2 dtau by adaptive Gauss-Kronrod.
/// Requires 1e-5 <= d_delta <= 1e-2 (units of gamma). Throws NumericalError
/// if the quadrature does not reach its tolerance.
double fisher_per_trajectory(const SystemParams& p, int n_clicks,
                             double d_delta = kDefaultStep);

struct SampledFisher {
  double value = 0.0;           ///< mean of the squared score
  double standard_error = 0.0;  ///< of the mean
  std::size_t n_traj = 0;
};

/// Monte Carlo estimate of the per-trajectory Fisher information: records of
/// n_clicks i.i.d. delays from child_rng(seed, i), score by central
/// differences of the record log-likelihood. Requires n_traj >= 100.
SampledFisher fisher_sampled(const SystemParams& p, std::size_t n_traj, int n_clicks,
                             std::uint64_t seed, double d_delta = kDefaultStep,
                             std::size_t threads = 1);

/// Eigenvalue of maximal real part of the generalized Liouvillian
/// L_{left,right}. Throws NumericalError when the top two eigenvalues are
/// closer than 1e-8 (the branch is ambiguous).
std::complex<double> leading_eigenvalue(const SystemParams& left, const SystemParams& right);

/// Quantum Fisher information of a trajectory of n_clicks photons,
/// H = 4 T d^2 Re lambda / d delta1 d delta2 with T = N / (gamma <s^+ s>_ss),
/// by the 4-point cross stencil of half-width h. Requires 1e-4 <= h <= 1e-2.
double qfi(const SystemParams& p, int n_clicks, double h = kDefaultStep);

struct BiasCurve {
  std::vector<double> theta;       ///< distinct truths, ascending
  std::vector<double> bias;        ///< mean(estimate - truth)
  std::vector<double> bias_se;     ///< standard error of the bias
  std::vector<double> slope;       ///< d bias / d theta after smoothing
  std::vector<std::size_t> n_samples;
};

/// Groups (estimate, truth) pairs by exact truth value. Each group needs at
/// least min_samples entries (InsufficientSamplesError otherwise) and there
/// must be at least two groups. The slope is differenced from a 3-point
/// moving average of the bias (interior points; the two end values are kept
/// raw) with central differences inside and one-sided ones at the ends.
BiasCurve empirical_bias(std::span<const double> estimates, std::span<const double> truths,
                         std::size_t min_samples = 100);

struct InsufficientSamplesError : DomainError {
  using DomainError::DomainError;
};

/// Lower bound on the estimator variance, (1 + slope)^2 / (eta F).
/// Throws DomainError for F <= 0 or eta < 1.
double biased_crb_variance(double fisher, double bias_slope, int eta = 1);

/// RMSE bound sqrt(biased_crb_variance + bias^2).
double biased_crb(double fisher, double bias_slope, double bias, int eta = 1);

struct FisherReport {
  std::vector<double> theta;  ///< delta grid
  double omega = 1.0;
  double gamma = 1.0;
  int n_clicks = 48;
  int eta = 1;
  std::vector<double> fisher;
  std::vector<double> qfi;
  std::vector<double> bias;
  std::vector<double> bias_slope;
  /// NaN where F (resp. H) is zero and the bound is undefined.
  std::vector<double> crb_variance;
  std::vector<double> qcrb_variance;
  std::vector<double> crb_rmse;
  std::vector<double> qcrb_rmse;
};

/// F and H on `deltas` at fixed omega; bias terms come from `bias` (matched
/// by grid position, which must coincide with `deltas`) or are zero.
FisherReport fisher_report(std::span<const double> deltas, double omega, double gamma,
                           int n_clicks, const std::optional<BiasCurve>& bias = std::nullopt,
                           int eta = 1, double d_delta = kDefaultStep,
                           double h = kDefaultStep);

/// Columns: delta,fisher,qfi,bias,slope,crb_var,qcrb_var,crb_rmse,qcrb_rmse.
void write_fisher_csv(const std::filesystem::path& path, const FisherReport& r);

}  // namespace pcest::fisher
