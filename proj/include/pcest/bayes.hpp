#pragma once

// Grid posteriors under a flat prior.
//
// Quantum signal: the delays of a record are independent (the emitter resets
// to |0> at every click), so ln P(D|theta) = sum_i ln w(tau_i; theta).
// Classical signal: only the mean delay is kept and modelled as Gaussian with
// the steady-state moments of qdyn::classical_moments.
//
// Posteriors are normalized by max-subtracted exponentiation over a uniform
// grid that includes both support endpoints.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcest/trajsim.hpp"
#include "pcest/types.hpp"

namespace pcest::bayes {

/// Raised when every grid point has zero likelihood.
struct ImpossibleDataError : DomainError {
  using DomainError::DomainError;
};

enum class LikelihoodMode {
  strict,  ///< delays must be >= 0
  formal,  ///< evaluate the analytic continuation of w for negative delays
};

/// Per-record sums that do not depend on theta, so a grid sweep only pays
/// for the theta-dependent bracket term.
class RecordLikelihood {
 public:
  explicit RecordLikelihood(std::span<const double> delays,
                            LikelihoodMode mode = LikelihoodMode::strict);

  /// sum_i ln w(tau_i; p); -inf if the data are impossible under p. Accepts a
  /// signed delta.
  double operator()(const SystemParams& p) const;

  std::size_t size() const { return delays_.size(); }

 private:
  std::span<const double> delays_;
  double sum_tau_ = 0.0;
  double sum_log_tau2_ = 0.0;
  bool has_zero_ = false;
};

double log_likelihood(std::span<const double> delays, const SystemParams& p,
                      LikelihoodMode mode = LikelihoodMode::strict);
double log_likelihood(const DelayRecord& record, const SystemParams& p);

/// Discretized posterior over one (delta) or two (delta, omega) axes.
/// masses is row-major with delta as the slow index.
struct PosteriorGrid {
  std::vector<std::vector<double>> axes;
  std::vector<double> masses;
  /// ln of the likelihood averaged over the grid (flat prior), i.e. the
  /// evidence up to the grid measure.
  double log_evidence = 0.0;

  std::size_t dims() const { return axes.size(); }
  double mass(std::size_t i, std::size_t j = 0) const {
    return masses[dims() == 1 ? i : i * axes[1].size() + j];
  }
};

/// Uniform grid with n points including both endpoints.
std::vector<double> uniform_axis(const trajsim::Interval& support, std::size_t n);

/// Builds a normalized grid from unnormalized log-likelihoods laid out like
/// PosteriorGrid::masses. Throws ImpossibleDataError if all are -inf.
PosteriorGrid normalize_log_likelihood(std::vector<std::vector<double>> axes,
                                       std::span<const double> log_likelihood);

struct Posterior1dOptions {
  trajsim::Interval support{0.0, 5.0};
  std::size_t n_grid = 1000;
  double fixed_omega = 1.0;
  double gamma = 1.0;
  LikelihoodMode mode = LikelihoodMode::strict;
};

struct Posterior2dOptions {
  trajsim::Interval delta{0.0, 3.0};
  trajsim::Interval omega{0.25, 5.0};
  std::size_t n_delta = 300;
  std::size_t n_omega = 300;
  double gamma = 1.0;
  LikelihoodMode mode = LikelihoodMode::strict;
};

PosteriorGrid posterior_1d(std::span<const double> delays, const Posterior1dOptions& opt = {});
PosteriorGrid posterior_2d(std::span<const double> delays, const Posterior2dOptions& opt = {});

/// Posterior from the mean delay alone with a Gaussian likelihood
/// N(mu(theta), sigma(theta)). Throws DomainError for an empty record.
PosteriorGrid classical_posterior(std::span<const double> delays,
                                  const Posterior1dOptions& opt = {});

enum class EstimateMethod { bayes_mean, bayes_map, classical_mean, nn };

std::string to_string(EstimateMethod m);

struct Estimate {
  std::vector<double> values;  ///< delta, then omega for 2D
  EstimateMethod method = EstimateMethod::bayes_mean;
};

/// Posterior mean per axis.
Estimate estimate_mean(const PosteriorGrid& p,
                       EstimateMethod method = EstimateMethod::bayes_mean);

/// Grid point of maximal mass; ties go to the earliest (smallest) grid value.
Estimate estimate_map(const PosteriorGrid& p);

/// Columns: delta[,omega],mass.
void write_posterior_csv(const std::filesystem::path& path, const PosteriorGrid& p);

}  // namespace pcest::bayes
