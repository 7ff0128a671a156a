#pragma once

// Validation harness: RMSE and bias of several estimators on a grid of true
// parameters, every estimator seeing the same simulated records.
//
// Record t of grid point p is drawn from child_rng(seed, t, p + 1), so tables
// from different runs, estimator sets or thread counts line up record by
// record.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcest/bayes.hpp"
#include "pcest/nnest.hpp"
#include "pcest/types.hpp"

namespace pcest::bench {

struct ValidationGrid {
  std::vector<SystemParams> points;
  int dims = 1;  ///< 1: only delta is estimated, 2: delta and omega
  std::size_t trajectories_per_point = 1000;
  int n_clicks = 48;

  /// n deltas uniformly on [lo, hi] (both included) at fixed omega.
  static ValidationGrid grid_1d(std::size_t n = 40, double lo = 0.0, double hi = 2.1,
                                double omega = 1.0, double gamma = 1.0);
  /// n x n points over delta in [0, 2.1] x omega in [0.25, 2.1], delta slow.
  static ValidationGrid grid_2d(std::size_t n = 40, double gamma = 1.0);
  static ValidationGrid from_deltas(std::span<const double> deltas, double omega = 1.0,
                                    double gamma = 1.0);
};

void validate(const ValidationGrid& g);

using bayes::EstimateMethod;

struct EstimatorSuite {
  std::vector<EstimateMethod> methods{EstimateMethod::bayes_mean,
                                      EstimateMethod::classical_mean};
  /// Required when methods contains nn.
  std::optional<nnest::HistDenseModel> model;
  bayes::Posterior1dOptions posterior_1d;
  bayes::Posterior2dOptions posterior_2d;
  /// Timing jitter added to every validation delay. The network sees the
  /// jittered delays clipped at 0 (as in training); the likelihood-based
  /// estimators see them unclipped and evaluate the noiseless model formally.
  double sigma_tau = 0.0;
};

std::vector<EstimateMethod> methods_from_string(const std::string& list);  ///< "bayes-mean,nn"
EstimateMethod method_from_string(const std::string& s);

struct PointMetrics {
  SystemParams truth;
  std::size_t n_samples = 0;
  double rmse = 0.0;  ///< delta
  double bias = 0.0;
  double variance = 0.0;
  double rmse_omega = 0.0;  ///< 2D only
  double bias_omega = 0.0;
  double rmse_euclid = 0.0;  ///< sqrt(rmse^2 + rmse_omega^2); equals rmse in 1D
};

/// Metrics of one estimator at one truth from its estimates (delta first).
PointMetrics point_metrics(const SystemParams& truth, int dims,
                           std::span<const bayes::Estimate> estimates);

struct MetricTable {
  EstimateMethod method = EstimateMethod::bayes_mean;
  int dims = 1;
  std::vector<PointMetrics> points;
  /// Delta estimates per grid point, kept when requested.
  std::vector<std::vector<double>> delta_estimates;
};

struct RunOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool keep_estimates = false;
};

/// One table per requested method, in the suite's order. Throws DomainError
/// if nn is requested without a model or the model does not fit the grid.
std::vector<MetricTable> run_validation(const ValidationGrid& grid, const EstimatorSuite& suite,
                                        const RunOptions& options = {});

struct Comparison {
  std::vector<double> ratios;  ///< a.rmse / b.rmse per point (Euclidean in 2D)
  double mean_ratio = 0.0;
  /// mean(a.rmse) / mean(b.rmse) over the grid
  double ratio_of_means = 0.0;
  std::size_t wins = 0;    ///< points where a has the lower RMSE
  std::size_t losses = 0;
  std::size_t ties = 0;
  double sign_test_p = 1.0;  ///< two-sided exact binomial p of wins vs losses
};

/// Throws DomainError unless both tables cover the same grid.
Comparison compare_tables(const MetricTable& a, const MetricTable& b);

/// Columns: method,delta,omega,n_samples,rmse,bias,variance,rmse_omega,
/// bias_omega,rmse_euclid; one row per (table, point).
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricTable> tables);

// Noise experiments: the network is retrained at each noise level and
// validated next to exact Bayesian inference.

enum class NoiseKind { jitter, target };

struct NoiseSweepConfig {
  NoiseKind kind = NoiseKind::jitter;
  std::vector<double> levels;
  /// Noiseless training data; jitter is derived from it with with_noise().
  const trajsim::Dataset* training = nullptr;
  nnest::TrainConfig train;
  ValidationGrid grid;
  RunOptions run;
};

struct NoiseSweepRow {
  double level = 0.0;
  MetricTable nn;
  MetricTable bayes;
  nnest::TrainHistory history;
};

std::vector<NoiseSweepRow> noise_sweep(const NoiseSweepConfig& config);

/// Columns: kind,level,method,delta,omega,rmse,bias.
void write_noise_sweep_csv(const std::filesystem::path& path, NoiseKind kind,
                           std::span<const NoiseSweepRow> rows);

}  // namespace pcest::bench
