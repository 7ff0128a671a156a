#pragma once

// Photon-counting data generation.
//
// Two independent generators produce delay records:
//  * InverseCdfSampler draws i.i.d. delays from the analytic waiting-time
//    density by inverse transform on a tabulated CDF. Fast; used for
//    training and validation data.
//  * simulate_trajectory_euler integrates the monitored wavefunction with a
//    first-order quantum-jump scheme. Slow; used to validate the sampler.
//
// Datasets follow a one-child-engine-per-record seeding contract (see
// child_rng), so generation is bitwise reproducible regardless of threads.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcest/rng.hpp"
#include "pcest/types.hpp"

namespace pcest::trajsim {

/// Inverse-transform sampler on a uniform knot grid over [0, tau_max].
/// The CDF is accumulated by the trapezoidal rule and normalized so the last
/// knot is exactly 1; the (negligible) mass beyond tau_max is folded there.
class InverseCdfSampler {
 public:
  static constexpr std::size_t kDefaultKnots = 100'000;
  static constexpr double kDefaultTauMax = 100.0;  // in units of 1/gamma

  explicit InverseCdfSampler(const SystemParams& params,
                             std::size_t n_knots = kDefaultKnots,
                             double tau_max = kDefaultTauMax);

  /// Rebuilds the table for new parameters, keeping the knot grid.
  void reset(const SystemParams& params);

  double operator()(Rng& rng) const { return inverse_cdf(uniform01(rng)); }

  /// Delay at which the tabulated CDF reaches u in [0, 1].
  double inverse_cdf(double u) const;

  const SystemParams& params() const { return params_; }
  std::span<const double> cdf() const { return cdf_; }
  double knot_spacing() const { return h_; }

 private:
  SystemParams params_;
  double h_ = 0.0;
  std::vector<double> cdf_;
};

/// One delay drawn from w(tau; params). Reuses a per-thread table while
/// `params` stays the same. Throws DomainError for omega == 0.
double sample_delay(const SystemParams& params, Rng& rng);

/// Amplitudes of |0> (ground) and |1> (excited).
struct WavefunctionState {
  std::complex<double> amp0{1.0, 0.0};
  std::complex<double> amp1{0.0, 0.0};

  double excited_population() const { return std::norm(amp1); }
  double norm2() const { return std::norm(amp0) + std::norm(amp1); }
};

struct EulerOptions {
  double dt = 1e-3;  ///< in units of 1/gamma; must satisfy 0 < dt <= 1e-2
  /// Aborts with SimulationError("no-emission ...") when this many steps pass
  /// without a click.
  std::uint64_t max_steps_without_click = 100'000'000;
};

/// One no-jump step: psi <- [I - i (H - i gamma s^+ s / 2) dt] psi, normalized.
void evolve_no_jump(WavefunctionState& psi, const SystemParams& params, double dt);

/// Quantum-jump trajectory from |0> until n_clicks photons are detected. Each
/// step jumps with probability dt gamma <s^+ s>; the recorded delay counts the
/// steps since the previous click (or since t = 0), including the jump step.
DelayRecord simulate_trajectory_euler(const SystemParams& params, int n_clicks, Rng& rng,
                                      const EulerOptions& options = {});

struct NoiseConfig {
  double sigma_tau = 0.0;  ///< timing jitter std. dev. (1/gamma); 0 disables
  double sigma_y = 0.0;    ///< target-noise std. dev. used when training; 0 disables
  bool clip_negative_delays = true;

  bool operator==(const NoiseConfig&) const = default;
};

/// tau_i + N(0, sigma) for every delay; no draws are made when sigma == 0.
std::vector<double> jitter(std::span<const double> delays, double sigma, Rng& rng);

/// max(tau_i, 0) elementwise.
std::vector<double> clip_negative(std::span<const double> delays);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Interval&) const = default;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Parameter region truths are drawn from. With `omega` empty the Rabi
/// frequency is fixed at `fixed_omega` and only delta is unknown (1D);
/// otherwise both are drawn (2D).
struct ParameterBox {
  Interval delta{0.0, 5.0};
  std::optional<Interval> omega;
  double fixed_omega = 1.0;
  double gamma = 1.0;

  bool operator==(const ParameterBox&) const = default;

  int n_params() const { return omega ? 2 : 1; }
  bool contains(const SystemParams& p) const;

  static ParameterBox training_1d() { return {}; }
  static ParameterBox training_2d() { return {{0.0, 3.0}, Interval{0.25, 5.0}, 1.0, 1.0}; }
  /// Degenerate box pinned at a single parameter point.
  static ParameterBox point(const SystemParams& p) {
    return {{p.delta, p.delta}, Interval{p.omega, p.omega}, p.omega, p.gamma};
  }
};

/// Throws DomainError for empty, negative, inverted or non-finite ranges.
void validate(const ParameterBox& box);

enum class Generator : std::uint8_t { iid = 0, euler = 1 };

std::string to_string(Generator g);
Generator generator_from_string(const std::string& s);

struct DatasetMeta {
  int n_clicks = 48;
  ParameterBox box;
  std::uint64_t seed = 0;
  Generator generator = Generator::iid;
  NoiseConfig noise;
  double euler_dt = 1e-3;

  bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
  std::vector<DelayRecord> records;
  DatasetMeta meta;
};

struct GenerateOptions {
  Generator generator = Generator::iid;
  EulerOptions euler;
  std::size_t threads = 1;
};

/// Stream of child_rng used for timing jitter, separate from the simulation
/// stream so a jittered dataset shares its clean delays with the noiseless
/// dataset of the same seed.
inline constexpr std::uint64_t kJitterStream = 1;

/// Jitters record `index` of a dataset seeded with `seed` in place, then clips
/// negative delays if requested. No-op when sigma_tau == 0.
void apply_noise(DelayRecord& rec, const NoiseConfig& noise, std::uint64_t seed,
                 std::uint64_t index);

/// The dataset generate_dataset would produce with `noise`, derived from the
/// noiseless dataset of the same seed without re-simulating.
Dataset with_noise(const Dataset& clean, const NoiseConfig& noise);

/// count records with truths drawn uniformly from `box`, each from its own
/// child engine child_rng(seed, index). Jitter, when enabled, is applied per
/// delay after simulation (see apply_noise).
Dataset generate_dataset(const ParameterBox& box, std::size_t count, int n_clicks,
                         const NoiseConfig& noise, std::uint64_t seed,
                         const GenerateOptions& options = {});

// Binary format (little endian), version 1:
//   "PCNT" u16 version, u16 n_clicks, u8 n_params, u64 count, u64 seed,
//   f64 sigma_tau, f64 sigma_y,
//   u8 generator, u8 clip_negative_delays, f64 gamma, f64 euler_dt,
//   f64 delta_lo, f64 delta_hi, f64 omega_lo, f64 omega_hi,
//   then count x (n_params x f64 truth, n_clicks x f64 delays).
// For n_params == 1 the truth is delta and omega_lo == omega_hi is the fixed
// Rabi frequency; for n_params == 2 the truth is (delta, omega).
inline constexpr std::uint16_t kDatasetFormatVersion = 1;

void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

/// One row per record: truth columns then tau_1..tau_N, with a header row.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

}  // namespace pcest::trajsim
