#include "pcest/trajsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>

#include "binary_io.hpp"
#include "pcest/parallel.hpp"
#include "pcest/qdyn.hpp"

namespace pcest::trajsim {

InverseCdfSampler::InverseCdfSampler(const SystemParams& params, std::size_t n_knots,
                                     double tau_max)
    : params_(params) {
  if (n_knots < 2 || !(tau_max > 0.0))
    throw DomainError("InverseCdfSampler: need >= 2 knots and tau_max > 0");
  h_ = tau_max / static_cast<double>(n_knots - 1);
  cdf_.resize(n_knots);
  reset(params);
}

void InverseCdfSampler::reset(const SystemParams& params) {
  validate_emitting(params);
  params_ = params;
  const std::size_t n_knots = cdf_.size();

  // Knot abscissae and density values live in per-thread scratch so that
  // rebuilding a table for every record does not churn the allocator.
  thread_local std::vector<double> taus, w;
  thread_local double taus_h = 0.0;
  if (taus.size() != n_knots || taus_h != h_) {
    taus.resize(n_knots);
    for (std::size_t k = 0; k < n_knots; ++k) taus[k] = h_ * static_cast<double>(k);
    taus_h = h_;
  }
  w.resize(n_knots);
  qdyn::waiting_time_density(taus, params, w);

  const double half_h = 0.5 * h_;
  cdf_[0] = 0.0;
  for (std::size_t k = 1; k < n_knots; ++k) cdf_[k] = cdf_[k - 1] + half_h * (w[k - 1] + w[k]);
  const double total = cdf_.back();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("InverseCdfSampler: waiting-time table has no mass");
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double InverseCdfSampler::inverse_cdf(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return h_ * static_cast<double>(cdf_.size() - 1);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto j = static_cast<std::size_t>(it - cdf_.begin());
  const std::size_t k = j - 1;
  const double lo = cdf_[k], hi = cdf_[j];
  const double frac = hi > lo ? (u - lo) / (hi - lo) : 0.0;
  return h_ * (static_cast<double>(k) + frac);
}

double sample_delay(const SystemParams& params, Rng& rng) {
  thread_local std::unique_ptr<InverseCdfSampler> cache;
  if (!cache || !(cache->params() == params)) cache = std::make_unique<InverseCdfSampler>(params);
  return (*cache)(rng);
}

void evolve_no_jump(WavefunctionState& psi, const SystemParams& p, double dt) {
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  const C a0 = psi.amp0, a1 = psi.amp1;
  // H_eff = [[0, omega], [omega, delta - i gamma / 2]]
  const C n0 = a0 - i * dt * (p.omega * a1);
  const C n1 = a1 - i * dt * (p.omega * a0 + C(p.delta, -0.5 * p.gamma) * a1);
  const double norm = std::sqrt(std::norm(n0) + std::norm(n1));
  psi.amp0 = n0 / norm;
  psi.amp1 = n1 / norm;
}

DelayRecord simulate_trajectory_euler(const SystemParams& params, int n_clicks, Rng& rng,
                                      const EulerOptions& options) {
  validate(params);
  const double dt = options.dt;
  if (!(dt > 0.0) || dt * params.gamma > 1e-2)
    throw DomainError("simulate_trajectory_euler: dt must satisfy 0 < dt <= 1e-2/gamma");
  if (n_clicks < 1) throw DomainError("simulate_trajectory_euler: n_clicks must be >= 1");

  DelayRecord rec;
  rec.truth = params;
  rec.delays.reserve(static_cast<std::size_t>(n_clicks));
  WavefunctionState psi;
  std::uint64_t steps = 0;
  const double rate_dt = params.gamma * dt;
  while (rec.delays.size() < static_cast<std::size_t>(n_clicks)) {
    ++steps;
    const double p_jump = rate_dt * psi.excited_population();
    if (uniform01(rng) < p_jump) {
      rec.delays.push_back(static_cast<double>(steps) * dt);
      steps = 0;
      psi = WavefunctionState{};
      continue;
    }
    if (steps >= options.max_steps_without_click)
      throw SimulationError("no-emission: no click within " + std::to_string(steps) +
                            " Euler steps");
    evolve_no_jump(psi, params, dt);
  }
  return rec;
}

std::vector<double> jitter(std::span<const double> delays, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw DomainError("jitter: sigma must be >= 0");
  std::vector<double> out(delays.begin(), delays.end());
  if (sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& t : out) t += noise(rng);
  return out;
}

std::vector<double> clip_negative(std::span<const double> delays) {
  std::vector<double> out(delays.begin(), delays.end());
  for (double& t : out) t = std::max(t, 0.0);
  return out;
}

bool ParameterBox::contains(const SystemParams& p) const {
  if (!delta.contains(p.delta) || p.gamma != gamma) return false;
  return omega ? omega->contains(p.omega) : p.omega == fixed_omega;
}

void validate(const ParameterBox& box) {
  const auto check = [](const Interval& iv, const char* name, bool positive) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi || iv.lo < 0.0 ||
        (positive && iv.lo <= 0.0))
      throw DomainError(std::string("invalid ") + name + " range");
  };
  check(box.delta, "delta", false);
  if (box.omega) check(*box.omega, "omega", true);
  else if (!(box.fixed_omega > 0.0) || !std::isfinite(box.fixed_omega))
    throw DomainError("invalid fixed omega");
  if (!(box.gamma > 0.0) || !std::isfinite(box.gamma)) throw DomainError("invalid gamma");
}

std::string to_string(Generator g) { return g == Generator::euler ? "euler" : "iid"; }

Generator generator_from_string(const std::string& s) {
  if (s == "iid") return Generator::iid;
  if (s == "euler") return Generator::euler;
  throw DomainError("unknown generator '" + s + "' (expected iid or euler)");
}

void apply_noise(DelayRecord& rec, const NoiseConfig& noise, std::uint64_t seed,
                 std::uint64_t index) {
  if (!(noise.sigma_tau > 0.0)) return;
  Rng rng = child_rng(seed, index, kJitterStream);
  rec.delays = jitter(rec.delays, noise.sigma_tau, rng);
  if (noise.clip_negative_delays) rec.delays = clip_negative(rec.delays);
}

Dataset with_noise(const Dataset& clean, const NoiseConfig& noise) {
  if (clean.meta.noise.sigma_tau != 0.0)
    throw DomainError("with_noise: dataset already carries timing jitter");
  if (!(noise.sigma_tau >= 0.0) || !(noise.sigma_y >= 0.0))
    throw DomainError("with_noise: noise levels must be >= 0");
  Dataset ds = clean;
  ds.meta.noise = noise;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    apply_noise(ds.records[i], noise, ds.meta.seed, i);
  return ds;
}

Dataset generate_dataset(const ParameterBox& box, std::size_t count, int n_clicks,
                         const NoiseConfig& noise, std::uint64_t seed,
                         const GenerateOptions& options) {
  validate(box);
  if (count < 1) throw DomainError("generate_dataset: count must be >= 1");
  if (n_clicks < 1 || n_clicks > 65535) throw DomainError("generate_dataset: bad n_clicks");
  if (!(noise.sigma_tau >= 0.0) || !(noise.sigma_y >= 0.0))
    throw DomainError("generate_dataset: noise levels must be >= 0");

  Dataset ds;
  ds.meta = {n_clicks, box, seed, options.generator, noise, options.euler.dt};
  ds.records.resize(count);

  parallel_for(count, options.threads, [&](std::size_t idx) {
    Rng rng = child_rng(seed, idx);
    SystemParams truth{0.0, box.fixed_omega, box.gamma};
    truth.delta = box.delta.lo + (box.delta.hi - box.delta.lo) * uniform01(rng);
    if (box.omega) truth.omega = box.omega->lo + (box.omega->hi - box.omega->lo) * uniform01(rng);

    DelayRecord rec;
    if (options.generator == Generator::euler) {
      rec = simulate_trajectory_euler(truth, n_clicks, rng, options.euler);
    } else {
      thread_local std::unique_ptr<InverseCdfSampler> sampler;
      if (sampler) sampler->reset(truth);
      else sampler = std::make_unique<InverseCdfSampler>(truth);
      rec.delays.resize(static_cast<std::size_t>(n_clicks));
      for (double& t : rec.delays) t = (*sampler)(rng);
    }
    rec.truth = truth;
    apply_noise(rec, noise, seed, idx);
    ds.records[idx] = std::move(rec);
  });
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  using namespace detail;
  const auto& m = ds.meta;
  const int n_params = m.box.n_params();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  put_magic(os, "PCNT");
  put_le<std::uint16_t>(os, kDatasetFormatVersion);
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(m.n_clicks));
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(n_params));
  put_le<std::uint64_t>(os, ds.records.size());
  put_le<std::uint64_t>(os, m.seed);
  put_f64(os, m.noise.sigma_tau);
  put_f64(os, m.noise.sigma_y);
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(m.generator));
  put_le<std::uint8_t>(os, m.noise.clip_negative_delays ? 1 : 0);
  put_f64(os, m.box.gamma);
  put_f64(os, m.euler_dt);
  put_f64(os, m.box.delta.lo);
  put_f64(os, m.box.delta.hi);
  put_f64(os, m.box.omega ? m.box.omega->lo : m.box.fixed_omega);
  put_f64(os, m.box.omega ? m.box.omega->hi : m.box.fixed_omega);
  for (const auto& r : ds.records) {
    if (r.delays.size() != static_cast<std::size_t>(m.n_clicks))
      throw FormatError("write_dataset: record length differs from n_clicks");
    if (!r.truth) throw FormatError("write_dataset: record without ground truth");
    put_f64(os, r.truth->delta);
    if (n_params == 2) put_f64(os, r.truth->omega);
    for (double t : r.delays) put_f64(os, t);
  }
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

Dataset read_dataset(const std::filesystem::path& path) {
  using namespace detail;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  expect_magic(is, "PCNT", "dataset");
  const auto version = get_le<std::uint16_t>(is, "version");
  if (version != kDatasetFormatVersion)
    throw FormatError("dataset format version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kDatasetFormatVersion) + ")");
  Dataset ds;
  auto& m = ds.meta;
  m.n_clicks = get_le<std::uint16_t>(is, "n_clicks");
  const int n_params = get_le<std::uint8_t>(is, "n_params");
  if (n_params != 1 && n_params != 2) throw FormatError("dataset: n_params must be 1 or 2");
  const auto count = get_le<std::uint64_t>(is, "count");
  m.seed = get_le<std::uint64_t>(is, "seed");
  m.noise.sigma_tau = get_f64(is, "sigma_tau");
  m.noise.sigma_y = get_f64(is, "sigma_y");
  const auto gen = get_le<std::uint8_t>(is, "generator");
  if (gen > 1) throw FormatError("dataset: unknown generator tag");
  m.generator = static_cast<Generator>(gen);
  m.noise.clip_negative_delays = get_le<std::uint8_t>(is, "clip flag") != 0;
  m.box.gamma = get_f64(is, "gamma");
  m.euler_dt = get_f64(is, "euler_dt");
  m.box.delta.lo = get_f64(is, "delta_lo");
  m.box.delta.hi = get_f64(is, "delta_hi");
  const double omega_lo = get_f64(is, "omega_lo");
  const double omega_hi = get_f64(is, "omega_hi");
  if (n_params == 2) m.box.omega = Interval{omega_lo, omega_hi};
  else m.box.fixed_omega = omega_lo;

  // Guard against absurd counts from corrupted headers before allocating.
  const auto here = is.tellg();
  is.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(is.tellg() - here);
  is.seekg(here);
  const std::uint64_t per_record = 8ull * (static_cast<std::uint64_t>(n_params) + m.n_clicks);
  if (count > 0 && remaining / per_record < count)
    throw FormatError("dataset: file shorter than its header claims");

  ds.records.resize(count);
  for (auto& r : ds.records) {
    SystemParams truth{0.0, m.box.fixed_omega, m.box.gamma};
    truth.delta = get_f64(is, "truth");
    if (n_params == 2) truth.omega = get_f64(is, "truth");
    r.truth = truth;
    r.delays.resize(static_cast<std::size_t>(m.n_clicks));
    for (double& t : r.delays) t = get_f64(is, "delays");
  }
  return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  const int n_params = ds.meta.box.n_params();
  os << "delta";
  if (n_params == 2) os << ",omega";
  for (int i = 1; i <= ds.meta.n_clicks; ++i) os << ",tau_" << i;
  os << '\n' << std::setprecision(17);
  for (const auto& r : ds.records) {
    os << (r.truth ? r.truth->delta : 0.0);
    if (n_params == 2) os << ',' << (r.truth ? r.truth->omega : 0.0);
    for (double t : r.delays) os << ',' << t;
    os << '\n';
  }
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pcest::trajsim
