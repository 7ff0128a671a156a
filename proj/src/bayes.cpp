#include "pcest/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "pcest/qdyn.hpp"
#include "pcest/simd/kernels.hpp"

namespace pcest::bayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_support(const trajsim::Interval& iv, const char* what) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi))
    throw DomainError(std::string("degenerate ") + what + " support");
}

}  // namespace

RecordLikelihood::RecordLikelihood(std::span<const double> delays, LikelihoodMode mode)
    : delays_(delays) {
  for (double t : delays) {
    if (!std::isfinite(t) || (mode == LikelihoodMode::strict && t < 0.0))
      throw DomainError("log_likelihood: delays must be finite and non-negative");
    if (t == 0.0) has_zero_ = true;
    sum_tau_ += t;
    sum_log_tau2_ += t == 0.0 ? 0.0 : 2.0 * std::log(std::abs(t));
  }
}

double RecordLikelihood::operator()(const SystemParams& p) const {
  if (delays_.empty()) return 0.0;
  if (has_zero_) return kNegInf;
  const auto c = qdyn::waiting_time_coeffs(p);
  const double n = static_cast<double>(delays_.size());
  return n * c.log_prefactor - c.half_gamma * sum_tau_ + sum_log_tau2_ +
         simd::sum_log_bracket(c.shape, delays_);
}

double log_likelihood(std::span<const double> delays, const SystemParams& p,
                      LikelihoodMode mode) {
  validate_emitting(SystemParams{std::abs(p.delta), p.omega, p.gamma});
  return RecordLikelihood(delays, mode)(p);
}

double log_likelihood(const DelayRecord& record, const SystemParams& p) {
  validate_emitting(p);
  return log_likelihood(record.delays, p, LikelihoodMode::strict);
}

std::vector<double> uniform_axis(const trajsim::Interval& support, std::size_t n) {
  if (n < 2) throw DomainError("uniform_axis: need at least 2 points");
  std::vector<double> axis(n);
  const double step = (support.hi - support.lo) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) axis[k] = support.lo + step * static_cast<double>(k);
  axis.back() = support.hi;
  return axis;
}

PosteriorGrid normalize_log_likelihood(std::vector<std::vector<double>> axes,
                                       std::span<const double> log_likelihood) {
  PosteriorGrid g;
  g.axes = std::move(axes);
  std::size_t expected = 1;
  for (const auto& a : g.axes) expected *= a.size();
  if (log_likelihood.size() != expected)
    throw DomainError("normalize_log_likelihood: size does not match the axes");

  const double peak = *std::max_element(log_likelihood.begin(), log_likelihood.end());
  if (!(peak > kNegInf) || std::isnan(peak))
    throw ImpossibleDataError("all-impossible: the data have zero likelihood on the whole grid");

  g.masses.resize(expected);
  double total = 0.0;
  for (std::size_t k = 0; k < expected; ++k) {
    g.masses[k] = std::exp(log_likelihood[k] - peak);
    total += g.masses[k];
  }
  for (double& m : g.masses) m /= total;
  g.log_evidence = peak + std::log(total / static_cast<double>(expected));
  return g;
}

PosteriorGrid posterior_1d(std::span<const double> delays, const Posterior1dOptions& opt) {
  check_support(opt.support, "delta");
  if (opt.n_grid < 2) throw DomainError("posterior_1d: n_grid must be >= 2");
  const RecordLikelihood like(delays, opt.mode);
  auto axis = uniform_axis(opt.support, opt.n_grid);
  std::vector<double> logl(axis.size());
  for (std::size_t k = 0; k < axis.size(); ++k)
    logl[k] = like(SystemParams{axis[k], opt.fixed_omega, opt.gamma});
  return normalize_log_likelihood({std::move(axis)}, logl);
}

PosteriorGrid posterior_2d(std::span<const double> delays, const Posterior2dOptions& opt) {
  check_support(opt.delta, "delta");
  check_support(opt.omega, "omega");
  if (opt.omega.lo <= 0.0) throw DomainError("posterior_2d: omega support must be > 0");
  if (opt.n_delta < 2 || opt.n_omega < 2) throw DomainError("posterior_2d: grid too small");
  const RecordLikelihood like(delays, opt.mode);
  auto da = uniform_axis(opt.delta, opt.n_delta);
  auto oa = uniform_axis(opt.omega, opt.n_omega);
  std::vector<double> logl(da.size() * oa.size());
  for (std::size_t i = 0; i < da.size(); ++i)
    for (std::size_t j = 0; j < oa.size(); ++j)
      logl[i * oa.size() + j] = like(SystemParams{da[i], oa[j], opt.gamma});
  return normalize_log_likelihood({std::move(da), std::move(oa)}, logl);
}

PosteriorGrid classical_posterior(std::span<const double> delays, const Posterior1dOptions& opt) {
  check_support(opt.support, "delta");
  if (delays.empty()) throw DomainError("classical_posterior: empty record");
  for (double t : delays)
    if (!std::isfinite(t) || (opt.mode == LikelihoodMode::strict && t < 0.0))
      throw DomainError("classical_posterior: delays must be finite and non-negative");
  double sum = 0.0;
  for (double t : delays) sum += t;
  const int n = static_cast<int>(delays.size());
  const double mean = sum / n;

  auto axis = uniform_axis(opt.support, opt.n_grid);
  std::vector<double> logl(axis.size());
  for (std::size_t k = 0; k < axis.size(); ++k) {
    const auto m = qdyn::classical_moments(SystemParams{axis[k], opt.fixed_omega, opt.gamma}, n);
    const double z = (mean - m.mu) / m.sigma;
    logl[k] = -std::log(m.sigma) - 0.5 * z * z;
  }
  return normalize_log_likelihood({std::move(axis)}, logl);
}

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::bayes_mean: return "bayes-mean";
    case EstimateMethod::bayes_map: return "bayes-map";
    case EstimateMethod::classical_mean: return "classical-mean";
    case EstimateMethod::nn: return "nn";
  }
  return "unknown";
}

Estimate estimate_mean(const PosteriorGrid& p, EstimateMethod method) {
  Estimate e;
  e.method = method;
  e.values.assign(p.dims(), 0.0);
  if (p.dims() == 1) {
    for (std::size_t i = 0; i < p.axes[0].size(); ++i) e.values[0] += p.axes[0][i] * p.masses[i];
    return e;
  }
  const std::size_t no = p.axes[1].size();
  for (std::size_t i = 0; i < p.axes[0].size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < no; ++j) {
      const double m = p.masses[i * no + j];
      row += m;
      e.values[1] += p.axes[1][j] * m;
    }
    e.values[0] += p.axes[0][i] * row;
  }
  return e;
}

Estimate estimate_map(const PosteriorGrid& p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.masses.size(); ++k)
    if (p.masses[k] > p.masses[best]) best = k;
  Estimate e;
  e.method = EstimateMethod::bayes_map;
  if (p.dims() == 1) {
    e.values = {p.axes[0][best]};
  } else {
    const std::size_t no = p.axes[1].size();
    e.values = {p.axes[0][best / no], p.axes[1][best % no]};
  }
  return e;
}

void write_posterior_csv(const std::filesystem::path& path, const PosteriorGrid& p) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(17);
  if (p.dims() == 1) {
    os << "delta,mass\n";
    for (std::size_t i = 0; i < p.axes[0].size(); ++i)
      os << p.axes[0][i] << ',' << p.masses[i] << '\n';
  } else {
    os << "delta,omega,mass\n";
    for (std::size_t i = 0; i < p.axes[0].size(); ++i)
      for (std::size_t j = 0; j < p.axes[1].size(); ++j)
        os << p.axes[0][i] << ',' << p.axes[1][j] << ',' << p.mass(i, j) << '\n';
  }
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pcest::bayes
