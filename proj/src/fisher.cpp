#include "pcest/fisher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pcest/bayes.hpp"
#include "pcest/parallel.hpp"
#include "pcest/qdyn.hpp"
#include "pcest/trajsim.hpp"

namespace pcest::fisher {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTauMax = 200.0;

void check_step(double step, double lo, double hi, const char* what) {
  if (!(step >= lo && step <= hi))
    throw DomainError(std::string(what) + ": step out of range");
}

SystemParams shifted(const SystemParams& p, double dd) {
  return {p.delta + dd, p.omega, p.gamma};
}

}  // namespace

double fisher_per_trajectory(const SystemParams& p, int n_clicks, double d_delta) {
  validate_emitting(p);
  if (n_clicks < 1) throw DomainError("fisher_per_trajectory: n_clicks must be >= 1");
  check_step(d_delta, 1e-5, 1e-2, "fisher_per_trajectory");

  const auto c0 = qdyn::waiting_time_coeffs(p);
  const auto cp = qdyn::waiting_time_coeffs(shifted(p, d_delta));
  const auto cm = qdyn::waiting_time_coeffs(shifted(p, -d_delta));
  auto integrand = [&](double tau) {
    if (tau <= 0.0) return 0.0;
    const double w = std::exp(qdyn::log_waiting_time_density_formal(tau, c0));
    if (w == 0.0) return 0.0;
    const double score = (qdyn::log_waiting_time_density_formal(tau, cp) -
                          qdyn::log_waiting_time_density_formal(tau, cm)) /
                         (2.0 * d_delta);
    return w * score * score;
  };

  double error = 0.0;
  const double per_click = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, kTauMax, 20, 1e-12, &error);
  if (!std::isfinite(per_click) || error > 1e-8 * std::max(per_click, 1e-6))
    throw NumericalError("fisher_per_trajectory: quadrature did not converge");
  return n_clicks * per_click;
}

SampledFisher fisher_sampled(const SystemParams& p, std::size_t n_traj, int n_clicks,
                             std::uint64_t seed, double d_delta, std::size_t threads) {
  validate_emitting(p);
  if (n_traj < 100) throw DomainError("fisher_sampled: n_traj must be >= 100");
  if (n_clicks < 1) throw DomainError("fisher_sampled: n_clicks must be >= 1");
  check_step(d_delta, 1e-5, 1e-2, "fisher_sampled");

  const trajsim::InverseCdfSampler sampler(p);
  const SystemParams hi = shifted(p, d_delta), lo = shifted(p, -d_delta);
  std::vector<double> sq(n_traj);
  parallel_for(n_traj, threads, [&](std::size_t i) {
    auto rng = child_rng(seed, i);
    std::vector<double> delays(static_cast<std::size_t>(n_clicks));
    for (double& t : delays) t = sampler(rng);
    const bayes::RecordLikelihood like(delays);
    const double score = (like(hi) - like(lo)) / (2.0 * d_delta);
    sq[i] = score * score;
  });

  double mean = 0.0;
  for (double s : sq) mean += s;
  mean /= static_cast<double>(n_traj);
  double var = 0.0;
  for (double s : sq) var += (s - mean) * (s - mean);
  var /= static_cast<double>(n_traj - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_traj)), n_traj};
}

std::complex<double> leading_eigenvalue(const SystemParams& left, const SystemParams& right) {
  const auto l = qdyn::liouvillian(left, right);
  Eigen::ComplexEigenSolver<qdyn::Matrix4c> solver(l.entries, false);
  if (solver.info() != Eigen::Success) throw NumericalError("leading_eigenvalue: solver failed");
  std::array<std::complex<double>, 4> ev;
  for (int k = 0; k < 4; ++k) ev[k] = solver.eigenvalues()[k];
  std::sort(ev.begin(), ev.end(),
            [](auto a, auto b) { return a.real() > b.real(); });
  if (std::abs(ev[0] - ev[1]) < 1e-8)
    throw NumericalError("leading_eigenvalue: ambiguous eigenvalue branch");
  return ev[0];
}

double qfi(const SystemParams& p, int n_clicks, double h) {
  validate_emitting(p);
  if (n_clicks < 1) throw DomainError("qfi: n_clicks must be >= 1");
  check_step(h, 1e-4, 1e-2, "qfi");
  const SystemParams a = shifted(p, h), b = shifted(p, -h);
  const double mixed = (leading_eigenvalue(a, a).real() - leading_eigenvalue(a, b).real() -
                        leading_eigenvalue(b, a).real() + leading_eigenvalue(b, b).real()) /
                       (4.0 * h * h);
  const double duration = n_clicks / (p.gamma * qdyn::steady_state_population(p));
  return 4.0 * duration * mixed;
}

BiasCurve empirical_bias(std::span<const double> estimates, std::span<const double> truths,
                         std::size_t min_samples) {
  if (estimates.size() != truths.size())
    throw DomainError("empirical_bias: estimates and truths differ in length");
  std::map<double, std::vector<double>> groups;
  for (std::size_t k = 0; k < truths.size(); ++k)
    groups[truths[k]].push_back(estimates[k] - truths[k]);
  if (groups.size() < 2) throw DomainError("empirical_bias: need at least two grid points");

  BiasCurve c;
  for (const auto& [theta, err] : groups) {
    if (err.size() < std::max<std::size_t>(min_samples, 2))
      throw InsufficientSamplesError("empirical_bias: too few estimates at a grid point");
    double mean = 0.0;
    for (double e : err) mean += e;
    mean /= static_cast<double>(err.size());
    double var = 0.0;
    for (double e : err) var += (e - mean) * (e - mean);
    var /= static_cast<double>(err.size() - 1);
    c.theta.push_back(theta);
    c.bias.push_back(mean);
    c.bias_se.push_back(std::sqrt(var / static_cast<double>(err.size())));
    c.n_samples.push_back(err.size());
  }

  const std::size_t n = c.theta.size();
  std::vector<double> smooth = c.bias;
  for (std::size_t i = 1; i + 1 < n; ++i)
    smooth[i] = (c.bias[i - 1] + c.bias[i] + c.bias[i + 1]) / 3.0;
  c.slope.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    c.slope[i] = (smooth[hi] - smooth[lo]) / (c.theta[hi] - c.theta[lo]);
  }
  return c;
}

double biased_crb_variance(double fisher, double bias_slope, int eta) {
  if (!(fisher > 0.0)) throw DomainError("biased_crb: Fisher information must be > 0");
  if (eta < 1) throw DomainError("biased_crb: eta must be >= 1");
  const double g = 1.0 + bias_slope;
  return g * g / (eta * fisher);
}

double biased_crb(double fisher, double bias_slope, double bias, int eta) {
  return std::sqrt(biased_crb_variance(fisher, bias_slope, eta) + bias * bias);
}

FisherReport fisher_report(std::span<const double> deltas, double omega, double gamma,
                           int n_clicks, const std::optional<BiasCurve>& bias, int eta,
                           double d_delta, double h) {
  if (bias && bias->theta.size() != deltas.size())
    throw DomainError("fisher_report: bias curve does not match the delta grid");
  FisherReport r;
  r.theta.assign(deltas.begin(), deltas.end());
  r.omega = omega;
  r.gamma = gamma;
  r.n_clicks = n_clicks;
  r.eta = eta;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (bias && std::abs(bias->theta[i] - deltas[i]) > 1e-12)
      throw DomainError("fisher_report: bias curve does not match the delta grid");
    const SystemParams p{deltas[i], omega, gamma};
    const double f = fisher_per_trajectory(p, n_clicks, d_delta);
    const double q = qfi(p, n_clicks, h);
    const double b = bias ? bias->bias[i] : 0.0;
    const double s = bias ? bias->slope[i] : 0.0;
    r.fisher.push_back(f);
    r.qfi.push_back(q);
    r.bias.push_back(b);
    r.bias_slope.push_back(s);
    r.crb_variance.push_back(f > 0.0 ? biased_crb_variance(f, s, eta) : kNaN);
    r.qcrb_variance.push_back(q > 0.0 ? biased_crb_variance(q, s, eta) : kNaN);
    r.crb_rmse.push_back(f > 0.0 ? biased_crb(f, s, b, eta) : kNaN);
    r.qcrb_rmse.push_back(q > 0.0 ? biased_crb(q, s, b, eta) : kNaN);
  }
  return r;
}

void write_fisher_csv(const std::filesystem::path& path, const FisherReport& r) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(12);
  os << "delta,fisher,qfi,bias,slope,crb_var,qcrb_var,crb_rmse,qcrb_rmse\n";
  for (std::size_t i = 0; i < r.theta.size(); ++i)
    os << r.theta[i] << ',' << r.fisher[i] << ',' << r.qfi[i] << ',' << r.bias[i] << ','
       << r.bias_slope[i] << ',' << r.crb_variance[i] << ',' << r.qcrb_variance[i] << ','
       << r.crb_rmse[i] << ',' << r.qcrb_rmse[i] << '\n';
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pcest::fisher
