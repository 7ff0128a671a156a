#include "pcest/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pcest/parallel.hpp"
#include "pcest/trajsim.hpp"

namespace pcest::bench {

namespace {

bool needs_posterior(const std::vector<EstimateMethod>& m) {
  return std::any_of(m.begin(), m.end(), [](EstimateMethod e) {
    return e == EstimateMethod::bayes_mean || e == EstimateMethod::bayes_map;
  });
}

bool has(const std::vector<EstimateMethod>& m, EstimateMethod e) {
  return std::find(m.begin(), m.end(), e) != m.end();
}

// Two-sided exact sign test for k successes out of n fair trials.
double sign_test(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(wins, losses);
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i)
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                     static_cast<double>(n) * std::log(2.0));
  return std::min(1.0, 2.0 * tail);
}

void check_suite(const ValidationGrid& grid, const EstimatorSuite& suite) {
  if (suite.methods.empty()) throw DomainError("run_validation: no estimators requested");
  if (!(suite.sigma_tau >= 0.0)) throw DomainError("run_validation: sigma_tau must be >= 0");
  if (has(suite.methods, EstimateMethod::nn)) {
    if (!suite.model) throw DomainError("run_validation: the nn estimator needs a trained model");
    const auto& m = *suite.model;
    if (m.output_dim() != grid.dims)
      throw DomainError("run_validation: model dimension does not match the grid");
    if (m.n_clicks != grid.n_clicks)
      throw DomainError("run_validation: model was trained for a different n_clicks");
    if (grid.dims == 1)
      for (const auto& p : grid.points)
        if (p.omega != m.support.fixed_omega)
          throw DomainError("run_validation: grid omega differs from the model's fixed omega");
  }
  if (grid.dims == 2 && has(suite.methods, EstimateMethod::classical_mean))
    throw DomainError("run_validation: the classical estimator is one-dimensional");
  if (needs_posterior(suite.methods) || has(suite.methods, EstimateMethod::classical_mean)) {
    for (const auto& p : grid.points) {
      const bool inside =
          grid.dims == 1 ? suite.posterior_1d.support.contains(p.delta)
                         : suite.posterior_2d.delta.contains(p.delta) &&
                               suite.posterior_2d.omega.contains(p.omega);
      if (!inside) throw DomainError("run_validation: grid point outside the posterior support");
    }
  }
}

}  // namespace

ValidationGrid ValidationGrid::grid_1d(std::size_t n, double lo, double hi, double omega,
                                       double gamma) {
  ValidationGrid g;
  for (double d : bayes::uniform_axis({lo, hi}, n)) g.points.push_back({d, omega, gamma});
  return g;
}

ValidationGrid ValidationGrid::grid_2d(std::size_t n, double gamma) {
  ValidationGrid g;
  g.dims = 2;
  const auto da = bayes::uniform_axis({0.0, 2.1}, n);
  const auto oa = bayes::uniform_axis({0.25, 2.1}, n);
  for (double d : da)
    for (double o : oa) g.points.push_back({d, o, gamma});
  return g;
}

ValidationGrid ValidationGrid::from_deltas(std::span<const double> deltas, double omega,
                                           double gamma) {
  ValidationGrid g;
  for (double d : deltas) g.points.push_back({d, omega, gamma});
  return g;
}

void validate(const ValidationGrid& g) {
  if (g.points.empty()) throw DomainError("validation grid is empty");
  if (g.dims != 1 && g.dims != 2) throw DomainError("validation grid dims must be 1 or 2");
  if (g.trajectories_per_point < 1 || g.n_clicks < 1)
    throw DomainError("validation grid needs trajectories and clicks");
  for (const auto& p : g.points) validate_emitting(p);
}

EstimateMethod method_from_string(const std::string& s) {
  for (auto m : {EstimateMethod::bayes_mean, EstimateMethod::bayes_map,
                 EstimateMethod::classical_mean, EstimateMethod::nn})
    if (bayes::to_string(m) == s) return m;
  if (s == "bayes") return EstimateMethod::bayes_mean;
  if (s == "classical") return EstimateMethod::classical_mean;
  throw DomainError("unknown estimator '" + s + "'");
}

std::vector<EstimateMethod> methods_from_string(const std::string& list) {
  std::vector<EstimateMethod> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(method_from_string(item));
  if (out.empty()) throw DomainError("empty estimator list");
  return out;
}

PointMetrics point_metrics(const SystemParams& truth, int dims,
                           std::span<const bayes::Estimate> estimates) {
  PointMetrics m;
  m.truth = truth;
  m.n_samples = estimates.size();
  if (estimates.empty()) throw DomainError("point_metrics: no estimates");
  double se = 0.0, sum = 0.0, se_o = 0.0, sum_o = 0.0;
  for (const auto& e : estimates) {
    if (static_cast<int>(e.values.size()) < dims)
      throw DomainError("point_metrics: estimate has too few components");
    const double err = e.values[0] - truth.delta;
    se += err * err;
    sum += err;
    if (dims == 2) {
      const double eo = e.values[1] - truth.omega;
      se_o += eo * eo;
      sum_o += eo;
    }
  }
  const double n = static_cast<double>(estimates.size());
  m.rmse = std::sqrt(se / n);
  m.bias = sum / n;
  m.variance = std::max(0.0, se / n - m.bias * m.bias);
  if (dims == 2) {
    m.rmse_omega = std::sqrt(se_o / n);
    m.bias_omega = sum_o / n;
  }
  m.rmse_euclid = std::sqrt(m.rmse * m.rmse + m.rmse_omega * m.rmse_omega);
  return m;
}

std::vector<MetricTable> run_validation(const ValidationGrid& grid, const EstimatorSuite& suite,
                                        const RunOptions& options) {
  validate(grid);
  check_suite(grid, suite);
  const std::size_t n_methods = suite.methods.size();
  const std::size_t n_traj = grid.trajectories_per_point;
  const bool posterior = needs_posterior(suite.methods);
  const auto mode = suite.sigma_tau > 0.0 ? bayes::LikelihoodMode::formal
                                          : bayes::LikelihoodMode::strict;

  std::vector<MetricTable> tables(n_methods);
  for (std::size_t k = 0; k < n_methods; ++k) {
    tables[k].method = suite.methods[k];
    tables[k].dims = grid.dims;
    tables[k].points.resize(grid.points.size());
    if (options.keep_estimates) tables[k].delta_estimates.resize(grid.points.size());
  }

  parallel_for(grid.points.size(), options.threads, [&](std::size_t p) {
    const SystemParams& truth = grid.points[p];
    const trajsim::InverseCdfSampler sampler(truth);
    auto opt1 = suite.posterior_1d;
    opt1.fixed_omega = truth.omega;
    opt1.gamma = truth.gamma;
    opt1.mode = mode;
    auto opt2 = suite.posterior_2d;
    opt2.gamma = truth.gamma;
    opt2.mode = mode;

    std::vector<std::vector<bayes::Estimate>> est(n_methods,
                                                  std::vector<bayes::Estimate>(n_traj));
    std::vector<double> delays(static_cast<std::size_t>(grid.n_clicks));
    for (std::size_t t = 0; t < n_traj; ++t) {
      auto rng = child_rng(options.seed, t, p + 1);
      for (double& d : delays) d = sampler(rng);
      const std::vector<double> noisy = trajsim::jitter(delays, suite.sigma_tau, rng);

      std::optional<bayes::PosteriorGrid> post;
      if (posterior)
        post = grid.dims == 1 ? bayes::posterior_1d(noisy, opt1) : bayes::posterior_2d(noisy, opt2);
      for (std::size_t k = 0; k < n_methods; ++k) {
        switch (suite.methods[k]) {
          case EstimateMethod::bayes_mean: est[k][t] = bayes::estimate_mean(*post); break;
          case EstimateMethod::bayes_map: est[k][t] = bayes::estimate_map(*post); break;
          case EstimateMethod::classical_mean:
            est[k][t] = bayes::estimate_mean(bayes::classical_posterior(noisy, opt1),
                                             EstimateMethod::classical_mean);
            break;
          case EstimateMethod::nn:
            est[k][t] = nnest::forward(*suite.model, suite.sigma_tau > 0.0
                                                         ? trajsim::clip_negative(noisy)
                                                         : noisy);
            break;
        }
      }
    }
    for (std::size_t k = 0; k < n_methods; ++k) {
      tables[k].points[p] = point_metrics(truth, grid.dims, est[k]);
      if (options.keep_estimates) {
        auto& out = tables[k].delta_estimates[p];
        for (const auto& e : est[k]) out.push_back(e.values[0]);
      }
    }
  });
  return tables;
}

Comparison compare_tables(const MetricTable& a, const MetricTable& b) {
  if (a.dims != b.dims || a.points.size() != b.points.size())
    throw DomainError("compare_tables: grids differ");
  Comparison c;
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& pa = a.points[i];
    const auto& pb = b.points[i];
    if (!(pa.truth == pb.truth)) throw DomainError("compare_tables: grids differ");
    const double ra = pa.rmse_euclid, rb = pb.rmse_euclid;
    c.ratios.push_back(rb > 0.0 ? ra / rb : (ra > 0.0 ? INFINITY : 1.0));
    sum_a += ra;
    sum_b += rb;
    if (ra < rb) ++c.wins;
    else if (ra > rb) ++c.losses;
    else ++c.ties;
  }
  if (!c.ratios.empty()) {
    double s = 0.0;
    for (double r : c.ratios) s += r;
    c.mean_ratio = s / static_cast<double>(c.ratios.size());
  }
  c.ratio_of_means = sum_b > 0.0 ? sum_a / sum_b : 1.0;
  c.sign_test_p = sign_test(c.wins, c.losses);
  return c;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricTable> tables) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(12);
  os << "method,delta,omega,n_samples,rmse,bias,variance,rmse_omega,bias_omega,rmse_euclid\n";
  for (const auto& t : tables)
    for (const auto& p : t.points)
      os << bayes::to_string(t.method) << ',' << p.truth.delta << ',' << p.truth.omega << ','
         << p.n_samples << ',' << p.rmse << ',' << p.bias << ',' << p.variance << ','
         << p.rmse_omega << ',' << p.bias_omega << ',' << p.rmse_euclid << '\n';
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<NoiseSweepRow> noise_sweep(const NoiseSweepConfig& cfg) {
  if (!cfg.training) throw DomainError("noise_sweep: training dataset required");
  if (cfg.levels.empty()) throw DomainError("noise_sweep: no noise levels");
  const auto arch = cfg.grid.dims == 1 ? nnest::Arch::d1 : nnest::Arch::d2;
  std::vector<NoiseSweepRow> rows;
  for (double level : cfg.levels) {
    if (!(level >= 0.0)) throw DomainError("noise_sweep: noise levels must be >= 0");
    nnest::TrainConfig tc = cfg.train;
    EstimatorSuite suite;
    suite.methods = {EstimateMethod::nn, EstimateMethod::bayes_mean};
    nnest::TrainResult trained;
    if (cfg.kind == NoiseKind::jitter) {
      trajsim::NoiseConfig noise;
      noise.sigma_tau = level;
      trained = nnest::train(trajsim::with_noise(*cfg.training, noise), tc, arch);
      suite.sigma_tau = level;
    } else {
      tc.sigma_y = level;
      trained = nnest::train(*cfg.training, tc, arch);
    }
    suite.model = trained.model;
    auto tables = run_validation(cfg.grid, suite, cfg.run);
    rows.push_back({level, std::move(tables[0]), std::move(tables[1]), trained.history});
  }
  return rows;
}

void write_noise_sweep_csv(const std::filesystem::path& path, NoiseKind kind,
                           std::span<const NoiseSweepRow> rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(12) << "kind,level,method,delta,omega,rmse,bias\n";
  const char* k = kind == NoiseKind::jitter ? "sigma_tau" : "sigma_y";
  for (const auto& r : rows)
    for (const MetricTable* t : {&r.nn, &r.bayes})
      for (const auto& p : t->points)
        os << k << ',' << r.level << ',' << bayes::to_string(t->method) << ',' << p.truth.delta
           << ',' << p.truth.omega << ',' << p.rmse << ',' << p.bias << '\n';
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pcest::bench
