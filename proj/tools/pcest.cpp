// pcest: photon-counting parameter estimation from the command line.
//
// Files (datasets, models) always hold internal units, gamma = 1. The
// --gamma-units flag gives gamma in the caller's units; rates typed on the
// command line and rates/times written to CSV are converted at this boundary.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcest/bayes.hpp"
#include "pcest/bench.hpp"
#include "pcest/fisher.hpp"
#include "pcest/nnest.hpp"
#include "pcest/parallel.hpp"
#include "pcest/simd/kernels.hpp"
#include "pcest/trajsim.hpp"

using namespace pcest;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
  std::uint64_t seed = 0;
  double gamma = 1.0;  ///< gamma in the caller's units
  std::size_t threads = 1;
  std::string isa = "auto";

  double rate_in(double x) const { return x / gamma; }
  double rate_out(double x) const { return x * gamma; }
  double time_in(double t) const { return t * gamma; }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed of the run")->capture_default_str();
  app->add_option("--gamma-units", c.gamma,
                  "Decay rate gamma in your units; rates are read and written in these "
                  "units, times in their inverse")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str();
  app->add_option("--isa", c.isa, "Kernel set: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
}

void apply_isa(const Common& c) {
  if (c.isa == "scalar") simd::set_isa(simd::Isa::scalar);
  else if (c.isa == "avx2") simd::set_isa(simd::Isa::avx2);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

// "lo:hi:n" or a comma-separated list.
std::vector<double> parse_grid(const std::string& s) {
  if (s.find(':') == std::string::npos) return parse_list(s);
  std::stringstream ss(s);
  std::string lo, hi, n;
  std::getline(ss, lo, ':');
  std::getline(ss, hi, ':');
  std::getline(ss, n, ':');
  return bayes::uniform_axis({std::stod(lo), std::stod(hi)}, std::stoul(n));
}

void write_sidecar(const std::string& out, const std::string& command, const Common& c,
                   json config) {
  json j;
  j["tool"] = "pcest";
  j["version"] = kVersion;
  j["command"] = command;
  j["seed"] = c.seed;
  j["gamma_units"] = c.gamma;
  j["threads"] = c.threads;
  j["isa"] = std::string(simd::isa_name(simd::active_isa()));
  j["config"] = std::move(config);
  std::ofstream os(out + ".json");
  if (!os) throw IoError("cannot write sidecar '" + out + ".json'");
  os << j.dump(2) << '\n';
}

// simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::optional<double> delta, omega;
  std::string box = "1d";
  int n_clicks = 48;
  std::size_t count = 1000;
  std::string method = "iid";
  double dt = 1e-3;
  double sigma_tau = 0.0;
  bool no_clip = false;
  std::string out, csv;
};

void run_simulate(const SimulateArgs& a, const Common& c) {
  trajsim::ParameterBox box = a.box == "2d" ? trajsim::ParameterBox::training_2d()
                                            : trajsim::ParameterBox::training_1d();
  if (a.delta) {
    const double om = a.omega ? c.rate_in(*a.omega) : 1.0;
    box = trajsim::ParameterBox::point({c.rate_in(*a.delta), om, 1.0});
    if (!a.omega) {
      box.omega.reset();
      box.fixed_omega = 1.0;
    }
  } else if (a.omega) {
    box.omega.reset();
    box.fixed_omega = c.rate_in(*a.omega);
  }
  trajsim::NoiseConfig noise;
  noise.sigma_tau = c.time_in(a.sigma_tau);
  noise.clip_negative_delays = !a.no_clip;
  trajsim::GenerateOptions opt;
  opt.generator = trajsim::generator_from_string(a.method);
  opt.euler.dt = c.time_in(a.dt);
  opt.threads = c.threads;
  const auto ds = trajsim::generate_dataset(box, a.count, a.n_clicks, noise, c.seed, opt);
  trajsim::write_dataset(a.out, ds);
  if (!a.csv.empty()) trajsim::write_dataset_csv(a.csv, ds);
  write_sidecar(a.out, "simulate", c,
                {{"n_clicks", a.n_clicks}, {"count", a.count}, {"method", a.method},
                 {"dt", a.dt}, {"sigma_tau", a.sigma_tau}, {"clip_negative_delays", !a.no_clip},
                 {"delta_range", {box.delta.lo, box.delta.hi}},
                 {"omega_range", box.omega ? json{box.omega->lo, box.omega->hi}
                                           : json{box.fixed_omega, box.fixed_omega}}});
  std::cout << "wrote " << ds.records.size() << " records to " << a.out << '\n';
}

// train --------------------------------------------------------------------

struct TrainArgs {
  std::string dataset, arch = "1d", out, loss_csv, init = "glorot-uniform";
  int epochs = 200;
  std::size_t batch = 12800;
  double lr = 1e-3, sigma_y = 0.0, train_fraction = 0.8;
};

void run_train(const TrainArgs& a, const Common& c) {
  const auto ds = trajsim::read_dataset(a.dataset);
  nnest::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.sigma_y = c.rate_in(a.sigma_y);
  cfg.train_fraction = a.train_fraction;
  cfg.init = a.init;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = nnest::train(ds, cfg, nnest::arch_from_string(a.arch));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nnest::write_model(a.out, res.model);
  const std::string loss_path = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
  nnest::write_loss_csv(loss_path, res.history);
  write_sidecar(a.out, "train", c,
                {{"dataset", a.dataset}, {"arch", a.arch}, {"epochs", a.epochs},
                 {"batch", a.batch}, {"lr", a.lr}, {"sigma_y", a.sigma_y},
                 {"train_fraction", a.train_fraction}, {"init", res.model.init},
                 {"parameters", res.model.parameter_count()}, {"seconds", secs},
                 {"final_train_msle", res.history.train_msle.back()},
                 {"final_val_msle", res.history.val_msle.back()}});
  std::cout << "trained " << res.model.parameter_count() << " parameters; final msle "
            << res.history.train_msle.back() << " (val " << res.history.val_msle.back()
            << ")\n";
}

// infer --------------------------------------------------------------------

struct InferArgs {
  std::string model, bayes, dataset, out;
  bool classical = false, map = false;
  std::size_t n_grid = 0;
};

void run_infer(const InferArgs& a, const Common& c) {
  const int chosen = !a.model.empty() + !a.bayes.empty() + a.classical;
  if (chosen != 1) throw DomainError("infer: choose exactly one of --model, --bayes, --classical");
  const auto ds = trajsim::read_dataset(a.dataset);
  const bool noisy = ds.meta.noise.sigma_tau > 0.0;
  const auto mode = noisy ? bayes::LikelihoodMode::formal : bayes::LikelihoodMode::strict;
  std::vector<bayes::Estimate> est(ds.records.size());
  std::optional<nnest::HistDenseModel> model;
  if (!a.model.empty()) model = nnest::read_model(a.model);

  parallel_for(ds.records.size(), c.threads, [&](std::size_t i) {
    const auto& r = ds.records[i];
    if (model) {
      est[i] = nnest::forward(*model, r.delays);
    } else if (a.classical || a.bayes == "1d") {
      bayes::Posterior1dOptions o;
      o.fixed_omega = ds.meta.box.omega ? r.truth->omega : ds.meta.box.fixed_omega;
      o.mode = mode;
      if (a.n_grid) o.n_grid = a.n_grid;
      const auto post = a.classical ? bayes::classical_posterior(r.delays, o)
                                    : bayes::posterior_1d(r.delays, o);
      est[i] = a.map ? bayes::estimate_map(post)
                     : bayes::estimate_mean(post, a.classical ? bayes::EstimateMethod::classical_mean
                                                              : bayes::EstimateMethod::bayes_mean);
    } else if (a.bayes == "2d") {
      bayes::Posterior2dOptions o;
      o.mode = mode;
      if (a.n_grid) o.n_delta = o.n_omega = a.n_grid;
      const auto post = bayes::posterior_2d(r.delays, o);
      est[i] = a.map ? bayes::estimate_map(post) : bayes::estimate_mean(post);
    } else {
      throw DomainError("infer: --bayes must be 1d or 2d");
    }
  });

  std::ofstream os(a.out);
  if (!os) throw IoError("cannot open '" + a.out + "' for writing");
  os << std::setprecision(12) << "index,method,true_delta,true_omega,est_delta,est_omega\n";
  for (std::size_t i = 0; i < est.size(); ++i) {
    const auto& t = ds.records[i].truth;
    const auto& v = est[i].values;
    os << i << ',' << bayes::to_string(est[i].method) << ','
       << (t ? c.rate_out(t->delta) : NAN) << ',' << (t ? c.rate_out(t->omega) : NAN) << ','
       << c.rate_out(v[0]) << ',' << (v.size() > 1 ? c.rate_out(v[1]) : NAN) << '\n';
  }
  write_sidecar(a.out, "infer", c,
                {{"dataset", a.dataset}, {"model", a.model}, {"bayes", a.bayes},
                 {"classical", a.classical}, {"estimator", a.map ? "map" : "mean"},
                 {"likelihood", noisy ? "formal" : "strict"}, {"records", est.size()}});
  std::cout << "wrote " << est.size() << " estimates to " << a.out << '\n';
}

// bench --------------------------------------------------------------------

struct BenchArgs {
  std::string grid = "1d", estimators = "bayes-mean,classical-mean", model, out, deltas;
  std::size_t per_point = 1000, n_points = 40;
  double omega = 1.0, sigma_tau = 0.0;
};

bench::ValidationGrid make_grid(const BenchArgs& a, const Common& c) {
  bench::ValidationGrid g;
  if (a.grid == "2d") {
    g = bench::ValidationGrid::grid_2d(a.n_points);
  } else if (!a.deltas.empty()) {
    auto d = parse_grid(a.deltas);
    for (double& x : d) x = c.rate_in(x);
    g = bench::ValidationGrid::from_deltas(d, c.rate_in(a.omega));
  } else {
    g = bench::ValidationGrid::grid_1d(a.n_points, 0.0, 2.1, c.rate_in(a.omega));
  }
  g.trajectories_per_point = a.per_point;
  return g;
}

void write_tables_csv(const std::string& path, const std::vector<bench::MetricTable>& tables,
                      const Common& c) {
  auto scaled = tables;
  for (auto& t : scaled)
    for (auto& p : t.points) {
      p.truth.delta = c.rate_out(p.truth.delta);
      p.truth.omega = c.rate_out(p.truth.omega);
      p.truth.gamma = c.rate_out(p.truth.gamma);
      p.rmse = c.rate_out(p.rmse);
      p.bias = c.rate_out(p.bias);
      p.variance = c.rate_out(c.rate_out(p.variance));
      p.rmse_omega = c.rate_out(p.rmse_omega);
      p.bias_omega = c.rate_out(p.bias_omega);
      p.rmse_euclid = c.rate_out(p.rmse_euclid);
    }
  bench::write_metrics_csv(path, scaled);
}

void run_bench(const BenchArgs& a, const Common& c) {
  bench::EstimatorSuite suite;
  suite.methods = bench::methods_from_string(a.estimators);
  if (!a.model.empty()) suite.model = nnest::read_model(a.model);
  suite.sigma_tau = c.time_in(a.sigma_tau);
  const auto grid = make_grid(a, c);
  const auto tables = bench::run_validation(grid, suite, {c.seed, c.threads, false});
  write_tables_csv(a.out, tables, c);

  json summary = json::array();
  for (std::size_t i = 0; i < tables.size(); ++i)
    for (std::size_t j = 0; j < tables.size(); ++j) {
      if (i == j) continue;
      const auto cmp = bench::compare_tables(tables[i], tables[j]);
      summary.push_back({{"a", bayes::to_string(tables[i].method)},
                         {"b", bayes::to_string(tables[j].method)},
                         {"mean_ratio", cmp.mean_ratio},
                         {"ratio_of_means", cmp.ratio_of_means},
                         {"wins", cmp.wins},
                         {"losses", cmp.losses},
                         {"sign_test_p", cmp.sign_test_p}});
    }
  write_sidecar(a.out, "bench", c,
                {{"grid", a.grid}, {"points", grid.points.size()}, {"per_point", a.per_point},
                 {"estimators", a.estimators}, {"model", a.model}, {"sigma_tau", a.sigma_tau},
                 {"comparisons", summary}});
  std::cout << "wrote " << tables.size() << " tables over " << grid.points.size()
            << " grid points to " << a.out << '\n';
}

// fisher -------------------------------------------------------------------

struct FisherArgs {
  std::string delta_grid = "0:2.1:40", out;
  double omega = 1.0, step = 1e-3;
  int n_clicks = 48, eta = 1;
  std::size_t bias_per_point = 0;
};

void run_fisher(const FisherArgs& a, const Common& c) {
  auto deltas = parse_grid(a.delta_grid);
  for (double& d : deltas) d = c.rate_in(d);
  const double omega = c.rate_in(a.omega);
  std::optional<fisher::BiasCurve> bias;
  if (a.bias_per_point > 0) {
    auto grid = bench::ValidationGrid::from_deltas(deltas, omega);
    grid.trajectories_per_point = a.bias_per_point;
    grid.n_clicks = a.n_clicks;
    bench::EstimatorSuite suite;
    suite.methods = {bench::EstimateMethod::bayes_mean};
    const auto tables = bench::run_validation(grid, suite, {c.seed, c.threads, true});
    std::vector<double> est, truth;
    for (std::size_t p = 0; p < deltas.size(); ++p)
      for (double e : tables[0].delta_estimates[p]) {
        est.push_back(e);
        truth.push_back(deltas[p]);
      }
    bias = fisher::empirical_bias(est, truth);
  }
  auto r = fisher::fisher_report(deltas, omega, 1.0, a.n_clicks, bias, a.eta, a.step, a.step);
  const double g = c.gamma;
  for (std::size_t i = 0; i < r.theta.size(); ++i) {
    r.theta[i] *= g;
    r.fisher[i] /= g * g;
    r.qfi[i] /= g * g;
    r.bias[i] *= g;
    r.crb_variance[i] *= g * g;
    r.qcrb_variance[i] *= g * g;
    r.crb_rmse[i] *= g;
    r.qcrb_rmse[i] *= g;
  }
  fisher::write_fisher_csv(a.out, r);
  write_sidecar(a.out, "fisher", c,
                {{"delta_grid", a.delta_grid}, {"omega", a.omega}, {"n_clicks", a.n_clicks},
                 {"eta", a.eta}, {"step", a.step}, {"bias_per_point", a.bias_per_point},
                 {"bias_estimator", a.bias_per_point ? "bayes-mean" : "none"}});
  std::cout << "wrote Fisher report for " << r.theta.size() << " points to " << a.out << '\n';
}

// noise-sweep --------------------------------------------------------------

struct NoiseArgs {
  std::string sigma_tau_list, sigma_y_list, dataset, out, deltas = "0:2.1:40";
  int epochs = 200;
  std::size_t batch = 12800, per_point = 1000;
  double lr = 1e-3;
};

void run_noise_sweep(const NoiseArgs& a, const Common& c) {
  if (a.sigma_tau_list.empty() == a.sigma_y_list.empty())
    throw DomainError("noise-sweep: give exactly one of --sigma-tau-list, --sigma-y-list");
  const auto training = trajsim::read_dataset(a.dataset);
  bench::NoiseSweepConfig cfg;
  cfg.kind = a.sigma_tau_list.empty() ? bench::NoiseKind::target : bench::NoiseKind::jitter;
  cfg.levels = parse_list(cfg.kind == bench::NoiseKind::jitter ? a.sigma_tau_list : a.sigma_y_list);
  for (double& l : cfg.levels) l = cfg.kind == bench::NoiseKind::jitter ? c.time_in(l) : c.rate_in(l);
  cfg.training = &training;
  cfg.train.epochs = a.epochs;
  cfg.train.batch_size = a.batch;
  cfg.train.learning_rate = a.lr;
  cfg.train.seed = c.seed;
  cfg.train.threads = c.threads;
  auto d = parse_grid(a.deltas);
  for (double& x : d) x = c.rate_in(x);
  cfg.grid = bench::ValidationGrid::from_deltas(d, training.meta.box.fixed_omega);
  cfg.grid.trajectories_per_point = a.per_point;
  cfg.run = {c.seed, c.threads, false};
  auto rows = bench::noise_sweep(cfg);
  for (auto& r : rows) {
    r.level = cfg.kind == bench::NoiseKind::jitter ? r.level / c.gamma : c.rate_out(r.level);
    for (auto* t : {&r.nn, &r.bayes})
      for (auto& p : t->points) {
        p.truth.delta = c.rate_out(p.truth.delta);
        p.truth.omega = c.rate_out(p.truth.omega);
        p.rmse = c.rate_out(p.rmse);
        p.bias = c.rate_out(p.bias);
      }
  }
  bench::write_noise_sweep_csv(a.out, cfg.kind, rows);
  write_sidecar(a.out, "noise-sweep", c,
                {{"kind", cfg.kind == bench::NoiseKind::jitter ? "sigma_tau" : "sigma_y"},
                 {"levels", parse_list(cfg.kind == bench::NoiseKind::jitter ? a.sigma_tau_list
                                                                            : a.sigma_y_list)},
                 {"dataset", a.dataset}, {"epochs", a.epochs}, {"batch", a.batch},
                 {"lr", a.lr}, {"per_point", a.per_point}, {"deltas", a.deltas}});
  std::cout << "wrote noise sweep over " << rows.size() << " levels to " << a.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter estimation for a driven two-level emitter from photon-counting records"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a delay dataset");
  add_common(s, common);
  s->add_option("--delta", sim.delta, "Fixed detuning (omit to draw from the training box)");
  s->add_option("--omega", sim.omega, "Fixed Rabi frequency");
  s->add_option("--box", sim.box, "Training box when --delta is omitted")
      ->check(CLI::IsMember({"1d", "2d"}))
      ->capture_default_str();
  s->add_option("--n-clicks", sim.n_clicks, "Delays per record")->capture_default_str();
  s->add_option("--count", sim.count, "Number of records")->capture_default_str();
  s->add_option("--method", sim.method, "Generator")
      ->check(CLI::IsMember({"iid", "euler"}))
      ->capture_default_str();
  s->add_option("--dt", sim.dt, "Euler step (time units)")->capture_default_str();
  s->add_option("--sigma-tau", sim.sigma_tau, "Timing jitter std. dev. (time units)")
      ->capture_default_str();
  s->add_flag("--no-clip", sim.no_clip, "Keep negative jittered delays");
  s->add_option("--out", sim.out, "Binary dataset file")->required();
  s->add_option("--csv", sim.csv, "Also export the dataset as CSV (internal units)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a Hist-Dense estimator");
  add_common(t, common);
  t->add_option("--dataset", tr.dataset, "Training dataset")->required();
  t->add_option("--arch", tr.arch, "Architecture")
      ->check(CLI::IsMember({"1d", "2d"}))
      ->capture_default_str();
  t->add_option("--epochs", tr.epochs)->capture_default_str();
  t->add_option("--batch", tr.batch)->capture_default_str();
  t->add_option("--lr", tr.lr)->capture_default_str();
  t->add_option("--sigma-y", tr.sigma_y, "Gaussian noise on the training targets")
      ->capture_default_str();
  t->add_option("--train-fraction", tr.train_fraction)->capture_default_str();
  t->add_option("--init", tr.init, "Weight initialization")
      ->check(CLI::IsMember({"glorot-uniform", "he-uniform"}))
      ->capture_default_str();
  t->add_option("--out", tr.out, "Model file")->required();
  t->add_option("--loss-csv", tr.loss_csv, "Loss history (default: MODEL.loss.csv)");

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "Estimate parameters for every record of a dataset");
  add_common(i, common);
  i->add_option("--model", inf.model, "Trained Hist-Dense model");
  i->add_option("--bayes", inf.bayes, "Grid posterior")->check(CLI::IsMember({"1d", "2d"}));
  i->add_flag("--classical", inf.classical, "Posterior from the mean delay only");
  i->add_flag("--map", inf.map, "Report the posterior maximum instead of the mean");
  i->add_option("--n-grid", inf.n_grid, "Grid points per axis");
  i->add_option("--dataset", inf.dataset)->required();
  i->add_option("--out", inf.out, "CSV of estimates")->required();

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "RMSE and bias of estimators on a validation grid");
  add_common(b, common);
  b->add_option("--grid", be.grid)->check(CLI::IsMember({"1d", "2d"}))->capture_default_str();
  b->add_option("--per-point", be.per_point, "Trajectories per grid point")->capture_default_str();
  b->add_option("--n-points", be.n_points, "Grid points per axis")->capture_default_str();
  b->add_option("--deltas", be.deltas, "Explicit 1D grid: list or lo:hi:n");
  b->add_option("--omega", be.omega, "Rabi frequency of the 1D grid")->capture_default_str();
  b->add_option("--estimators", be.estimators,
                "Comma list of bayes-mean, bayes-map, classical-mean, nn")
      ->capture_default_str();
  b->add_option("--model", be.model, "Model for the nn estimator");
  b->add_option("--sigma-tau", be.sigma_tau, "Jitter on the validation delays")
      ->capture_default_str();
  b->add_option("--out", be.out, "Metrics CSV")->required();

  FisherArgs fi;
  auto* f = app.add_subcommand("fisher", "Fisher information, QFI and CRB bounds over delta");
  add_common(f, common);
  f->add_option("--delta-grid", fi.delta_grid, "List or lo:hi:n")->capture_default_str();
  f->add_option("--omega", fi.omega)->capture_default_str();
  f->add_option("--n-clicks", fi.n_clicks)->capture_default_str();
  f->add_option("--eta", fi.eta, "Independent trajectories per estimate")->capture_default_str();
  f->add_option("--step", fi.step, "Finite-difference step in delta")->capture_default_str();
  f->add_option("--bias-per-point", fi.bias_per_point,
                "Trajectories per point for the Bayesian-mean bias curve (0: unbiased bounds)")
      ->capture_default_str();
  f->add_option("--out", fi.out, "Report CSV")->required();

  NoiseArgs no;
  auto* n = app.add_subcommand("noise-sweep", "Retrain and validate at several noise levels");
  add_common(n, common);
  n->add_option("--sigma-tau-list", no.sigma_tau_list, "Jitter levels, comma separated");
  n->add_option("--sigma-y-list", no.sigma_y_list, "Target-noise levels, comma separated");
  n->add_option("--dataset", no.dataset, "Noiseless 1D training dataset")->required();
  n->add_option("--deltas", no.deltas, "Validation grid: list or lo:hi:n")->capture_default_str();
  n->add_option("--per-point", no.per_point)->capture_default_str();
  n->add_option("--epochs", no.epochs)->capture_default_str();
  n->add_option("--batch", no.batch)->capture_default_str();
  n->add_option("--lr", no.lr)->capture_default_str();
  n->add_option("--out", no.out, "Sweep CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    apply_isa(common);
    if (*s) run_simulate(sim, common);
    else if (*t) run_train(tr, common);
    else if (*i) run_infer(inf, common);
    else if (*b) run_bench(be, common);
    else if (*f) run_fisher(fi, common);
    else if (*n) run_noise_sweep(no, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
