#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcest/bench.hpp"

using namespace pcest;
using namespace pcest::bench;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("grids") {
  const auto g = ValidationGrid::grid_1d();
  REQUIRE(g.points.size() == 40);
  CHECK(g.points.front().delta == 0.0);
  CHECK(g.points.back().delta == doctest::Approx(2.1));
  CHECK(g.trajectories_per_point == 1000);
  const auto g2 = ValidationGrid::grid_2d();
  CHECK(g2.points.size() == 1600);
  CHECK(g2.dims == 2);
  CHECK(g2.points[1].omega > g2.points[0].omega);
  CHECK(g2.points[40].delta > g2.points[0].delta);
}

TEST_CASE("constant estimator metrics are analytic") {
  const SystemParams truth{0.8, 1.0, 1.0};
  const std::vector<bayes::Estimate> est(50, bayes::Estimate{{1.1}, bayes::EstimateMethod::nn});
  const auto m = point_metrics(truth, 1, est);
  CHECK(m.rmse == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(m.bias == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(m.variance == doctest::Approx(0.0).scale(1e-14));
  CHECK(m.n_samples == 50);
  CHECK(m.rmse_euclid == m.rmse);
}

TEST_CASE("rmse dominates the bias for every estimator") {
  auto g = ValidationGrid::from_deltas(std::vector<double>{0.2, 1.0, 2.0});
  g.trajectories_per_point = 50;
  const auto tabs = run_validation(g, {}, {1});
  REQUIRE(tabs.size() == 2);
  for (const auto& t : tabs)
    for (const auto& p : t.points) {
      CHECK(p.rmse * p.rmse - p.bias * p.bias >= -1e-12);
      CHECK(p.n_samples == 50);
    }
}

TEST_CASE("comparing a table with itself") {
  auto g = ValidationGrid::from_deltas(std::vector<double>{0.4, 1.2});
  g.trajectories_per_point = 30;
  const auto tabs = run_validation(g, {}, {2});
  const auto c = compare_tables(tabs[0], tabs[0]);
  for (double r : c.ratios) CHECK(r == 1.0);
  CHECK(c.mean_ratio == 1.0);
  CHECK(c.ties == 2);
  CHECK(c.sign_test_p == 1.0);

  auto other = ValidationGrid::from_deltas(std::vector<double>{0.4, 1.3});
  other.trajectories_per_point = 30;
  const auto tabs2 = run_validation(other, {}, {2});
  CHECK_THROWS_AS(compare_tables(tabs[0], tabs2[0]), DomainError);
}

TEST_CASE("estimators are evaluated on paired records") {
  // bayes-mean and bayes-map come from the same posterior of the same record,
  // so a run with both must reproduce each single-method run exactly.
  auto g = ValidationGrid::from_deltas(std::vector<double>{0.7});
  g.trajectories_per_point = 40;
  EstimatorSuite both, one;
  both.methods = {bayes::EstimateMethod::bayes_map, bayes::EstimateMethod::bayes_mean};
  one.methods = {bayes::EstimateMethod::bayes_mean};
  RunOptions opt{5, 1, true};
  const auto a = run_validation(g, both, opt);
  const auto b = run_validation(g, one, opt);
  CHECK(a[1].delta_estimates == b[0].delta_estimates);
  CHECK(a[1].points[0].rmse == b[0].points[0].rmse);
}

TEST_CASE("nn without a model is rejected") {
  auto g = ValidationGrid::from_deltas(std::vector<double>{0.7});
  EstimatorSuite s;
  s.methods = {bayes::EstimateMethod::nn};
  CHECK_THROWS_AS(run_validation(g, s), DomainError);
  g.points[0].delta = 6.0;
  CHECK_THROWS_AS(run_validation(g, {}), DomainError);
}

TEST_CASE("classical is one-dimensional") {
  auto g = ValidationGrid::grid_2d(3);
  g.trajectories_per_point = 2;
  EstimatorSuite s;
  s.methods = {bayes::EstimateMethod::classical_mean};
  CHECK_THROWS_AS(run_validation(g, s), DomainError);
}

TEST_CASE("2D validation runs on a tiny grid") {
  auto g = ValidationGrid::grid_2d(2);
  g.trajectories_per_point = 3;
  EstimatorSuite s;
  s.methods = {bayes::EstimateMethod::bayes_mean};
  s.posterior_2d.n_delta = 40;
  s.posterior_2d.n_omega = 40;
  const auto t = run_validation(g, s, {1});
  REQUIRE(t[0].points.size() == 4);
  for (const auto& p : t[0].points)
    CHECK(p.rmse_euclid == doctest::Approx(std::hypot(p.rmse, p.rmse_omega)));
}

TEST_CASE("benchmark CSV is identical across thread counts") {
  auto g = ValidationGrid::from_deltas(std::vector<double>{0.3, 0.9, 1.5, 2.0});
  g.trajectories_per_point = 25;
  const auto a = run_validation(g, {}, {9, 1});
  const auto b = run_validation(g, {}, {9, 3});
  const auto pa = std::filesystem::temp_directory_path() / "pcest_test_bench_a.csv";
  const auto pb = std::filesystem::temp_directory_path() / "pcest_test_bench_b.csv";
  write_metrics_csv(pa, a);
  write_metrics_csv(pb, b);
  const auto sa = slurp(pa);
  CHECK(sa == slurp(pb));
  CHECK(sa.rfind("method,delta,omega,n_samples,rmse,bias,variance,rmse_omega,bias_omega,rmse_euclid\n", 0) == 0);
  std::filesystem::remove(pa);
  std::filesystem::remove(pb);
}

TEST_CASE("doubling the trajectories moves RMSE within the CLT band") {
  auto g = ValidationGrid::from_deltas(std::vector<double>{0.8, 1.6});
  g.trajectories_per_point = 200;
  const auto a = run_validation(g, {}, {11});
  g.trajectories_per_point = 400;
  const auto b = run_validation(g, {}, {11});
  for (std::size_t m = 0; m < a.size(); ++m)
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(std::abs(b[m].points[i].rmse / a[m].points[i].rmse - 1.0) < 3.0 / std::sqrt(200.0));
}

TEST_CASE("estimator lists") {
  const auto m = methods_from_string("nn,bayes-mean,classical");
  REQUIRE(m.size() == 3);
  CHECK(m[2] == bayes::EstimateMethod::classical_mean);
  CHECK(method_from_string("bayes") == bayes::EstimateMethod::bayes_mean);
  CHECK_THROWS_AS(method_from_string("mcmc"), DomainError);
  CHECK_THROWS_AS(methods_from_string(""), DomainError);
}
