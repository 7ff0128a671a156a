#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "pcest/qdyn.hpp"
#include "pcest/trajsim.hpp"

using namespace pcest;
using namespace pcest::trajsim;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pcest_test_" + name);
}

bool same_bits(const Dataset& a, const Dataset& b) {
  if (!(a.meta == b.meta) || a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (a.records[i].truth != b.records[i].truth) return false;
    if (a.records[i].delays != b.records[i].delays) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sampler mean matches the classical moment") {
  const SystemParams p{0.0, 1.0, 1.0};
  Rng rng = child_rng(1, 0);
  std::vector<double> x(100000);
  for (double& t : x) t = sample_delay(p, rng);
  const double se = std::sqrt(oracle::variance(x) / x.size());
  CHECK(std::abs(oracle::mean(x) - 2.25) < 3.0 * se);
}

TEST_CASE("tail mass beyond the table cutoff is negligible") {
  // The density decays at twice the slowest no-jump decay rate, 0.3099 gamma
  // here, not gamma / 2: the sinh term eats part of the exponential. The
  // tail is 2.5218e-14 by 30-digit quadrature of the literal formula.
  const double tail = oracle::simpson(
      [&](double t) { return oracle::waiting_time_direct(t, 0.8, 1.0); }, 100.0, 400.0, 1e-30);
  CHECK(tail == doctest::Approx(2.52178e-14).epsilon(1e-4));
  CHECK(tail < 1e-13);
}

TEST_CASE("sampler table is a valid CDF") {
  InverseCdfSampler s({0.8, 1.0, 1.0});
  const auto c = s.cdf();
  CHECK(c.size() == InverseCdfSampler::kDefaultKnots);
  CHECK(c.front() == 0.0);
  CHECK(c.back() == 1.0);
  CHECK(std::is_sorted(c.begin(), c.end()));
  CHECK(s.inverse_cdf(0.0) == 0.0);
  CHECK(s.inverse_cdf(1.0) == doctest::Approx(100.0));
  // Inverse of the analytic CDF at the median, cross-checked by quadrature.
  const double med = s.inverse_cdf(0.5);
  const double mass = oracle::simpson([](double t) { return oracle::waiting_time_direct(t, 0.8, 1.0); },
                                      0.0, med, 1e-13);
  CHECK(mass == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("sampler reset matches a fresh table") {
  InverseCdfSampler a({0.3, 1.0, 1.0});
  a.reset({1.7, 0.6, 1.0});
  InverseCdfSampler b({1.7, 0.6, 1.0});
  CHECK(std::equal(a.cdf().begin(), a.cdf().end(), b.cdf().begin()));
}

TEST_CASE("same seed gives the same draws") {
  Rng a = child_rng(42, 3), b = child_rng(42, 3);
  for (int k = 0; k < 100; ++k) CHECK(sample_delay({0.8, 1.0, 1.0}, a) == sample_delay({0.8, 1.0, 1.0}, b));
  CHECK_THROWS_AS(sample_delay({0.8, 0.0, 1.0}, a), DomainError);
}

TEST_CASE("child engines are distinct per index and stream") {
  Rng a = child_rng(5, 0), b = child_rng(5, 1), c = child_rng(5, 0, 1);
  const auto x = a(), y = b(), z = c();
  CHECK(x != y);
  CHECK(x != z);
}

TEST_CASE("no-jump step keeps the state normalized") {
  WavefunctionState psi;
  for (int k = 0; k < 1000; ++k) evolve_no_jump(psi, {0.8, 1.0, 1.0}, 1e-3);
  CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(psi.excited_population() > 0.0);
}

TEST_CASE("Euler simulator records exactly n_clicks delays") {
  Rng rng = child_rng(2, 0);
  const auto rec = simulate_trajectory_euler({0.8, 1.0, 1.0}, 48, rng);
  CHECK(rec.size() == 48);
  for (double t : rec.delays) CHECK(t > 0.0);
  CHECK(rec.truth.has_value());
}

TEST_CASE("Euler simulator rejects bad steps and detects an undriven emitter") {
  Rng rng = child_rng(2, 0);
  CHECK_THROWS_AS(simulate_trajectory_euler({0.8, 1.0, 1.0}, 1, rng, {0.0}), DomainError);
  CHECK_THROWS_AS(simulate_trajectory_euler({0.8, 1.0, 1.0}, 1, rng, {2e-2}), DomainError);
  CHECK_THROWS_AS(simulate_trajectory_euler({0.8, 1.0, 1.0}, 0, rng), DomainError);

  // The excited amplitude after one step is O(omega dt) = 1e-15, so the jump
  // probability is O(1e-33).
  WavefunctionState psi;
  evolve_no_jump(psi, {0.0, 1e-12, 1.0}, 1e-3);
  CHECK(1e-3 * psi.excited_population() < 1e-20);
  EulerOptions opt;
  opt.max_steps_without_click = 10000;
  try {
    simulate_trajectory_euler({0.0, 1e-12, 1.0}, 1, rng, opt);
    FAIL("expected a no-emission error");
  } catch (const SimulationError& e) {
    CHECK(std::string(e.what()).find("no-emission") != std::string::npos);
  }
}

TEST_CASE("Euler and i.i.d. delays agree in distribution at one point") {
  const SystemParams p{0.8, 1.0, 1.0};
  std::vector<double> euler, iid;
  Rng r = child_rng(3, 0);
  while (euler.size() < 2000) {
    const auto rec = simulate_trajectory_euler(p, 48, r);
    euler.insert(euler.end(), rec.delays.begin(), rec.delays.end());
  }
  Rng s = child_rng(3, 1);
  for (int k = 0; k < 20000; ++k) iid.push_back(sample_delay(p, s));
  // 2000 vs 20000 samples: the 1% critical value is about 0.04.
  CHECK(oracle::ks_distance(euler, iid) < 0.04);
}

TEST_CASE("dataset truths are uniform over the box") {
  const auto ds = generate_dataset(ParameterBox::training_1d(), 1000, 4, {}, 9);
  std::vector<double> d;
  for (const auto& r : ds.records) {
    CHECK(r.size() == 4);
    CHECK(ParameterBox::training_1d().contains(*r.truth));
    d.push_back(r.truth->delta);
  }
  const double se = 5.0 / std::sqrt(12.0 * 1000.0);
  CHECK(std::abs(oracle::mean(d) - 2.5) < 3.0 * se);
}

TEST_CASE("2D box draws both parameters inside it") {
  const auto ds = generate_dataset(ParameterBox::training_2d(), 200, 2, {}, 9);
  for (const auto& r : ds.records) CHECK(ParameterBox::training_2d().contains(*r.truth));
}

TEST_CASE("dataset generation is independent of the thread count") {
  const auto a = generate_dataset(ParameterBox::training_1d(), 64, 48, {}, 4);
  GenerateOptions opt;
  opt.threads = 4;
  const auto b = generate_dataset(ParameterBox::training_1d(), 64, 48, {}, 4, opt);
  CHECK(same_bits(a, b));
}

TEST_CASE("zero jitter is a bitwise no-op") {
  const auto a = generate_dataset(ParameterBox::training_1d(), 50, 48, {}, 6);
  NoiseConfig n;
  n.sigma_tau = 0.0;
  n.clip_negative_delays = true;
  const auto b = generate_dataset(ParameterBox::training_1d(), 50, 48, n, 6);
  CHECK(same_bits(a, b));
}

TEST_CASE("jitter derived from a clean dataset equals direct generation") {
  NoiseConfig n;
  n.sigma_tau = 0.5;
  const auto clean = generate_dataset(ParameterBox::training_1d(), 40, 48, {}, 8);
  const auto direct = generate_dataset(ParameterBox::training_1d(), 40, 48, n, 8);
  CHECK(same_bits(with_noise(clean, n), direct));
  CHECK_THROWS_AS(with_noise(direct, n), DomainError);
}

TEST_CASE("clipped fraction matches the Gaussian tail average") {
  const double sigma = 0.5;
  const ParameterBox box = ParameterBox::point({0.8, 1.0, 1.0});
  NoiseConfig n;
  n.sigma_tau = sigma;
  n.clip_negative_delays = false;
  const auto ds = generate_dataset(box, 2084, 48, n, 10);  // just over 1e5 delays
  const auto clean = generate_dataset(box, 2084, 48, {}, 10);
  double expected = 0.0;
  std::size_t negative = 0, total = 0;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    for (std::size_t k = 0; k < 48; ++k) {
      expected += oracle::standard_normal_cdf(-clean.records[i].delays[k] / sigma);
      negative += ds.records[i].delays[k] < 0.0;
      ++total;
    }
  expected /= total;
  const double observed = static_cast<double>(negative) / total;
  // 1e5 delays leave a binomial error of about 2% on their own, so the
  // dataset path gets 3 SE on top; the pool below tests the 2% claim.
  CHECK(observed == doctest::Approx(expected).epsilon(0.02 + 3.0 / std::sqrt(expected * total)));

  Rng rng = child_rng(10, 0, 7);
  std::vector<double> pool(2'000'000);
  for (double& t : pool) t = sample_delay({0.8, 1.0, 1.0}, rng);
  const auto noisy = jitter(pool, sigma, rng);
  double pool_expected = 0.0;
  std::size_t pool_negative = 0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    pool_expected += oracle::standard_normal_cdf(-pool[k] / sigma);
    pool_negative += noisy[k] < 0.0;
  }
  pool_expected /= pool.size();
  CHECK(static_cast<double>(pool_negative) / pool.size() ==
        doctest::Approx(pool_expected).epsilon(0.02));

  n.clip_negative_delays = true;
  const auto clipped = with_noise(clean, n);
  std::size_t zeros = 0;
  for (const auto& r : clipped.records)
    for (double t : r.delays) {
      CHECK(t >= 0.0);
      zeros += t == 0.0;
    }
  CHECK(zeros == negative);
}

TEST_CASE("dataset generation rejects invalid input") {
  ParameterBox bad = ParameterBox::training_1d();
  bad.delta = {2.0, 1.0};
  CHECK_THROWS_AS(generate_dataset(bad, 1, 48, {}, 0), DomainError);
  bad.delta = {-1.0, 1.0};
  CHECK_THROWS_AS(generate_dataset(bad, 1, 48, {}, 0), DomainError);
  CHECK_THROWS_AS(generate_dataset(ParameterBox::training_1d(), 0, 48, {}, 0), DomainError);
  NoiseConfig n;
  n.sigma_tau = -1.0;
  CHECK_THROWS_AS(generate_dataset(ParameterBox::training_1d(), 1, 48, n, 0), DomainError);
}

TEST_CASE("dataset round trip") {
  const auto path = temp_file("roundtrip.pcnt");
  SUBCASE("empty") {
    Dataset ds;
    ds.meta.seed = 77;
    write_dataset(path, ds);
    CHECK(same_bits(read_dataset(path), ds));
  }
  SUBCASE("four records, 1D") {
    const auto ds = generate_dataset(ParameterBox::training_1d(), 4, 48, {}, 12);
    write_dataset(path, ds);
    CHECK(same_bits(read_dataset(path), ds));
  }
  SUBCASE("2D with noise metadata and Euler generator") {
    NoiseConfig n;
    n.sigma_tau = 0.25;
    n.sigma_y = 0.5;
    GenerateOptions opt;
    opt.generator = Generator::euler;
    const auto ds = generate_dataset(ParameterBox::training_2d(), 3, 5, n, 13, opt);
    write_dataset(path, ds);
    CHECK(same_bits(read_dataset(path), ds));
  }
  std::filesystem::remove(path);
}

TEST_CASE("corrupted dataset files raise format errors") {
  const auto path = temp_file("corrupt.pcnt");
  const auto ds = generate_dataset(ParameterBox::training_1d(), 2, 3, {}, 1);
  write_dataset(path, ds);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(read_dataset(path), FormatError);

  write_dataset(path, ds);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char v[2] = {9, 0};
    f.write(v, 2);
  }
  try {
    read_dataset(path);
    FAIL("expected a version error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  write_dataset(path, ds);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  CHECK_THROWS_AS(read_dataset(path), FormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_dataset(path), IoError);
}

TEST_CASE("dataset CSV has a header and one row per record") {
  const auto path = temp_file("ds.csv");
  write_dataset_csv(path, generate_dataset(ParameterBox::training_1d(), 3, 2, {}, 1));
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  CHECK(line == "delta,tau_1,tau_2");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 3);
  std::filesystem::remove(path);
}

TEST_CASE("generator names") {
  CHECK(to_string(Generator::euler) == "euler");
  CHECK(generator_from_string("iid") == Generator::iid);
  CHECK_THROWS_AS(generator_from_string("rk4"), DomainError);
}
