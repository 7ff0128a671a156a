#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "pcest/qdyn.hpp"

using namespace pcest;

TEST_CASE("waiting time vanishes at zero delay") {
  for (double d : {0.0, 0.8, 3.0})
    for (double o : {0.1, 0.25, 1.0, 5.0}) CHECK(qdyn::waiting_time_density(0.0, {d, o, 1.0}) == 0.0);
}

TEST_CASE("waiting time at resonance matches the closed form") {
  const double w = qdyn::waiting_time_density(2.0, {0.0, 1.0, 1.0});
  CHECK(w == doctest::Approx(oracle::waiting_time_resonant_unit(2.0)).epsilon(1e-12));
  CHECK(w == doctest::Approx(0.3423).epsilon(1e-4));
}

TEST_CASE("stable form agrees with the literal cosh difference") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ud(0.0, 3.0), uo(0.25, 5.0), ut(0.01, 30.0);
  for (int k = 0; k < 200; ++k) {
    const double d = ud(rng), o = uo(rng), t = ut(rng);
    const double ref = oracle::waiting_time_direct(t, d, o);
    const double w = qdyn::waiting_time_density(t, {d, o, 1.0});
    CHECK(w == doctest::Approx(ref).epsilon(1e-8).scale(1e-14));
  }
}

TEST_CASE("degenerate branch point delta = 0, omega = gamma/4 is finite") {
  // Both square roots vanish; the literal formula is 0/0 but the limit is
  // w = (gamma omega^2 / 2) * 2 tau^2 exp(-tau/2).
  const double o = 0.25;
  for (double t : {0.5, 2.0, 10.0}) {
    const double w = qdyn::waiting_time_density(t, {0.0, o, 1.0});
    CHECK(w == doctest::Approx(o * o * t * t * std::exp(-t / 2.0)).epsilon(1e-12));
    // Approach from both sides.
    CHECK(qdyn::waiting_time_density(t, {0.0, o * (1 + 1e-7), 1.0}) ==
          doctest::Approx(w).epsilon(1e-5));
    CHECK(qdyn::waiting_time_density(t, {0.0, o * (1 - 1e-7), 1.0}) ==
          doctest::Approx(w).epsilon(1e-5));
  }
}

TEST_CASE("weak drive below the branch point uses two real exponentials") {
  for (double t : {0.3, 4.0, 40.0}) {
    const double ref = oracle::waiting_time_direct(t, 0.0, 0.1);
    CHECK(qdyn::waiting_time_density(t, {0.0, 0.1, 1.0}) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("waiting time is normalized and its mean is mu") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(0.0, 3.0), uo(0.25, 5.0);
  for (int k = 0; k < 10; ++k) {
    const SystemParams p{ud(rng), uo(rng), 1.0};
    auto w = [&](double t) { return qdyn::waiting_time_density(t, p); };
    CHECK(oracle::simpson(w, 0.0, 200.0, 1e-12) == doctest::Approx(1.0).epsilon(1e-7));
    const double mu = oracle::simpson([&](double t) { return t * w(t); }, 0.0, 200.0, 1e-12);
    CHECK(mu == doctest::Approx(oracle::classical_mu(p.delta, p.omega)).epsilon(1e-6));
  }
}

TEST_CASE("waiting time is even in delta through the coefficients") {
  for (double d : {0.1, 0.8, 2.5}) {
    const auto a = qdyn::waiting_time_coeffs({d, 1.3, 1.0});
    const auto b = qdyn::waiting_time_coeffs({-d, 1.3, 1.0});
    CHECK(a.shape.u == b.shape.u);
    CHECK(a.shape.alpha == b.shape.alpha);
    CHECK(a.shape.beta == b.shape.beta);
  }
}

TEST_CASE("waiting time rejects bad input") {
  CHECK_THROWS_AS(qdyn::waiting_time_density(-0.1, {0.0, 1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(qdyn::waiting_time_density(1.0, {0.0, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(qdyn::waiting_time_density(1.0, {-0.5, 1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(qdyn::waiting_time_density(1.0, {0.0, 1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(qdyn::waiting_time_density(1.0, {NAN, 1.0, 1.0}), DomainError);
}

TEST_CASE("log density matches log of density and -inf at zero") {
  const SystemParams p{0.8, 1.0, 1.0};
  CHECK(std::isinf(qdyn::log_waiting_time_density(0.0, p)));
  for (double t : {0.01, 1.0, 7.0, 90.0})
    CHECK(qdyn::log_waiting_time_density(t, p) ==
          doctest::Approx(std::log(oracle::waiting_time_direct(t, 0.8, 1.0))).epsilon(1e-9));
}

TEST_CASE("log density stays finite where the density underflows") {
  const SystemParams p{0.0, 1.0, 1.0};
  const double lw = qdyn::log_waiting_time_density(3000.0, p);
  CHECK(std::isfinite(lw));
  CHECK(lw == doctest::Approx(std::log(8.0 / 15.0) - 1500.0 +
                              std::log(1.0 - std::cos(std::sqrt(15.0) * 1500.0)))
                  .epsilon(1e-9));
}

TEST_CASE("batch density agrees with the scalar call") {
  const SystemParams p{1.1, 0.7, 1.0};
  std::vector<double> taus, out(257);
  for (int k = 0; k < 257; ++k) taus.push_back(0.05 * k);
  qdyn::waiting_time_density(taus, p, out);
  for (int k = 0; k < 257; ++k)
    CHECK(out[k] == doctest::Approx(qdyn::waiting_time_density(taus[k], p)).epsilon(1e-13).scale(1e-300));
}

TEST_CASE("classical moments") {
  const auto m = qdyn::classical_moments({0.0, 1.0, 1.0}, 48);
  CHECK(m.mu == doctest::Approx(2.25).epsilon(1e-14));
  CHECK(m.sigma * m.sigma == doctest::Approx(57.0 / 768.0).epsilon(1e-13));
  CHECK(m.n_clicks == 48);
  const double pop = qdyn::steady_state_population({0.0, 1.0, 1.0});
  CHECK(m.mu == doctest::Approx(1.0 / pop).epsilon(1e-14));
  for (double d : {0.4, 1.7})
    for (double o : {0.3, 2.2}) {
      const auto c = qdyn::classical_moments({d, o, 1.0}, 10);
      CHECK(c.mu == doctest::Approx(oracle::classical_mu(d, o)).epsilon(1e-13));
      CHECK(c.sigma * c.sigma == doctest::Approx(oracle::classical_var(d, o, 10)).epsilon(1e-12));
    }
  CHECK_THROWS_AS(qdyn::classical_moments({0.0, 0.0, 1.0}, 48), DomainError);
  CHECK_THROWS_AS(qdyn::classical_moments({0.0, 1.0, 1.0}, 0), DomainError);
}

TEST_CASE("classical mean diverges monotonically as the drive vanishes") {
  double prev = 0.0;
  for (double o = 0.01; o > 1e-4; o *= 0.7) {
    const double mu = qdyn::classical_moments({0.3, o, 1.0}, 48).mu;
    CHECK(mu > prev);
    prev = mu;
  }
}

TEST_CASE("Liouvillian: undriven spectrum") {
  const auto l = qdyn::liouvillian({0.0, 0.0, 1.0}, {0.0, 0.0, 1.0});
  Eigen::ComplexEigenSolver<qdyn::Matrix4c> es(l.entries);
  std::vector<double> re;
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(es.eigenvalues()[k].imag()) < 1e-14);
    re.push_back(es.eigenvalues()[k].real());
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-1.0));
  CHECK(re[1] == doctest::Approx(-0.5));
  CHECK(re[2] == doctest::Approx(-0.5));
  CHECK(std::abs(re[3]) < 1e-15);
}

TEST_CASE("Liouvillian: zero mode, stability and trace preservation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.0, 3.0), uo(0.25, 5.0);
  for (int k = 0; k < 20; ++k) {
    const SystemParams p{ud(rng), uo(rng), 1.0};
    const auto l = qdyn::liouvillian(p, p);
    Eigen::ComplexEigenSolver<qdyn::Matrix4c> es(l.entries);
    int zeros = 0;
    for (int j = 0; j < 4; ++j) {
      const auto ev = es.eigenvalues()[j];
      if (std::abs(ev) < 1e-10) ++zeros;
      else CHECK(ev.real() < 0.0);
    }
    CHECK(zeros == 1);
    // vec(I) is a left null vector: the trace of d rho / dt vanishes.
    Eigen::RowVector4cd id(1.0, 0.0, 0.0, 1.0);
    CHECK((id * l.entries).norm() < 1e-10);
  }
}

TEST_CASE("Liouvillian reproduces the master equation on a Hermitian state") {
  const SystemParams p{0.8, 1.0, 1.0};
  Eigen::Matrix2cd rho;
  rho << 0.7, std::complex<double>(0.1, 0.2), std::complex<double>(0.1, -0.2), 0.3;
  Eigen::Matrix2cd s, h;
  s << 0, 1, 0, 0;
  h << 0, p.omega, p.omega, p.delta;
  const std::complex<double> i(0, 1);
  const Eigen::Matrix2cd sd = s.adjoint();
  const Eigen::Matrix2cd drho = -i * (h * rho - rho * h) +
                                0.5 * (2.0 * s * rho * sd - sd * s * rho - rho * sd * s);
  const auto l = qdyn::liouvillian(p, p);
  const Eigen::Vector4cd v(rho(0, 0), rho(1, 0), rho(0, 1), rho(1, 1));
  const Eigen::Vector4cd dv = l.entries * v;
  CHECK(std::abs(dv(0) - drho(0, 0)) < 1e-14);
  CHECK(std::abs(dv(1) - drho(1, 0)) < 1e-14);
  CHECK(std::abs(dv(2) - drho(0, 1)) < 1e-14);
  CHECK(std::abs(dv(3) - drho(1, 1)) < 1e-14);
  // First-order evolution keeps the state Hermitian with unit trace.
  Eigen::Matrix2cd next = rho + 1e-3 * drho;
  CHECK(std::abs(next.trace() - 1.0) < 1e-15);
  CHECK((next - next.adjoint()).norm() < 1e-15);
}

TEST_CASE("Liouvillian steady state matches the closed-form population") {
  for (double d : {0.0, 0.8, 2.0}) {
    const SystemParams p{d, 1.0, 1.0};
    const auto rho = qdyn::steady_state(p);
    CHECK(std::abs(rho(1, 1).real() - qdyn::steady_state_population(p)) < 1e-10);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("generalized Liouvillian differs only in the Hamiltonian side") {
  const SystemParams a{0.5, 1.0, 1.0}, b{0.6, 1.0, 1.0};
  const auto l = qdyn::liouvillian(a, b);
  CHECK(l.left == a);
  CHECK(l.right == b);
  const auto la = qdyn::liouvillian(a, a);
  CHECK((l.entries - la.entries).norm() > 0.0);
}
