#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "collapse/errors.hpp"
#include "collapse/gaussian.hpp"
#include "collapse/rng.hpp"
#include "oracles.hpp"

using namespace collapse;

namespace {
oracle::Model as_oracle(const ModelParams& p) { return {p.mass, p.lambda, p.alpha, p.hbar}; }

double rel(cdouble a, cdouble b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("closed-form width matches an RK4 reference") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> re(0.05, 5.0), im(-5.0, 5.0);
  const auto p = natural_params(1.0, 0.5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cdouble a0(re(rng), im(rng));
    for (double t : {0.1, 1.0, 4.0}) {
      const cdouble ref = oracle::riccati_rk4(a0, t, 40000, as_oracle(p));
      worst = std::max(worst, rel(a_closed_form(a0, t, p), ref));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("width stays finite and converges for long times") {
  const auto p = natural_params(2.0, 0.1);
  const auto d = derive_constants(p);
  const cdouble a = a_closed_form({0.01, 3.0}, 500.0, p);
  CHECK(std::isfinite(a.real()));
  CHECK(rel(a, d.a_inf) < 1e-10);
}

TEST_CASE("the tanh, trigonometric and closed forms agree") {
  const auto p = natural_params(0.8, 0.4);
  const cdouble a0(0.3, -0.2);
  const auto pc = phase_constants(a0, p);
  for (double t : {0.0, 0.2, 0.9, 2.5}) {
    CAPTURE(t);
    const cdouble c = a_closed_form(a0, t, p);
    CHECK(rel(a_tanh_form(a0, t, p), c) < 1e-9);
    CHECK(rel(a_trig_form(pc.phi1, pc.phi2, t, p), c) < 1e-9);
    const double sq = std::sqrt(oracle::gaussian_spreads(c, p.hbar).vq);
    CHECK(sigma_q_of_t(pc.phi1, pc.phi2, t, p) == doctest::Approx(sq).epsilon(1e-9));
  }
}

TEST_CASE("spreads of a Gaussian wavefunction") {
  const ModelParams p{2.0, 1.0, 0.3, 0.7};
  const cdouble a(0.4, -1.3);
  const auto s = spreads(a, p);
  const auto o = oracle::gaussian_spreads(a, p.hbar);
  CHECK(s.sigma_q * s.sigma_q == doctest::Approx(o.vq).epsilon(1e-13));
  CHECK(s.sigma_p * s.sigma_p == doctest::Approx(o.vp).epsilon(1e-13));
  CHECK(s.sigma_qp_sq == doctest::Approx(o.vqp).epsilon(1e-13));
  CHECK(s.sigma_q * s.sigma_q * s.sigma_p * s.sigma_p - s.sigma_qp_sq * s.sigma_qp_sq ==
        doctest::Approx(p.hbar * p.hbar / 4));
}

TEST_CASE("position spread reaches its asymptote within 20 / omega1") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lg(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const auto p = natural_params(std::pow(10.0, lg(rng)), std::pow(10.0, lg(rng)));
    const auto d = derive_constants(p);
    const cdouble a0(std::pow(10.0, 2.0 * lg(rng)), lg(rng));
    const double sq = spreads(a_closed_form(a0, 20.0 / d.omega1, p), p).sigma_q;
    CHECK(std::abs(sq / d.sigma_q_bar - 1.0) < 1e-3);
  }
}

TEST_CASE("mean momentum decays at rate 2 lambda alpha on average") {
  const auto p = natural_params(1.0, 0.5);
  const double dt = 0.005, T = 1.0;
  const int steps = static_cast<int>(T / dt), paths = 4000;
  const cdouble a0(0.4, 0.0);
  double sum_p = 0.0, sum_q = 0.0, sum_q2 = 0.0, sum_p2 = 0.0;
  for (int k = 0; k < paths; ++k) {
    NoiseStream noise(99, static_cast<std::uint64_t>(k));
    GaussianState s{a0, 0.0, 1.0};
    for (int i = 0; i < steps; ++i) s = step_means(s, dt, noise.next_increment(dt), p, MeanScheme::Heun);
    const double pm = p.hbar * s.kbar;
    sum_p += pm;
    sum_p2 += pm * pm;
    sum_q += s.xbar;
    sum_q2 += s.xbar * s.xbar;
  }
  const double mean_p = sum_p / paths, var_p = sum_p2 / paths - mean_p * mean_p;
  const double mean_q = sum_q / paths, var_q = sum_q2 / paths - mean_q * mean_q;
  const double expect_p = expected_momentum(1.0, T, p);
  CHECK(expect_p == doctest::Approx(std::exp(-2.0 * 0.5 * T)));
  CHECK(std::abs(mean_p - expect_p) < 4.0 * std::sqrt(var_p / paths));
  // Spread of the means against the covariance ODE.
  const auto cov = integrate_covariance(a0, {0.0, T}, p);
  CHECK(var_q == doctest::Approx(cov.back().qq).epsilon(0.1));
  CHECK(var_p == doctest::Approx(cov.back().pp).epsilon(0.1));
}

TEST_CASE("stationary covariance matches the ODE solution") {
  const auto p = natural_params(1.0, 0.25);
  const auto d = derive_constants(p);
  for (double t : {0.01, 0.5, 2.0}) {
    const auto sc = stationary_covariance(t, p, d);
    const auto ode = integrate_covariance(d.a_inf, {0.0, t}, p, {}, 2048);
    CHECK(sc.qq == doctest::Approx(ode.back().qq).epsilon(1e-6));
    CHECK(sc.pp == doctest::Approx(ode.back().pp).epsilon(1e-6));
  }
  const auto small = stationary_covariance(1e-4, p, d);
  CHECK(small.qq_linear == doctest::Approx(small.qq).epsilon(1e-3));
  CHECK(small.pp_linear == doctest::Approx(small.pp).epsilon(1e-3));
}

TEST_CASE("gaussian energy") {
  const ModelParams p{2.0, 1.0, 0.5, 1.0};
  const GaussianState s{{0.5, 0.1}, 0.0, 3.0};
  const double vp = oracle::gaussian_spreads(s.a, p.hbar).vp;
  CHECK(gaussian_energy(s, p) == doctest::Approx((9.0 + vp) / 4.0));
}

TEST_CASE("non-normalizable widths are rejected") {
  const auto p = natural_params(1.0, 0.5);
  CHECK_THROWS_AS(a_closed_form({0.0, 1.0}, 1.0, p), Error);
  CHECK_THROWS_AS(a_closed_form({-1.0, 0.0}, 1.0, p), Error);
  CHECK_THROWS_AS(step_means({{1.0, 0.0}, 0, 0}, -0.1, 0.0, p), Error);
}
