#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "collapse/errors.hpp"
#include "collapse/master.hpp"
#include "oracles.hpp"

using namespace collapse;

namespace {
oracle::Model as_oracle(const ModelParams& p) { return {p.mass, p.lambda, p.alpha, p.hbar}; }

oracle::Coeffs head(const CharCoefficients& c) { return {c.c1, c.c2, c.c3, c.c4, c.c5}; }

double rel_diff(const CharCoefficients& a, const oracle::Coeffs& b) {
  const auto x = head(a);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(x[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return worst;
}
}  // namespace

TEST_CASE("coefficient flow matches RK4 on the coefficient equations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2.0), s(-1.0, 1.0);
  for (const auto& p : {natural_params(1.0, 0.5), natural_params(0.3, 2.0), natural_params(2.0, 1e-4),
                        ModelParams{2.0, 0.7, 0.2, 0.5}}) {
    for (int i = 0; i < 10; ++i) {
      CharCoefficients c0{u(rng), 0.3 * s(rng), u(rng), s(rng), s(rng), 0.0};
      for (double t : {1e-3, 0.3, 1.7}) {
        const auto ref = oracle::rk4(head(c0), t, 4000, as_oracle(p), oracle::coeff_rhs);
        CHECK(rel_diff(coeff_flow(c0, t, p), ref) < 1e-9);
      }
    }
  }
}

TEST_CASE("coefficient flow is a semigroup") {
  const auto p = natural_params(1.3, 0.4);
  const CharCoefficients c0{0.5, 0.1, 0.7, 0.2, -0.3, 0.0};
  for (auto [t1, t2] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {0.7, 1.9}, {3.0, 0.01}}) {
    const auto direct = coeff_flow(c0, t1 + t2, p);
    const auto composed = coeff_flow(coeff_flow(c0, t1, p), t2, p);
    CHECK(rel_diff(composed, head(direct)) < 1e-10);
  }
}

TEST_CASE("evolving by the Green function equals the coefficient flow") {
  const auto p = natural_params(1.0, 0.5);
  const CharCoefficients c0{0.4, 0.05, 0.9, 0.3, -0.2, 0.0};
  auto rho0 = [&](double k, double x) {
    return std::exp(cdouble(-c0.c1 * k * k - c0.c2 * k * x - c0.c3 * x * x, -c0.c4 * k - c0.c5 * x));
  };
  const double t = 0.8;
  const auto ct = coeff_flow(c0, t, p);
  for (auto [k, x] : std::vector<std::pair<double, double>>{{0.3, -0.2}, {1.1, 0.5}, {-0.7, 0.9}}) {
    const cdouble expect = std::exp(cdouble(-ct.c1 * k * k - ct.c2 * k * x - ct.c3 * x * x - ct.c6,
                                            -ct.c4 * k - ct.c5 * x));
    const cdouble got = evolve_characteristic(rho0, k, x, t, p);
    CHECK(std::abs(got - expect) < 1e-12);
  }
}

TEST_CASE("scaled K functions are continuous across the series boundary") {
  const auto below = scaled_K(0.5 - 1e-9);
  const auto above = scaled_K(0.5 + 1e-9);
  CHECK(below.k1 == doctest::Approx(above.k1).epsilon(1e-7));
  CHECK(below.k2 == doctest::Approx(above.k2).epsilon(1e-7));
  CHECK(below.k3 == doctest::Approx(above.k3).epsilon(1e-7));
  const auto zero = scaled_K(0.0);
  CHECK(zero.k1 == doctest::Approx(-32.0 / 6.0));
}

TEST_CASE("moments follow the master-equation moment equations") {
  const ModelParams p{1.5, 0.8, 0.3, 0.9};
  const RawMoments m0{0.4, -0.6, 1.2, 0.1, 2.0};
  for (double t : {0.05, 1.0, 4.0}) {
    const auto got = moments_flow(m0, t, p);
    const auto ref = oracle::rk4({m0.q, m0.p, m0.qq, m0.qp, m0.pp}, t, 4000, as_oracle(p), oracle::moment_rhs);
    CHECK(got.q == doctest::Approx(ref[0]).epsilon(1e-9));
    CHECK(got.p == doctest::Approx(ref[1]).epsilon(1e-9));
    CHECK(got.qq == doctest::Approx(ref[2]).epsilon(1e-9));
    CHECK(got.qp == doctest::Approx(ref[3]).epsilon(1e-9));
    CHECK(got.pp == doctest::Approx(ref[4]).epsilon(1e-9));
  }
}

TEST_CASE("mean energy relaxes to hbar^2 / 8 m alpha") {
  const ModelParams p{2.0, 0.5, 0.25, 1.0};
  for (double t : {0.0, 0.5, 3.0, 50.0})
    CHECK(mean_energy(1.7, t, p) == doctest::Approx(oracle::mean_energy(1.7, t, as_oracle(p))));
  const ModelParams flat{1.0, 0.5, 0.0, 1.0};
  CHECK(mean_energy(0.3, 2.0, flat) == doctest::Approx(0.3 + 0.5 * 2.0 / 2.0));
}

TEST_CASE("coefficients of a Gaussian state encode its moments") {
  const auto p = natural_params(1.0, 0.5);
  const GaussianState s{{0.3, -0.4}, 1.2, -0.5};
  const auto c = coefficients_of(s, p);
  const auto o = oracle::gaussian_spreads(s.a, p.hbar);
  CHECK(c.c1 == doctest::Approx(o.vq / 2.0));
  CHECK(c.c2 == doctest::Approx(o.vqp));
  CHECK(c.c3 == doctest::Approx(o.vp / 2.0));
  CHECK(c.c4 == doctest::Approx(-1.2));
  CHECK(c.c5 == doctest::Approx(0.5));
  CHECK(purity(c, p.hbar) == doctest::Approx(1.0));
  CHECK(coefficient_energy(c, p) == doctest::Approx((0.25 + o.vp) / 2.0));
}

TEST_CASE("purity decreases under the master equation") {
  const auto p = natural_params(1.0, 0.5);
  const auto c0 = coefficients_of({{1.0, 0.0}, 0, 0}, p);
  double last = purity(c0, p.hbar);
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const double pu = purity(coeff_flow(c0, t, p), p.hbar);
    CHECK(pu < last);
    last = pu;
  }
}

TEST_CASE("position density of a Gaussian is the Gaussian with flowed moments") {
  const auto p = natural_params(1.0, 0.5);
  const cdouble a(0.5, 0.1);
  const std::vector<GaussianPacket> psi{GaussianPacket{{1, 0}, a, 0.5, 0.8}};
  const auto sp = oracle::gaussian_spreads(a, p.hbar);
  const RawMoments m0{0.5, 0.8, sp.vq + 0.25, sp.vqp + 0.4, sp.vp + 0.64};
  const double t = 0.7;
  const auto mt = moments_flow(m0, t, p);
  std::vector<double> xs;
  for (int i = 0; i <= 80; ++i) xs.push_back(-6.0 + 0.15 * i);
  const auto prof = position_density(psi, t, p, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(prof.exact[i] == doctest::Approx(oracle::normal_pdf(xs[i], mt.q, mt.qq - mt.q * mt.q)).epsilon(1e-7).scale(1e-9));
}

TEST_CASE("the density forms agree for alpha = 0") {
  const ModelParams p{1.0, 0.5, 0.0, 1.0};
  const std::vector<GaussianPacket> psi{GaussianPacket{{1, 0}, {0.5, 0}, -2.0, 0},
                                        GaussianPacket{{1, 0}, {0.5, 0}, 2.0, 0}};
  std::vector<double> xs;
  for (int i = 0; i <= 100; ++i) xs.push_back(-8.0 + 0.16 * i);
  const auto prof = position_density(psi, 0.6, p, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(prof.expansion[i] == doctest::Approx(prof.exact[i]).epsilon(1e-8).scale(1e-10));
    CHECK(prof.smoothing[i] == doctest::Approx(prof.exact[i]).epsilon(1e-8).scale(1e-10));
  }
  const double norm = oracle::trapezoid([&](double x) {
    const auto i = static_cast<std::size_t>(std::lround((x + 8.0) / 0.16));
    return prof.exact[i];
  }, -8.0, 8.0, 100);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(interval_probability(prof, 0.0, 8.0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("beta_t for a macroscopic body") {
  const auto p = scale_parameters(FundamentalConstants{}, 1.0);
  const double b = beta_t(1.0, p);
  CHECK(b > 1e43 / 3.0);
  CHECK(b < 3e43);
  const double expect = 1.0 / ((2.0 * p.hbar * p.hbar / 3.0) * p.lambda / (p.mass * p.mass) *
                               (1.0 + 3.0 * std::pow(p.mass * p.alpha / p.hbar, 2)));
  CHECK(b == doctest::Approx(expect).epsilon(1e-12));
}
