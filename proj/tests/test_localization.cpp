#include <doctest.h>

#include <cmath>
#include <random>

#include "collapse/errors.hpp"
#include "collapse/localization.hpp"
#include "oracles.hpp"

using namespace collapse;

namespace {
// Drift of E[sigma_O^2] for a Gaussian state, written out term by term.
double drift_oracle(double vq, double vp, double vqp, const StationaryTriple& s, const ModelParams& p) {
  const double so = vp + s.sq_p_bar / s.sq_q_bar * vq - 2.0 * s.sq_qp_bar / s.sq_q_bar * vqp -
                    p.hbar * p.hbar / (2.0 * s.sq_q_bar);
  const double shape = vq / s.sq_q_bar - vqp / s.sq_qp_bar;
  return -4.0 * p.lambda *
         (s.sq_q_bar * so + s.sq_qp_bar * s.sq_qp_bar * shape * shape +
          p.hbar * p.hbar / (4.0 * s.sq_q_bar * s.sq_q_bar) * (vq - s.sq_q_bar) * (vq - s.sq_q_bar));
}
}  // namespace

TEST_CASE("stationary triple satisfies the balance equations") {
  for (const auto& p : {natural_params(1.0, 0.5), natural_params(0.01, 30.0),
                        scale_parameters(FundamentalConstants{}, 1.0)}) {
    const auto s = StationaryTriple::from(derive_constants(p));
    const auto r = stationarity_residuals(s, p);
    CHECK(r.max_residual() < 1e-9);
    CHECK(s.sq_q_bar * s.sq_p_bar - s.sq_qp_bar * s.sq_qp_bar ==
          doctest::Approx(p.hbar * p.hbar / 4).epsilon(1e-9));
  }
}

TEST_CASE("sigma_O vanishes at the stationary state and is positive elsewhere") {
  const auto p = natural_params(1.0, 0.5);
  const auto s = StationaryTriple::from(derive_constants(p));
  MomentRecord m;
  m.sq_q = s.sq_q_bar;
  m.sq_p = s.sq_p_bar;
  m.sq_qp = s.sq_qp_bar;
  CHECK(std::abs(sigma_O_sq(m, s, p)) < 1e-14);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto r = random_valid_moments(rng, s, p);
    CHECK(r.sq_q * r.sq_p - r.sq_qp * r.sq_qp >= p.hbar * p.hbar / 4 * (1 - 1e-12));
    CHECK(r.sigma_O_sq >= -1e-12);
    CHECK(sigma_O_sq_from_deviations(deviations(r, s), s) == doctest::Approx(r.sigma_O_sq).scale(1e-12));
  }
}

TEST_CASE("drift prediction is non-positive and matches the term-by-term form") {
  const auto p = natural_params(0.6, 0.8);
  const auto s = StationaryTriple::from(derive_constants(p));
  std::mt19937_64 rng(21);
  for (int i = 0; i < 5000; ++i) {
    const auto m = random_valid_moments(rng, s, p);
    const double d = drift_prediction(m, s, p);
    CHECK(d <= 0.0);
    CHECK(d == doctest::Approx(drift_oracle(m.sq_q, m.sq_p, m.sq_qp, s, p)).epsilon(1e-10));
  }
}

TEST_CASE("collapse rate bound prefactor") {
  const FundamentalConstants base;
  const auto d = derive_constants(scale_parameters(base, base.m0));
  const double pref = 2.0 * base.lambda0 * d.omega * d.omega * std::pow(std::sin(d.theta), 2) / base.m0;
  CHECK(collapse_rate_prefactor(base) == doctest::Approx(pref).epsilon(1e-12));
  const auto p1 = scale_parameters(base, 1.0);
  const auto d1 = derive_constants(p1);
  CHECK(pref == doctest::Approx(p1.lambda * p1.hbar * p1.hbar / std::pow(d1.sigma_q_bar, 4)).epsilon(1e-9));
  CHECK(collapse_rate_bound(1.0, 2.0 * d1.sigma_q_bar, base) > 0.0);
  CHECK_THROWS_AS(collapse_rate_bound(1.0, 0.5 * d1.sigma_q_bar, base), Error);
}
