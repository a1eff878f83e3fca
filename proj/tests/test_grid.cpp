#include <doctest.h>

#include <cmath>
#include <vector>

#include "collapse/errors.hpp"
#include "collapse/gaussian.hpp"
#include "collapse/grid.hpp"
#include "oracles.hpp"

using namespace collapse;

TEST_CASE("grid validation") {
  CHECK_NOTHROW((Grid{-5, 5, 64}.validate()));
  CHECK_THROWS_AS((Grid{-5, 5, 100}.validate()), Error);
  CHECK_THROWS_AS((Grid{-5, 5, 32}.validate()), Error);
  CHECK_THROWS_AS((Grid{5, -5, 128}.validate()), Error);
}

TEST_CASE("observables of a sampled Gaussian") {
  const ModelParams p{1.0, 1.0, 0.5, 1.0};
  GridSolver solver({-20, 20, 512}, p);
  const cdouble a(0.3, -0.2);
  const auto s = solver.make_state({GaussianPacket{{1, 0}, a, 1.5, 0.7}});
  const auto m = solver.observables(s);
  const auto o = oracle::gaussian_spreads(a, p.hbar);
  CHECK(m.norm_sq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.q_mean == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(m.p_mean == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(m.sq_q == doctest::Approx(o.vq).epsilon(1e-10));
  CHECK(m.sq_p == doctest::Approx(o.vp).epsilon(1e-10));
  CHECK(m.sq_qp == doctest::Approx(o.vqp).epsilon(1e-10));
  CHECK(m.energy == doctest::Approx((0.49 + o.vp) / 2.0).epsilon(1e-10));
  CHECK(solver.excess_kurtosis(s) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("the operator form of sigma_O agrees with the moment form") {
  const auto p = natural_params(1.0, 0.5);
  GridSolver solver({-16, 16, 256}, p);
  const auto d = derive_constants(p);
  const auto stationary = solver.make_state({GaussianPacket{{1, 0}, d.a_inf, 0.0, 0.0}});
  CHECK(std::abs(solver.observables(stationary).sigma_O_sq) < 1e-12);
  CHECK(std::abs(solver.sigma_O_sq_direct(stationary)) < 1e-12);
  const auto wide = solver.make_state(
      {GaussianPacket{{1, 0}, {0.1, 0.05}, -1.0, 0.3}, GaussianPacket{{0.5, 0.5}, {0.8, 0}, 2.0, 0}});
  const auto m = solver.observables(wide);
  CHECK(m.sigma_O_sq > 0.0);
  CHECK(solver.sigma_O_sq_direct(wide) == doctest::Approx(m.sigma_O_sq).epsilon(1e-9));
}

TEST_CASE("free evolution spreads like the Schrodinger packet") {
  const ModelParams p{1.0, 0.0, 0.0, 1.0};
  GridSolver solver({-40, 40, 1024}, p);
  const cdouble a0(0.5, 0.0);
  auto s = solver.make_state({GaussianPacket{{1, 0}, a0, 0.0, 1.0}});
  const double dt = 0.01;
  for (int i = 0; i < 200; ++i) solver.linear_step(s, dt, 0.0);
  // Free width: 1/a_t = 1/a_0 + 2 i hbar t / m.
  const cdouble at = 1.0 / (1.0 / a0 + cdouble(0.0, 2.0 * 2.0));
  const auto m = solver.observables(s);
  CHECK(m.sq_q == doctest::Approx(oracle::gaussian_spreads(at, 1.0).vq).epsilon(1e-8));
  CHECK(m.q_mean == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(m.p_mean == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("nonlinear grid trajectory follows the closed-form width") {
  const auto p = natural_params(1.0, 0.5);
  GridSolver solver({-16, 16, 256}, p);
  const cdouble a0(0.25, 0.0);
  NoiseStream noise(7, 0);
  const double dt = 0.002, T = 1.0;
  const auto recs = evolve_trajectory(solver, solver.make_state({GaussianPacket{{1, 0}, a0, 0, 0}}),
                                      T, dt, noise, 50);
  REQUIRE(!recs.empty());
  for (const auto& r : recs) {
    CAPTURE(r.t);
    const auto o = oracle::gaussian_spreads(a_closed_form(a0, r.t, p), p.hbar);
    CHECK(r.sq_q == doctest::Approx(o.vq).epsilon(2e-3));
    CHECK(r.sq_p == doctest::Approx(o.vp).epsilon(2e-3));
    CHECK(r.norm_sq == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("resolution failures are reported") {
  const auto p = natural_params(1.0, 0.5);
  GridSolver solver({-4, 4, 64}, p);
  // A packet spilling over the edges.
  const auto s = solver.make_state({GaussianPacket{{1, 0}, {0.05, 0}, 0, 0}});
  try {
    solver.check_boundary(s);
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Resolution);
  }
}

TEST_CASE("linear evolution preserves the noise-averaged norm statistically") {
  const auto p = natural_params(1.0, 0.5);
  GridSolver solver({-16, 16, 256}, p);
  const auto psi0 = solver.make_state({GaussianPacket{{1, 0}, {0.5, 0}, -2, 0}, GaussianPacket{{1, 0}, {0.5, 0}, 2, 0}});
  double sum = 0, sum2 = 0;
  const int n = 300;
  for (int k = 0; k < n; ++k) {
    NoiseStream noise(3, static_cast<std::uint64_t>(k));
    const auto recs = evolve_linear_trajectory(solver, psi0, 0.2, 0.002, noise, 100);
    const double v = recs.back().norm_sq;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("an oversized step is reported as an instability") {
  const auto p = natural_params(1.0, 0.5);
  GridSolver solver({-16, 16, 256}, p);
  auto s = solver.make_state({GaussianPacket{{1, 0}, {0.5, 0}, 0, 0}});
  try {
    for (int i = 0; i < 5; ++i) solver.linear_step(s, 2.0, 0.0);
    FAIL("expected an instability error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Instability);
  }
}

TEST_CASE("a far-off packet may change its norm strongly without tripping the guard") {
  const auto p = natural_params(1.0, 0.5);
  GridSolver solver({-16, 16, 256}, p);
  auto s = solver.make_state({GaussianPacket{{1, 0}, derive_constants(p).a_inf, 7.5, 0}});
  CHECK_NOTHROW(solver.linear_step(s, 0.002, 0.2));
  CHECK(s.norm_sq > 10.0);
}
