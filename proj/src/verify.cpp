#include "collapse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "collapse/gaussian.hpp"
#include "collapse/localization.hpp"
#include "collapse/master.hpp"

namespace collapse {

namespace {

CheckResult check(std::string name, double value, double tol) {
  return {std::move(name), value, tol, std::isfinite(value) && value <= tol};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CharCoefficients rk4_coefficients(CharCoefficients c, double t, const ModelParams& p, int n) {
  auto axpy = [](CharCoefficients a, const CharCoefficients& b, double s) {
    a.c1 += s * b.c1;
    a.c2 += s * b.c2;
    a.c3 += s * b.c3;
    a.c4 += s * b.c4;
    a.c5 += s * b.c5;
    return a;
  };
  const double h = t / n;
  for (int i = 0; i < n; ++i) {
    const auto k1 = coeff_rhs(c, p);
    const auto k2 = coeff_rhs(axpy(c, k1, h / 2), p);
    const auto k3 = coeff_rhs(axpy(c, k2, h / 2), p);
    const auto k4 = coeff_rhs(axpy(c, k3, h), p);
    c = axpy(c, k1, h / 6);
    c = axpy(c, k2, h / 3);
    c = axpy(c, k3, h / 3);
    c = axpy(c, k4, h / 6);
  }
  return c;
}

double coeff_distance(const CharCoefficients& a, const CharCoefficients& b) {
  return std::max({rel(a.c1, b.c1), rel(a.c2, b.c2), rel(a.c3, b.c3), rel(a.c4, b.c4),
                   rel(a.c5, b.c5)});
}

}  // namespace

std::vector<CheckResult> run_verification(const ModelParams& p, std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  const FundamentalConstants base;
  const auto nucleon = derive_constants(scale_parameters(base, base.m0), base.kB);

  out.push_back(check("omega within [5e-6, 5e-4] 1/s (distance outside)",
                      std::max({0.0, 5e-6 - nucleon.omega, nucleon.omega - 5e-4}), 0.0));
  out.push_back(check("|theta - pi/4|", std::abs(nucleon.theta - std::numbers::pi / 4), 0.01));
  out.push_back(check("|log10(T / 0.1 K)|", std::abs(std::log10(nucleon.temperature / 0.1)),
                      std::log10(3.0)));
  out.push_back(check("E_inf vs hbar^2/(8 m0 alpha0)",
                      rel(nucleon.E_inf, base.hbar * base.hbar / (8.0 * base.m0 * base.alpha0)),
                      1e-12));

  for (const auto& [label, params] :
       {std::pair{std::string("natural"), p}, std::pair{std::string("SI 1 kg"),
                                                        scale_parameters(base, 1.0)}}) {
    const auto s = StationaryTriple::from(derive_constants(params));
    const auto r = stationarity_residuals(s, params);
    out.push_back(check("stationarity position balance (" + label + ")",
                        std::abs(r.position_balance), 1e-9));
    out.push_back(check("stationarity momentum balance (" + label + ")",
                        std::abs(r.momentum_balance), 1e-9));
    out.push_back(check("stationarity correlation balance (" + label + ")",
                        std::abs(r.correlation_balance), 1e-9));
    out.push_back(check("stationary uncertainty identity (" + label + ")",
                        std::abs(r.uncertainty), 1e-9));
    out.push_back(check("w1 closed form (" + label + ")", r.w1_closed_form, 1e-9));
    out.push_back(check("w2 = w1 (" + label + ")", r.w2_equals_w1, 1e-9));
    out.push_back(check("w3 relation (" + label + ")", r.w3_relation, 1e-9));
  }

  {
    const auto s = StationaryTriple::from(derive_constants(p));
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100000; ++i)
      worst = std::max(worst, drift_prediction(random_valid_moments(rng, s, p), s, p));
    out.push_back(check("max drift prediction over 1e5 random moments", worst, 0.0));
  }

  {
    std::uniform_real_distribution<double> ar(0.05, 3.0), ai(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const cdouble a0(ar(rng), ai(rng));
      const cdouble exact = a_closed_form(a0, 3.0, p);
      const cdouble rk = integrate_a_ode(a0, 3.0, 1e-4, p);
      worst = std::max(worst, std::abs(exact - rk) / std::abs(rk));
    }
    out.push_back(check("width closed form vs RK4 (10 random a0)", worst, 1e-6));
  }

  {
    std::uniform_real_distribution<double> u(0.1, 1.0), v(-0.3, 0.3), w(-2.0, 2.0);
    double flow = 0.0, semi = 0.0, green = 0.0;
    for (int i = 0; i < 20; ++i) {
      CharCoefficients c0{u(rng), v(rng), u(rng), w(rng), w(rng), 0.0};
      const auto exact = coeff_flow(c0, 1.0, p);
      flow = std::max(flow, coeff_distance(exact, rk4_coefficients(c0, 1.0, p, 4000)));
      semi = std::max(semi, coeff_distance(coeff_flow(coeff_flow(c0, 0.4, p), 0.6, p), exact));
      green = std::max(green, coeff_distance(evolve_characteristic(c0, 1.0, p), exact));
    }
    out.push_back(check("coefficient flow vs RK4 of its ODEs", flow, 1e-9));
    out.push_back(check("coefficient flow semigroup", semi, 1e-10));
    out.push_back(check("propagator pullback vs coefficient flow", green, 1e-10));
  }

  {
    double worst = -1.0;
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j)
        for (int n = 1; n <= 10; ++n) {
          const auto g = green_factors(-10.0 + 0.2 * i, -10.0 + 0.2 * j, 0.3 * n, p);
          worst = std::max(worst, g.log_weight);
        }
    out.push_back(check("max log propagator weight on 100x100x10 sweep", worst, 1e-14));
  }

  {
    const double E0 = 1.7, h = 1e-5;
    const double fd = (mean_energy(E0, h, p) - mean_energy(E0, 0.0, p)) / h;
    const double fd2 = (4.0 * (mean_energy(E0, h / 2, p) - mean_energy(E0, 0.0, p)) / h - fd);
    const double expected = p.lambda * p.hbar * p.hbar / (2.0 * p.mass) - 4.0 * p.damping() * E0;
    out.push_back(check("energy law slope at t = 0", rel(fd2, expected), 1e-6));
  }

  {
    std::uniform_real_distribution<double> dec(-3.0, 3.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
      FundamentalConstants b;
      b.lambda0 = base.lambda0 * std::pow(10.0, dec(rng));
      b.alpha0 = base.alpha0 * std::pow(10.0, dec(rng));
      const auto d = derive_constants(scale_parameters(b, b.m0));
      worst = std::min(worst, d.sigma_q_bar * d.sigma_p_bar / (b.hbar / 2.0));
    }
    out.push_back(check("uncertainty deficit 1 - min(sigma_q sigma_p / (hbar/2))",
                        std::max(0.0, 1.0 - worst), 1e-12));
  }

  out.push_back(check("|log10(beta_t(1 kg, 1 s) / 1e43)|",
                      std::abs(std::log10(beta_t(1.0, scale_parameters(base, 1.0)) / 1e43)),
                      std::log10(3.0)));
  out.push_back(check("|log10(collapse prefactor / 1e15)|",
                      std::abs(std::log10(collapse_rate_prefactor(base) / 1e15)), 1.5));

  {
    std::vector<double> xs;
    for (int i = 0; i <= 1200; ++i) xs.push_back(-15.0 + 0.025 * i);
    const double a = 0.5;
    const auto prof = position_density({{1.0, a, -3.0, 0.0}, {1.0, a, 3.0, 0.5}}, 1.0, p, xs);
    out.push_back(check("density normalization", std::abs(interval_probability(prof, -15, 15) - 1.0),
                        1e-8));
  }
  return out;
}

}  // namespace collapse
