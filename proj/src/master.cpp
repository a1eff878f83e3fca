#include "collapse/master.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "collapse/errors.hpp"
#include "collapse/numerics.hpp"

namespace collapse {

namespace {

constexpr cdouble I{0.0, 1.0};

// sum_{n>=3} coef(n) u^{n-3} / n!
template <class Coef>
double cubic_scaled_series(double u, Coef coef) {
  double term = 1.0 / 6.0;  // u^{n-3}/n! at n = 3
  double sum = 0.0;
  for (int n = 3; n < 120; ++n) {
    const double add = coef(n) * term;
    sum += add;
    if (n > 6 && std::abs(add) <= 1e-18 * std::abs(sum)) break;
    term *= u / (n + 1);
  }
  return sum;
}

// Shared pieces of the flow at time t.
struct FlowTerms {
  double u;       // lambda alpha t
  double e2;      // exp(-2u)
  double e4;      // exp(-4u)
  double shear;   // t G(2u) / m
  double g4;      // G(4u)
  ScaledK k;
};

FlowTerms flow_terms(double t, const ModelParams& p) {
  require(t >= 0, ErrorCode::Domain, "time must be non-negative");
  FlowTerms f;
  f.u = p.lambda * p.alpha * t;
  f.e2 = std::exp(-2.0 * f.u);
  f.e4 = std::exp(-4.0 * f.u);
  f.shear = t * numerics::one_minus_exp_over(2.0 * f.u) / p.mass;
  f.g4 = numerics::one_minus_exp_over(4.0 * f.u);
  f.k = scaled_K(f.u);
  return f;
}

}  // namespace

bool CharCoefficients::positive(double tol) const {
  if (c1 < 0 || c3 < 0) return false;
  return 4.0 * c1 * c3 - c2 * c2 >= -tol * std::max(c1 * c3, std::numeric_limits<double>::min());
}

ScaledK scaled_K(double u) {
  require(u >= 0, ErrorCode::Domain, "lambda alpha t must be non-negative");
  using numerics::ipow;
  if (u < 0.5) {
    ScaledK k;
    k.k1 = cubic_scaled_series(u, [](int n) { return ipow(-4.0, n) - 4.0 * ipow(-2.0, n); });
    k.k2 = cubic_scaled_series(
        u, [](int n) { return ipow(-4.0, n) + 4.0 * n * ipow(-2.0, n - 1); });
    k.k3 = cubic_scaled_series(u, [](int n) {
      return -4.0 * n * ipow(-4.0, n - 1) + 4.0 * ipow(-2.0, n) - 3.0 * ipow(-4.0, n);
    });
    return k;
  }
  const double e2 = std::exp(-2.0 * u), e4 = std::exp(-4.0 * u);
  const double gam = -std::expm1(-2.0 * u);
  const double u3 = u * u * u;
  return {(gam * gam + 2.0 * gam - 4.0 * u) / u3, (e4 + 4.0 * u * e2 - 1.0) / u3,
          (-4.0 * u * e4 - gam * gam + 2.0 * gam * e2) / u3};
}

CharCoefficients coeff_flow(const CharCoefficients& c0, double t, const ModelParams& p) {
  const auto f = flow_terms(t, p);
  const double lam = p.lambda, m = p.mass, hb = p.hbar;
  const double g = f.shear;
  CharCoefficients c;
  c.c1 = c0.c1 + c0.c2 * g + c0.c3 * g * g - lam * t * t * t * f.k.k1 / (32.0 * m * m) +
         lam * p.alpha * p.alpha * t / (2.0 * hb * hb);
  c.c2 = c0.c2 * f.e2 + 2.0 * c0.c3 * g * f.e2 + 0.5 * lam * m * g * g;
  c.c3 = c0.c3 * f.e4 + 0.5 * lam * t * f.g4;
  c.c4 = c0.c4 + c0.c5 * g;
  c.c5 = c0.c5 * f.e2;
  c.c6 = c0.c6;
  return c;
}

CharCoefficients coeff_rhs(const CharCoefficients& c, const ModelParams& p) {
  const double la = p.lambda * p.alpha;
  CharCoefficients d;
  d.c1 = c.c2 / p.mass + p.lambda * p.alpha * p.alpha / (2.0 * p.hbar * p.hbar);
  d.c2 = 2.0 * c.c3 / p.mass - 2.0 * la * c.c2;
  d.c3 = 0.5 * p.lambda - 4.0 * la * c.c3;
  d.c4 = c.c5 / p.mass;
  d.c5 = -2.0 * la * c.c5;
  d.c6 = 0.0;
  return d;
}

double GreenFactors::weight() const { return std::exp(log_weight); }

GreenFactors green_factors(double k, double x, double t, const ModelParams& p) {
  const auto f = flow_terms(t, p);
  GreenFactors gf;
  gf.k0 = k;
  gf.x0 = x * f.e2 + k * f.shear;
  const double u3 = f.u * f.u * f.u;
  gf.K1 = f.k.k1 * u3;
  gf.K2 = f.k.k2 * u3;
  gf.K3 = f.k.k3 * u3;
  gf.gamma = -std::expm1(-2.0 * f.u);
  const double G = numerics::one_minus_exp_over(2.0 * f.u);
  // K_i / (8 alpha Gamma^2) = lambda t k_i / (32 G^2)
  const double h = p.lambda * t / (32.0 * G * G);
  gf.log_weight = -p.lambda * p.alpha * p.alpha * k * k * t / (2.0 * p.hbar * p.hbar) +
                  h * (gf.x0 * gf.x0 * f.k.k1 + 2.0 * x * gf.x0 * f.k.k2 + x * x * f.k.k3);
  return gf;
}

CharCoefficients evolve_characteristic(const CharCoefficients& c0, double t, const ModelParams& p) {
  const auto f = flow_terms(t, p);
  const double e = f.e2, g = f.shear;
  const double G = numerics::one_minus_exp_over(2.0 * f.u);
  const double h = p.lambda * t / (32.0 * G * G);
  const auto& k = f.k;
  CharCoefficients c;
  // Substitute x0 = e x + g k into the initial quadratic form and add log F.
  c.c1 = c0.c1 + c0.c2 * g + c0.c3 * g * g - h * g * g * k.k1 +
         p.lambda * p.alpha * p.alpha * t / (2.0 * p.hbar * p.hbar);
  c.c2 = c0.c2 * e + 2.0 * c0.c3 * e * g - 2.0 * h * g * (e * k.k1 + k.k2);
  c.c3 = c0.c3 * e * e - h * (e * e * k.k1 + 2.0 * e * k.k2 + k.k3);
  c.c4 = c0.c4 + c0.c5 * g;
  c.c5 = c0.c5 * e;
  c.c6 = c0.c6;
  return c;
}

cdouble evolve_characteristic(const CharFunction& rho0, double k, double x, double t,
                              const ModelParams& p) {
  const auto gf = green_factors(k, x, t, p);
  return gf.weight() * rho0(gf.k0, gf.x0);
}

CharCoefficients coefficients_of(const GaussianState& s, const ModelParams& p) {
  const auto sp = spreads(s.a, p);
  const double hb2 = p.hbar * p.hbar;
  CharCoefficients c;
  c.c1 = sp.sigma_q * sp.sigma_q / (2.0 * hb2);
  c.c2 = sp.sigma_qp_sq / hb2;
  c.c3 = sp.sigma_p * sp.sigma_p / (2.0 * hb2);
  c.c4 = -s.xbar / p.hbar;
  c.c5 = -s.kbar;
  return c;
}

double purity(const CharCoefficients& c, double hbar) {
  const double det = 4.0 * c.c1 * c.c3 - c.c2 * c.c2;
  require(det > 0, ErrorCode::Domain, "coefficients do not describe a normalizable state");
  return 1.0 / (2.0 * hbar * std::sqrt(det));
}

double coefficient_energy(const CharCoefficients& c, const ModelParams& p) {
  const double hb2 = p.hbar * p.hbar;
  return (2.0 * hb2 * c.c3 + hb2 * c.c5 * c.c5) / (2.0 * p.mass);
}

namespace {

struct CharValue {
  cdouble value;
  double envelope;  // sum of |pair terms|, bounds |value|
};

CharValue packet_char_raw(const std::vector<GaussianPacket>& packets, double k, double s,
                          double hbar) {
  CharValue out{{}, 0.0};
  for (const auto& pj : packets) {
    const double nj = std::pow(2.0 * pj.a.real() / std::numbers::pi, 0.25);
    const cdouble uj = 0.5 * s - pj.xbar;
    for (const auto& pl : packets) {
      const double nl = std::pow(2.0 * pl.a.real() / std::numbers::pi, 0.25);
      const cdouble al = std::conj(pl.a);
      const cdouble vl = -0.5 * s - pl.xbar;
      const cdouble P = pj.a + al;
      const cdouble Q = -2.0 * pj.a * uj - 2.0 * al * vl + I * (pj.kbar - pl.kbar + k / hbar);
      const cdouble R = -pj.a * uj * uj - al * vl * vl + I * (0.5 * (pj.kbar + pl.kbar) * s);
      const cdouble term = pj.weight * std::conj(pl.weight) * nj * nl *
                           std::sqrt(std::numbers::pi / P) * std::exp(Q * Q / (4.0 * P) + R);
      out.value += term;
      out.envelope += std::abs(term);
    }
  }
  return out;
}

double packet_norm(const std::vector<GaussianPacket>& packets, double hbar) {
  require(!packets.empty(), ErrorCode::Domain, "state needs at least one packet");
  for (const auto& pk : packets)
    require(pk.a.real() > 0, ErrorCode::Domain, "packet width needs Re(a) > 0");
  const double n = packet_char_raw(packets, 0.0, 0.0, hbar).value.real();
  require(n > 0, ErrorCode::Domain, "superposition has zero norm");
  return n;
}

}  // namespace

cdouble packet_characteristic(const std::vector<GaussianPacket>& packets, double k, double x,
                              double hbar) {
  return packet_char_raw(packets, k, x, hbar).value / packet_norm(packets, hbar);
}

RawMoments moments_flow(const RawMoments& m0, double t, const ModelParams& p) {
  const auto f = flow_terms(t, p);
  const double e = f.e2, g = f.shear, hb2 = p.hbar * p.hbar;
  const double lam = p.lambda, m = p.mass;
  const double G = numerics::one_minus_exp_over(2.0 * f.u);
  RawMoments r;
  r.q = m0.q + g * m0.p;
  r.p = e * m0.p;
  r.qq = m0.qq + 2.0 * g * m0.qp + g * g * m0.pp + lam * p.alpha * p.alpha * t -
         hb2 * lam * t * t * t * f.k.k1 / (16.0 * m * m);
  // -2 hbar^2 h g (e k1 + k2) with h g = lambda t^2 / (32 G m)
  r.qp = e * (m0.qp + g * m0.pp) -
         2.0 * hb2 * lam * t * t / (32.0 * G * m) * (e * f.k.k1 + f.k.k2);
  r.pp = f.e4 * m0.pp + hb2 * lam * t * f.g4;
  return r;
}

double beta_t(double t, const ModelParams& p) {
  const double inv = (2.0 * p.hbar * p.hbar / 3.0) * (p.lambda / (p.mass * p.mass)) *
                     (t * t * t + 3.0 * std::pow(p.mass * p.alpha / p.hbar, 2) * t);
  if (inv == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / inv;
}

DensityProfile position_density(const std::vector<GaussianPacket>& psi0, double t,
                                const ModelParams& p, const std::vector<double>& x_grid) {
  p.validate();
  require(t >= 0, ErrorCode::Domain, "time must be non-negative");
  require(x_grid.size() >= 2, ErrorCode::Domain, "density needs at least two sample points");
  require(std::is_sorted(x_grid.begin(), x_grid.end()) && x_grid.front() < x_grid.back(),
          ErrorCode::Domain, "sample points must be ascending");
  const double hb = p.hbar, m = p.mass;
  const double norm = packet_norm(psi0, hb);

  DensityProfile prof;
  prof.x = x_grid;
  prof.beta_t = beta_t(t, p);
  const double u = p.lambda * p.alpha * t;
  prof.expansions_valid = u < 0.1;

  const double inv4beta = std::isinf(prof.beta_t) ? 0.0 : 1.0 / (4.0 * prof.beta_t * hb * hb);
  const double expand_rate =
      p.lambda * t * t * t / (6.0 * m * m) + p.lambda * p.alpha * p.alpha * t / (2.0 * hb * hb);

  // Trapezoid rule on [0, k_max]; aliases repeat every 2 pi hbar / dk.
  const double reach = std::max(std::abs(x_grid.front()), std::abs(x_grid.back()));
  const double span = std::max(x_grid.back() - x_grid.front(), reach);
  const double dk = 2.0 * std::numbers::pi * hb / (8.0 * span);

  struct Sample {
    cdouble exact, expansion, smoothing, schrodinger;
  };
  std::vector<Sample> samples;
  const std::size_t max_samples = std::size_t{1} << 22;
  double env0 = 0.0;
  int quiet = 0;
  for (std::size_t n = 0;; ++n) {
    require(n < max_samples, ErrorCode::Resolution,
            "characteristic function does not decay; density quadrature did not converge");
    const double k = dk * static_cast<double>(n);
    const double free_shift = k * t / m;
    const auto gf = green_factors(k, 0.0, t, p);
    const auto ex = packet_char_raw(psi0, k, gf.x0, hb);
    const auto sch = packet_char_raw(psi0, k, free_shift, hb);
    const auto exp_form =
        packet_char_raw(psi0, k, free_shift - p.lambda * p.alpha * t * t * k / m, hb);
    Sample s;
    s.exact = gf.weight() * ex.value / norm;
    s.schrodinger = sch.value / norm;
    s.expansion = std::exp(-expand_rate * k * k) * exp_form.value / norm;
    s.smoothing = std::exp(-inv4beta * k * k) * s.schrodinger;
    samples.push_back(s);
    const double env = std::max({gf.weight() * ex.envelope, sch.envelope, exp_form.envelope *
                                 std::exp(-expand_rate * k * k)}) / norm;
    if (n == 0) env0 = env;
    quiet = env < 1e-17 * env0 ? quiet + 1 : 0;
    if (quiet >= 16) break;
  }
  const std::size_t nx = x_grid.size();
  prof.exact.assign(nx, 0.0);
  prof.expansion.assign(nx, 0.0);
  prof.smoothing.assign(nx, 0.0);
  prof.schrodinger.assign(nx, 0.0);
  const double pref = dk / (std::numbers::pi * hb);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = x_grid[i];
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const double w = n == 0 ? 0.5 : 1.0;
      const double ph = -dk * static_cast<double>(n) * x / hb;
      const cdouble rot{std::cos(ph), std::sin(ph)};
      a += w * (rot * samples[n].exact).real();
      b += w * (rot * samples[n].expansion).real();
      c += w * (rot * samples[n].smoothing).real();
      d += w * (rot * samples[n].schrodinger).real();
    }
    prof.exact[i] = pref * a;
    prof.expansion[i] = pref * b;
    prof.smoothing[i] = pref * c;
    prof.schrodinger[i] = pref * d;
  }

  for (auto* v : {&prof.exact, &prof.expansion, &prof.smoothing, &prof.schrodinger}) {
    const double peak = *std::max_element(v->begin(), v->end());
    for (auto& y : *v) {
      require(y > -1e-9 * peak, ErrorCode::Resolution, "density quadrature produced negative values");
      y = std::max(y, 0.0);
    }
  }
  return prof;
}

double interval_probability(const DensityProfile& profile, double x_lo, double x_hi,
                            DensityForm form) {
  const auto& xs = profile.x;
  require(x_lo < x_hi, ErrorCode::Domain, "interval needs x_lo < x_hi");
  require(!xs.empty() && x_lo >= xs.front() && x_hi <= xs.back(), ErrorCode::Domain,
          "interval lies outside the sampled range");
  const std::vector<double>* ys = &profile.exact;
  switch (form) {
    case DensityForm::Exact: break;
    case DensityForm::Expansion: ys = &profile.expansion; break;
    case DensityForm::Smoothing: ys = &profile.smoothing; break;
    case DensityForm::Schrodinger: ys = &profile.schrodinger; break;
  }
  auto interp = [&](std::size_t i, double x) {
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (*ys)[i] + w * ((*ys)[i + 1] - (*ys)[i]);
  };
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = std::max(xs[i], x_lo), b = std::min(xs[i + 1], x_hi);
    if (b <= a) continue;
    sum += 0.5 * (b - a) * (interp(i, a) + interp(i, b));
  }
  return sum;
}

double mean_energy(double E0, double t, const ModelParams& p) {
  require(t >= 0, ErrorCode::Domain, "time must be non-negative");
  const double u = p.lambda * p.alpha * t;
  return E0 * std::exp(-4.0 * u) +
         p.lambda * p.hbar * p.hbar / (2.0 * p.mass) * t * numerics::one_minus_exp_over(4.0 * u);
}

}  // namespace collapse
