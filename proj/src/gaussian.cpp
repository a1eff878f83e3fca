#include "collapse/gaussian.hpp"

#include <cmath>

#include "collapse/errors.hpp"
#include "collapse/numerics.hpp"

namespace collapse {

namespace {

constexpr cdouble I{0.0, 1.0};

void require_positive_width(cdouble a) {
  require(a.real() > 0 && std::isfinite(a.real()) && std::isfinite(a.imag()),
          ErrorCode::Domain, "Gaussian width parameter needs Re(a) > 0");
}

struct RiccatiRoots {
  cdouble bigA;
  cdouble bigB;
  cdouble a_inf;
};

RiccatiRoots riccati_roots(const ModelParams& p) {
  const double lm = p.lambda * p.mass / p.hbar;
  RiccatiRoots r;
  r.bigA = cdouble(0.0, -2.0 * lm * p.alpha);
  r.bigB = std::sqrt(cdouble(4.0 * lm * lm * p.alpha * p.alpha, 2.0 * lm));
  r.a_inf = -0.5 * (r.bigA + I * r.bigB);
  return r;
}

// 2u - (1 - e^{-2u})
double shear_gap(double u) {
  if (u < 0.5)
    return numerics::exp_series(u, 2, [](int n) { return numerics::ipow(-2.0, n); });
  return 2.0 * u + std::expm1(-2.0 * u);
}

// u - (1 - e^{-2u}) + (1 - e^{-4u}) / 4
double cubic_gap(double u) {
  if (u < 0.5)
    return numerics::exp_series(u, 3, [](int n) {
      return numerics::ipow(-2.0, n) - numerics::ipow(-4.0, n) / 4.0;
    });
  return u + std::expm1(-2.0 * u) - std::expm1(-4.0 * u) / 4.0;
}

}  // namespace

PhaseConstants phase_constants(cdouble a0, const ModelParams& p) {
  p.validate();
  require_positive_width(a0);
  require(p.lambda > 0, ErrorCode::Domain, "phase constants need lambda > 0");
  const auto r = riccati_roots(p);
  PhaseConstants pc;
  pc.bigA = r.bigA;
  pc.bigB = r.bigB;
  pc.k_init = std::atanh((-2.0 * a0 - r.bigA) / (I * r.bigB));
  // 2 (hbar/m) B = omega1 + i omega2, so the hyperbolic and trigonometric
  // phases are twice the real and imaginary parts of k.
  pc.phi1 = 2.0 * pc.k_init.real();
  pc.phi2 = 2.0 * pc.k_init.imag();
  return pc;
}

cdouble a_closed_form(cdouble a0, double t, const ModelParams& p) {
  p.validate();
  require_positive_width(a0);
  require(t >= 0, ErrorCode::Domain, "time must be non-negative");
  const double hm = p.hbar / p.mass;
  if (p.lambda == 0.0) return 1.0 / (1.0 / a0 + 2.0 * I * hm * t);

  // With u = a - a_inf the Riccati equation becomes
  // du/dt = -(2 i hbar/m) u^2 - g u,  g = 2 hbar B / m,
  // whose solution is the tanh form rewritten around the attracting root.
  const auto r = riccati_roots(p);
  const cdouble u0 = a0 - r.a_inf;
  const cdouble gt = 2.0 * hm * r.bigB * t;
  const cdouble decay = std::exp(-gt);
  const cdouble growth = -numerics::expm1(-gt);  // 1 - e^{-gt}
  return r.a_inf + decay * u0 / (1.0 + I * u0 * growth / r.bigB);
}

cdouble a_tanh_form(cdouble a0, double t, const ModelParams& p) {
  const auto pc = phase_constants(a0, p);
  const cdouble arg = (p.hbar / p.mass) * pc.bigB * t + pc.k_init;
  return -0.5 * (pc.bigA + I * pc.bigB * std::tanh(arg));
}

cdouble a_trig_form(double phi1, double phi2, double t, const ModelParams& p) {
  const auto d = derive_constants(p);
  const double scale = p.mass * d.omega / (2.0 * std::sqrt(2.0) * p.hbar);
  const double s = d.omega1 * t + phi1;
  const double r = d.omega2 * t + phi2;
  // Divide through by cosh(s) so large phases do not overflow.
  const double ch = std::cosh(s);
  const double th = std::tanh(s);
  const double den = 1.0 + std::cos(r) / ch;
  const double sn = std::sin(d.theta), cs = std::cos(d.theta);
  const double re = scale * (sn * th + cs * std::sin(r) / ch) / den;
  const double im = -scale * ((cs * th - sn * std::sin(r) / ch) / den - d.kappa);
  return {re, im};
}

cdouble integrate_a_ode(cdouble a0, double t, double dt, const ModelParams& p) {
  p.validate();
  require(dt > 0, ErrorCode::Domain, "step size must be positive");
  require(t >= 0, ErrorCode::Domain, "time must be non-negative");
  const double hm = p.hbar / p.mass;
  const double la = p.damping();
  auto rhs = [&](cdouble a) { return -2.0 * I * hm * a * a - 4.0 * la * a + p.lambda; };

  cdouble a = a0;
  const long steps = static_cast<long>(std::ceil(t / dt - 1e-9));
  for (long i = 0; i < steps; ++i) {
    const double h = std::min(dt, t - i * dt);
    if (h <= 0) break;
    const cdouble k1 = rhs(a);
    const cdouble k2 = rhs(a + 0.5 * h * k1);
    const cdouble k3 = rhs(a + 0.5 * h * k2);
    const cdouble k4 = rhs(a + h * k3);
    const cdouble next = a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag()) ||
        std::abs(next) > 2.0 * std::abs(a) + 1e-300)
      fail(ErrorCode::Instability, "width ODE step too large: |a| doubled in one step");
    a = next;
  }
  return a;
}

SpreadTriple spreads(cdouble a, const ModelParams& p) {
  require_positive_width(a);
  const double ar = a.real(), ai = a.imag();
  return {0.5 / std::sqrt(ar), p.hbar * std::sqrt((ar * ar + ai * ai) / ar),
          -0.5 * p.hbar * ai / ar};
}

double sigma_q_of_t(double phi1, double phi2, double t, const ModelParams& p) {
  const auto d = derive_constants(p);
  const double s = d.omega1 * t + phi1;
  const double r = d.omega2 * t + phi2;
  const double ch = std::cosh(s);
  const double den = 1.0 + std::cos(r) / ch;
  const double num = std::sin(d.theta) * std::tanh(s) + std::cos(d.theta) * std::sin(r) / ch;
  require(num > 0 && den > 0, ErrorCode::Domain,
          "phase constants give a non-positive spread denominator");
  return std::sqrt(p.hbar / (std::sqrt(2.0) * p.mass * d.omega) * den / num);
}

GaussianState step_means(const GaussianState& s, double dt, double dW, const ModelParams& p,
                         MeanScheme scheme) {
  require(dt > 0, ErrorCode::Domain, "step size must be positive");
  require_positive_width(s.a);
  const double sl = std::sqrt(p.lambda);
  const double hm = p.hbar / p.mass;
  const double la = p.damping();

  auto noise_q = [&](cdouble a) { return sl * (0.5 / a.real() - p.alpha); };
  auto noise_k = [&](cdouble a) { return -sl * a.imag() / a.real(); };

  GaussianState out;
  out.a = a_closed_form(s.a, dt, p);
  if (scheme == MeanScheme::Euler) {
    out.xbar = s.xbar + hm * s.kbar * dt + noise_q(s.a) * dW;
    out.kbar = s.kbar - 2.0 * la * s.kbar * dt + noise_k(s.a) * dW;
    return out;
  }
  // Heun: noise enters additively given a_t, so averaging the time-dependent
  // coefficients keeps the Ito limit.
  const double bq = 0.5 * (noise_q(s.a) + noise_q(out.a));
  const double bk = 0.5 * (noise_k(s.a) + noise_k(out.a));
  const double k_pred = s.kbar - 2.0 * la * s.kbar * dt + bk * dW;
  out.xbar = s.xbar + 0.5 * hm * (s.kbar + k_pred) * dt + bq * dW;
  out.kbar = s.kbar - la * (s.kbar + k_pred) * dt + bk * dW;
  return out;
}

double expected_momentum(double p0, double t, const ModelParams& p) {
  require(t >= 0, ErrorCode::Domain, "time must be non-negative");
  return p0 * std::exp(-2.0 * p.damping() * t);
}

std::vector<CovarianceMatrix> integrate_covariance(
    const std::function<cdouble(double)>& a_of_t, const std::vector<double>& t_grid,
    const ModelParams& p, CovarianceMatrix c0, int substeps) {
  p.validate();
  require(!t_grid.empty(), ErrorCode::Domain, "time grid is empty");
  require(substeps > 0, ErrorCode::Domain, "substeps must be positive");
  const double m = p.mass, hb = p.hbar, la = p.damping();

  auto rhs = [&](double t, const CovarianceMatrix& c) {
    const cdouble a = a_of_t(t);
    require_positive_width(a);
    const double bq = 0.5 / a.real() - p.alpha;
    const double ratio = a.imag() / a.real();
    return CovarianceMatrix{2.0 / m * c.qp + p.lambda * bq * bq,
                            c.pp / m - 2.0 * la * c.qp - p.lambda * hb * ratio * bq,
                            -4.0 * la * c.pp + p.lambda * hb * hb * ratio * ratio};
  };
  auto axpy = [](const CovarianceMatrix& c, double h, const CovarianceMatrix& k) {
    return CovarianceMatrix{c.qq + h * k.qq, c.qp + h * k.qp, c.pp + h * k.pp};
  };

  std::vector<CovarianceMatrix> out;
  out.reserve(t_grid.size());
  out.push_back(c0);
  CovarianceMatrix c = c0;
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    const double span = t_grid[i] - t_grid[i - 1];
    require(span >= 0, ErrorCode::Domain, "time grid must be non-decreasing");
    const double h = span / substeps;
    double t = t_grid[i - 1];
    for (int s = 0; s < substeps && h > 0; ++s) {
      const auto k1 = rhs(t, c);
      const auto k2 = rhs(t + 0.5 * h, axpy(c, 0.5 * h, k1));
      const auto k3 = rhs(t + 0.5 * h, axpy(c, 0.5 * h, k2));
      const auto k4 = rhs(t + h, axpy(c, h, k3));
      c.qq += h / 6.0 * (k1.qq + 2 * k2.qq + 2 * k3.qq + k4.qq);
      c.qp += h / 6.0 * (k1.qp + 2 * k2.qp + 2 * k3.qp + k4.qp);
      c.pp += h / 6.0 * (k1.pp + 2 * k2.pp + 2 * k3.pp + k4.pp);
      t += h;
    }
    if (!std::isfinite(c.qq) || !std::isfinite(c.qp) || !std::isfinite(c.pp))
      fail(ErrorCode::Instability, "covariance integration diverged; reduce the step");
    out.push_back(c);
  }
  return out;
}

std::vector<CovarianceMatrix> integrate_covariance(cdouble a0, const std::vector<double>& t_grid,
                                                   const ModelParams& p, CovarianceMatrix c0,
                                                   int substeps) {
  require(!t_grid.empty(), ErrorCode::Domain, "time grid is empty");
  const double t0 = t_grid.front();
  return integrate_covariance([&](double t) { return a_closed_form(a0, t - t0, p); }, t_grid, p,
                              c0, substeps);
}

StationaryCovariance stationary_covariance(double t, const ModelParams& p,
                                           const DerivedConstants& d) {
  require(t >= 0, ErrorCode::Domain, "time must be non-negative");
  const double s = std::sin(d.theta);
  const double x = (std::cos(d.theta) - d.kappa) / s;
  const double u = p.damping() * t;
  // Drift coefficient of <q> noise in the stationary state, 1/(2 a_inf^R) - alpha.
  const double b = std::sqrt(2.0) * p.hbar / (p.mass * d.omega * s) - p.alpha;
  const double shift = p.hbar * x / (2.0 * p.damping() * p.mass);

  StationaryCovariance c;
  c.ell = shift + b;
  c.qq = p.lambda * b * b * t + shift * b / p.alpha * shear_gap(u) +
         shift * shift / p.alpha * cubic_gap(u);
  c.pp = p.hbar * p.hbar * x * x * p.lambda * t * numerics::one_minus_exp_over(4.0 * u);
  c.qq_linear = p.lambda * b * b * t;
  c.pp_linear = p.lambda * p.hbar * p.hbar * x * x * t;
  return c;
}

double gaussian_energy(const GaussianState& s, const ModelParams& p) {
  const auto sp = spreads(s.a, p);
  const double mean_p = p.hbar * s.kbar;
  return (mean_p * mean_p + sp.sigma_p * sp.sigma_p) / (2.0 * p.mass);
}

}  // namespace collapse
