#pragma once
// Reference implementations used only by the tests. Everything here is
// written from the model equations directly and shares no code with src/.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using cd = std::complex<double>;

struct Model {
  double m = 1.0, lambda = 0.0, alpha = 0.0, hbar = 1.0;
};

inline double omega(const Model& p) {
  const double la = p.lambda * p.alpha;
  return 2.0 * std::pow(4.0 * la * la * la * la + p.lambda * p.lambda * p.hbar * p.hbar / (p.m * p.m), 0.25);
}

inline double theta(const Model& p) {
  return 0.5 * std::atan(p.hbar / (2.0 * p.lambda * p.alpha * p.alpha * p.m));
}

inline double kappa(const Model& p) { return 2.0 * std::sqrt(2.0) * p.lambda * p.alpha / omega(p); }

inline double sigma_q_bar(const Model& p) {
  return std::sqrt(p.hbar / (std::sqrt(2.0) * p.m * omega(p) * std::sin(theta(p))));
}

inline double sigma_p_bar(const Model& p) {
  const double th = theta(p), k = kappa(p);
  const double s = std::sin(th), c = std::cos(th);
  return std::sqrt(p.hbar * p.m * omega(p) / (2.0 * std::sqrt(2.0)) * (s * s + (c - k) * (c - k)) / s);
}

inline cd a_inf(const Model& p) {
  const double th = theta(p);
  return p.m * omega(p) / (2.0 * std::sqrt(2.0) * p.hbar) *
         cd(std::sin(th), -(std::cos(th) - kappa(p)));
}

inline cd riccati_rhs(cd a, const Model& p) {
  return -cd(0.0, 2.0 * p.hbar / p.m) * a * a - 4.0 * p.lambda * p.alpha * a + p.lambda;
}

/// Classical RK4 for the width equation.
inline cd riccati_rk4(cd a, double t, int steps, const Model& p) {
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const cd k1 = riccati_rhs(a, p);
    const cd k2 = riccati_rhs(a + 0.5 * h * k1, p);
    const cd k3 = riccati_rhs(a + 0.5 * h * k2, p);
    const cd k4 = riccati_rhs(a + h * k3, p);
    a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return a;
}

/// Moments of exp(-a (x - x0)^2 + i k0 x): variance of q and p and the
/// symmetrized covariance.
struct Spreads {
  double vq, vp, vqp;
};
inline Spreads gaussian_spreads(cd a, double hbar) {
  const double ar = a.real();
  return {1.0 / (4.0 * ar), hbar * hbar * std::norm(a) / ar, -hbar * a.imag() / (2.0 * ar)};
}

/// Characteristic-function coefficient ODE, integrated with RK4.
using Coeffs = std::array<double, 5>;
inline Coeffs coeff_rhs(const Coeffs& c, const Model& p) {
  const double la = p.lambda * p.alpha;
  return {c[1] / p.m + p.lambda * p.alpha * p.alpha / (2.0 * p.hbar * p.hbar),
          2.0 * c[2] / p.m - 2.0 * la * c[1], 0.5 * p.lambda - 4.0 * la * c[2], c[4] / p.m,
          -2.0 * la * c[4]};
}

/// Raw second moments <q>, <p>, <q^2>, <(qp+pq)/2>, <p^2> under the master equation.
using Moments = std::array<double, 5>;
inline Moments moment_rhs(const Moments& v, const Model& p) {
  const double la = p.lambda * p.alpha;
  return {v[1] / p.m, -2.0 * la * v[1], 2.0 * v[3] / p.m + p.lambda * p.alpha * p.alpha,
          v[4] / p.m - 2.0 * la * v[3], p.hbar * p.hbar * p.lambda - 4.0 * la * v[4]};
}

template <class Rhs>
std::array<double, 5> rk4(std::array<double, 5> y, double t, int steps, const Model& p, Rhs rhs) {
  const double h = t / steps;
  auto axpy = [](const std::array<double, 5>& a, double s, const std::array<double, 5>& b) {
    std::array<double, 5> r;
    for (int i = 0; i < 5; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  for (int i = 0; i < steps; ++i) {
    const auto k1 = rhs(y, p);
    const auto k2 = rhs(axpy(y, 0.5 * h, k1), p);
    const auto k3 = rhs(axpy(y, 0.5 * h, k2), p);
    const auto k4 = rhs(axpy(y, h, k3), p);
    for (int j = 0; j < 5; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return y;
}

/// Mean energy under the master equation for a particle starting with E0.
inline double mean_energy(double E0, double t, const Model& p) {
  const double la = p.lambda * p.alpha;
  if (la == 0.0) return E0 + p.lambda * p.hbar * p.hbar * t / (2.0 * p.m);
  const double Einf = p.hbar * p.hbar / (8.0 * p.m * p.alpha);
  return (E0 - Einf) * std::exp(-4.0 * la * t) + Einf;
}

/// Trapezoid integral of f on [a, b] with n panels.
template <class F>
double trapezoid(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace oracle
