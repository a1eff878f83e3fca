#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "collapse/model.hpp"

namespace collapse {

/// Parameters of phi(x) = exp[-a (x - xbar)^2 + i kbar x + gamma].
struct GaussianState {
  cdouble a{1.0, 0.0};
  double xbar = 0.0;
  double kbar = 0.0;
};

struct SpreadTriple {
  double sigma_q = 0.0;
  double sigma_p = 0.0;
  double sigma_qp_sq = 0.0;  // symmetrized covariance, may be negative
};

/// Covariance of the means (<q>, <p>) over noise realizations.
struct CovarianceMatrix {
  double qq = 0.0;
  double qp = 0.0;
  double pp = 0.0;
};

/// Integration constants of the width equation and their trigonometric form.
struct PhaseConstants {
  cdouble bigA;
  cdouble bigB;
  cdouble k_init;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

enum class MeanScheme { Euler, Heun };

PhaseConstants phase_constants(cdouble a0, const ModelParams& p);

/// a_t from a_0. Exact solution of the deterministic Riccati equation.
cdouble a_closed_form(cdouble a0, double t, const ModelParams& p);

/// Literal -1/2 [A + i B tanh(hbar B t / m + k)]; unstable for large t.
cdouble a_tanh_form(cdouble a0, double t, const ModelParams& p);

/// The real/imaginary trigonometric-hyperbolic form with (phi1, phi2).
cdouble a_trig_form(double phi1, double phi2, double t, const ModelParams& p);

/// RK4 integration of da/dt = -(2 i hbar/m) a^2 - 4 lambda alpha a + lambda.
cdouble integrate_a_ode(cdouble a0, double t, double dt, const ModelParams& p);

SpreadTriple spreads(cdouble a, const ModelParams& p);

double sigma_q_of_t(double phi1, double phi2, double t, const ModelParams& p);

/// One step of the mean SDEs; `a` is advanced by the closed form.
GaussianState step_means(const GaussianState& s, double dt, double dW,
                         const ModelParams& p, MeanScheme scheme = MeanScheme::Euler);

double expected_momentum(double p0, double t, const ModelParams& p);

/// Solve the mean-covariance ODEs on an increasing time grid starting at
/// t_grid[0] with value `c0`. `a_of_t` supplies the width parameter.
std::vector<CovarianceMatrix> integrate_covariance(
    const std::function<cdouble(double)>& a_of_t, const std::vector<double>& t_grid,
    const ModelParams& p, CovarianceMatrix c0 = {}, int substeps = 64);

/// Convenience: a_t from a closed-form trajectory starting at a0 at t_grid[0].
std::vector<CovarianceMatrix> integrate_covariance(cdouble a0,
                                                   const std::vector<double>& t_grid,
                                                   const ModelParams& p,
                                                   CovarianceMatrix c0 = {},
                                                   int substeps = 64);

struct StationaryCovariance {
  double qq = 0.0;
  double pp = 0.0;
  double qq_linear = 0.0;  // small-t linearization
  double pp_linear = 0.0;
  double ell = 0.0;
};

/// Covariance of the means for a stationary Gaussian, C(0) = 0.
StationaryCovariance stationary_covariance(double t, const ModelParams& p,
                                           const DerivedConstants& d);

/// <H0> = ((hbar kbar)^2 + sigma_p^2) / 2m.
double gaussian_energy(const GaussianState& s, const ModelParams& p);

}  // namespace collapse
