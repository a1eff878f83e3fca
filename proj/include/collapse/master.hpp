#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "collapse/gaussian.hpp"
#include "collapse/grid.hpp"
#include "collapse/model.hpp"

namespace collapse {

/// Gaussian characteristic function
///   exp{-c1 k^2 - c2 k x - c3 x^2 - i c4 k - i c5 x - c6}
/// of Tr(rho exp[i(kq + xp)/hbar]).
struct CharCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
  double c6 = 0.0;

  /// c1, c3 >= 0 and 4 c1 c3 - c2^2 >= -tol * (c1 c3).
  bool positive(double tol = 1e-12) const;
};

/// Closed-form solution of the coefficient ODEs. Affine in (c1, c2, c3), exact
/// for all t >= 0 including the small lambda*alpha*t regime.
CharCoefficients coeff_flow(const CharCoefficients& c0, double t, const ModelParams& p);

/// Right-hand side of the coefficient ODEs (used by oracles and the CLI).
CharCoefficients coeff_rhs(const CharCoefficients& c, const ModelParams& p);

struct GreenFactors {
  double k0 = 0.0;
  double x0 = 0.0;
  double log_weight = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double gamma = 0.0;  // 1 - exp(-2 lambda alpha t)

  double weight() const;
};

/// Point map and decoherence weight of the propagator at (k, x, t).
GreenFactors green_factors(double k, double x, double t, const ModelParams& p);

/// K_i(t) / (lambda alpha t)^3, finite as lambda alpha t -> 0.
struct ScaledK {
  double k1, k2, k3;
};
ScaledK scaled_K(double u);

/// Gaussian data pushed through the propagator algebraically. Must agree with
/// coeff_flow.
CharCoefficients evolve_characteristic(const CharCoefficients& c0, double t, const ModelParams& p);

using CharFunction = std::function<cdouble(double k, double x)>;

/// rho_t(k, x) = weight * rho_0(k, x0) for arbitrary initial data. The
/// propagator is delta-supported, so no quadrature is involved.
cdouble evolve_characteristic(const CharFunction& rho0, double k, double x, double t,
                              const ModelParams& p);

/// Coefficients of the pure Gaussian state exp[-a (x - xbar)^2 + i kbar x].
CharCoefficients coefficients_of(const GaussianState& s, const ModelParams& p);

/// Tr(rho^2) for a Gaussian characteristic function.
double purity(const CharCoefficients& c, double hbar);

/// <H0> for a Gaussian characteristic function.
double coefficient_energy(const CharCoefficients& c, const ModelParams& p);

/// Characteristic function of the normalized superposition of packets, in
/// closed form (cross terms included).
cdouble packet_characteristic(const std::vector<GaussianPacket>& packets, double k, double x,
                              double hbar);

/// Means and symmetrized second moments of a state.
struct RawMoments {
  double q = 0.0;
  double p = 0.0;
  double qq = 0.0;
  double qp = 0.0;  // <qp + pq>/2
  double pp = 0.0;
};

/// Moments of rho_t from the moments of rho_0. Valid for any initial state.
RawMoments moments_flow(const RawMoments& m0, double t, const ModelParams& p);

struct DensityProfile {
  std::vector<double> x;
  std::vector<double> exact;
  std::vector<double> expansion;    // small lambda*alpha*t form
  std::vector<double> smoothing;    // Gaussian smoothing of the Schrodinger density
  std::vector<double> schrodinger;  // lambda = 0 reference
  double beta_t = 0.0;
  /// lambda*alpha*t < 0.1, where the two approximations apply.
  bool expansions_valid = false;
};

/// Localization-smoothing exponent beta_t; infinite for lambda = 0 or t = 0.
double beta_t(double t, const ModelParams& p);

/// Position density of rho_t for an initial superposition of Gaussian packets,
/// evaluated on `x_grid` (ascending) by trapezoid quadrature over k.
DensityProfile position_density(const std::vector<GaussianPacket>& psi0, double t,
                                const ModelParams& p, const std::vector<double>& x_grid);

enum class DensityForm { Exact, Expansion, Smoothing, Schrodinger };

/// Integral of the selected density over [x_lo, x_hi].
double interval_probability(const DensityProfile& profile, double x_lo, double x_hi,
                            DensityForm form = DensityForm::Exact);

/// (E0 - E_inf) e^{-4 lambda alpha t} + E_inf; linear growth when alpha = 0.
double mean_energy(double E0, double t, const ModelParams& p);

}  // namespace collapse
