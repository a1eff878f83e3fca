#pragma once

#include <complex>
#include <span>

#include "collapse/physical_constants.hpp"

namespace collapse {

using cdouble = std::complex<double>;

/// Mass-independent constants of the model plus the physical constants it
/// needs. Defaults reproduce the reference choice (nucleon reference mass).
struct FundamentalConstants {
  double lambda0 = si::lambda0;    // m^-2 s^-1
  double alpha0 = si::alpha0;      // m^2
  double m0 = si::nucleon_mass;    // kg
  double hbar = si::hbar;          // J s
  double kB = si::boltzmann;       // J / K

  void validate() const;
  bool operator==(const FundamentalConstants&) const = default;
};

/// Parameters for one (possibly composite) particle.
struct ModelParams {
  double mass = 1.0;
  double lambda = 0.0;
  double alpha = 0.0;
  double hbar = 1.0;

  /// Rate lambda*alpha that controls momentum damping and energy relaxation.
  double damping() const { return lambda * alpha; }
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

struct DerivedConstants {
  double omega = 0.0;
  double theta = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double kappa = 0.0;
  cdouble a_inf;
  double sigma_q_bar = 0.0;
  double sigma_p_bar = 0.0;
  /// Stationary symmetrized q-p covariance; positive since Im(a_inf) < 0.
  double sigma_qp_bar_sq = 0.0;
  double E_inf = 0.0;
  /// Only meaningful when derived with a Boltzmann constant (SI mode).
  double temperature = 0.0;
};

enum class UnitMode { SI, Natural };

/// Nondimensionalization: natural units set hbar = m = 1 and measure lengths
/// in `length_scale` metres. Time and mass scales follow.
struct UnitSystem {
  UnitMode mode = UnitMode::SI;
  double length_scale = 1.0;  // m
  double time_scale = 1.0;    // s
  double mass_scale = 1.0;    // kg

  static UnitSystem si() { return {}; }
  /// Natural units for a particle of `mass` kg with length unit `length` m.
  static UnitSystem natural(double mass, double length, double hbar = si::hbar);

  double length_to_si(double x) const { return x * length_scale; }
  double length_from_si(double x) const { return x / length_scale; }
  double time_to_si(double t) const { return t * time_scale; }
  double time_from_si(double t) const { return t / time_scale; }
  double mass_to_si(double m) const { return m * mass_scale; }
  double mass_from_si(double m) const { return m / mass_scale; }

  /// Re-express SI parameters in this unit system (identity for SI).
  ModelParams to_units(const ModelParams& si_params) const;
  ModelParams to_si(const ModelParams& params) const;
};

/// Natural-unit parameters (hbar = m = 1).
ModelParams natural_params(double lambda, double alpha);

ModelParams scale_parameters(const FundamentalConstants& base, double mass);

ModelParams center_of_mass_params(const FundamentalConstants& base,
                                  std::span<const double> masses);

/// Closed-form constants of the model. If `kB` > 0 the temperature is filled.
DerivedConstants derive_constants(const ModelParams& p, double kB = 0.0);

/// Mass-independent temperature hbar^2 / (4 m0 alpha0 kB).
double model_temperature(const FundamentalConstants& base);

/// sigma_q_bar * sigma_p_bar via its closed form in theta and kappa.
double uncertainty_product(const DerivedConstants& d, double hbar);

}  // namespace collapse
