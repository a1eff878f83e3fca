#pragma once

#include <random>

#include "collapse/grid.hpp"
#include "collapse/model.hpp"

namespace collapse {

/// Stationary second moments (sigma_q_bar^2, sigma_p_bar^2, sigma_qp_bar^2).
struct StationaryTriple {
  double sq_q_bar = 0.0;
  double sq_p_bar = 0.0;
  double sq_qp_bar = 0.0;

  static StationaryTriple from(const DerivedConstants& d);
};

/// Relative deviations: sigma^2 = sigma_bar^2 (1 + deviation).
struct XYZ {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
};

XYZ deviations(const MomentRecord& m, const StationaryTriple& s);

/// Variance of O from second moments.
double sigma_O_sq(const MomentRecord& m, const StationaryTriple& s, const ModelParams& p);

/// The same quantity written in deviations, using the stationary uncertainty
/// identity.
double sigma_O_sq_from_deviations(const XYZ& d, const StationaryTriple& s);

/// Relative residuals of the four stationarity identities and of the relations
/// between the drift weights w1, w2, w3.
struct StationarityReport {
  double position_balance = 0.0;     // qp/m - 2 lambda q^2 q^2 + 2 alpha lambda q^2
  double momentum_balance = 0.0;     // qp^2 + alpha p - hbar^2/4
  double correlation_balance = 0.0;  // p/m - 4 lambda qp q
  double uncertainty = 0.0;          // q p - qp^2 - hbar^2/4
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double w1_closed_form = 0.0;  // |w1 - (-4 lambda q p)| / |w1|
  double w2_equals_w1 = 0.0;
  double w3_relation = 0.0;

  double max_residual() const;
};

StationarityReport stationarity_residuals(const StationaryTriple& s, const ModelParams& p);

/// Predicted d/dt E[sigma_O^2] for a Gaussian state with these moments; <= 0.
double drift_prediction(const MomentRecord& m, const StationaryTriple& s, const ModelParams& p);

/// (2 lambda0 omega^2 sin^2 theta / m0) in kg^-1 m^-2 s^-3.
double collapse_rate_prefactor(const FundamentalConstants& base);

/// Lower bound on |d/dt E[sigma_O^2]| for a body of `mass` with spread
/// `sigma_q` well above the stationary spread.
double collapse_rate_bound(double mass, double sigma_q, const FundamentalConstants& base);

/// Random moments obeying sigma_q^2 sigma_p^2 - sigma_qp^4 >= hbar^2/4, spread
/// over several decades around the stationary values.
MomentRecord random_valid_moments(std::mt19937_64& rng, const StationaryTriple& s,
                                  const ModelParams& p);

}  // namespace collapse
