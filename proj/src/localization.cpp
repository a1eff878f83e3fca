#include "collapse/localization.hpp"

#include <algorithm>
#include <cmath>

#include "collapse/errors.hpp"

namespace collapse {

StationaryTriple StationaryTriple::from(const DerivedConstants& d) {
  return {d.sigma_q_bar * d.sigma_q_bar, d.sigma_p_bar * d.sigma_p_bar, d.sigma_qp_bar_sq};
}

XYZ deviations(const MomentRecord& m, const StationaryTriple& s) {
  return {m.sq_q / s.sq_q_bar - 1.0, m.sq_p / s.sq_p_bar - 1.0, m.sq_qp / s.sq_qp_bar - 1.0};
}

double sigma_O_sq(const MomentRecord& m, const StationaryTriple& s, const ModelParams& p) {
  return m.sq_p + s.sq_p_bar / s.sq_q_bar * m.sq_q - 2.0 * s.sq_qp_bar / s.sq_q_bar * m.sq_qp -
         p.hbar * p.hbar / (2.0 * s.sq_q_bar);
}

double sigma_O_sq_from_deviations(const XYZ& d, const StationaryTriple& s) {
  return s.sq_p_bar * (d.X + d.Y) - 2.0 * s.sq_qp_bar * s.sq_qp_bar / s.sq_q_bar * d.Z;
}

double StationarityReport::max_residual() const {
  return std::max({std::abs(position_balance), std::abs(momentum_balance),
                   std::abs(correlation_balance), std::abs(uncertainty), w1_closed_form,
                   w2_equals_w1, w3_relation});
}

StationarityReport stationarity_residuals(const StationaryTriple& s, const ModelParams& p) {
  const double lam = p.lambda, al = p.alpha, m = p.mass, hb2 = p.hbar * p.hbar;
  const double q = s.sq_q_bar, pp = s.sq_p_bar, c = s.sq_qp_bar;
  StationarityReport r;
  r.position_balance = (c / m - 2.0 * lam * q * q + 2.0 * al * lam * q) / (2.0 * lam * q * q);
  r.momentum_balance = (c * c + al * pp - hb2 / 4.0) / (hb2 / 4.0);
  r.correlation_balance = (pp / m - 4.0 * lam * c * q) / (pp / m);
  r.uncertainty = (q * pp - c * c - hb2 / 4.0) / (hb2 / 4.0);

  r.w1 = -8.0 * lam * (q * pp - 0.5 * al * pp - c * c);
  r.w2 = -2.0 * (2.0 * al * lam * pp + c / m * pp / q);
  r.w3 = 2.0 * c / m * pp / q;
  r.w1_closed_form = std::abs(r.w1 - (-4.0 * lam * q * pp)) / std::abs(r.w1);
  r.w2_equals_w1 = std::abs(r.w2 - r.w1) / std::abs(r.w1);
  r.w3_relation = std::abs(r.w3 + 2.0 * c * c / (q * pp) * r.w1) / std::abs(r.w3);
  return r;
}

double drift_prediction(const MomentRecord& m, const StationaryTriple& s, const ModelParams& p) {
  const double so = sigma_O_sq(m, s, p);
  const double shape = m.sq_q / s.sq_q_bar - m.sq_qp / s.sq_qp_bar;
  const double dq = m.sq_q - s.sq_q_bar;
  return -4.0 * p.lambda *
         (s.sq_q_bar * so + s.sq_qp_bar * s.sq_qp_bar * shape * shape +
          p.hbar * p.hbar / (4.0 * s.sq_q_bar * s.sq_q_bar) * dq * dq);
}

double collapse_rate_prefactor(const FundamentalConstants& base) {
  base.validate();
  const auto d = derive_constants(scale_parameters(base, base.m0));
  const double st = std::sin(d.theta);
  return 2.0 * base.lambda0 * d.omega * d.omega * st * st / base.m0;
}

double collapse_rate_bound(double mass, double sigma_q, const FundamentalConstants& base) {
  require(mass > 0, ErrorCode::Domain, "mass must be positive");
  const auto d = derive_constants(scale_parameters(base, mass));
  require(sigma_q > d.sigma_q_bar, ErrorCode::Domain,
          "collapse-rate bound needs sigma_q above the stationary spread");
  const double s2 = sigma_q * sigma_q;
  return collapse_rate_prefactor(base) * mass * mass * mass * s2 * s2;
}

MomentRecord random_valid_moments(std::mt19937_64& rng, const StationaryTriple& s,
                                  const ModelParams& p) {
  std::uniform_real_distribution<double> decades(-2.0, 2.0);
  std::uniform_real_distribution<double> corr(-10.0, 10.0);
  std::exponential_distribution<double> slack(1.0);
  MomentRecord m;
  m.sq_q = s.sq_q_bar * std::pow(10.0, decades(rng));
  m.sq_qp = s.sq_qp_bar * corr(rng);
  const double floor = (p.hbar * p.hbar / 4.0 + m.sq_qp * m.sq_qp) / m.sq_q;
  m.sq_p = floor * (1.0 + slack(rng));
  m.sigma_O_sq = sigma_O_sq(m, s, p);
  return m;
}

}  // namespace collapse
