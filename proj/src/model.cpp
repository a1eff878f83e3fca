#include "collapse/model.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "collapse/errors.hpp"

namespace collapse {

void FundamentalConstants::validate() const {
  require(lambda0 > 0 && alpha0 > 0 && m0 > 0 && hbar > 0 && kB > 0,
          ErrorCode::Domain, "fundamental constants must be strictly positive");
}

void ModelParams::validate() const {
  require(mass > 0 && hbar > 0, ErrorCode::Domain, "mass and hbar must be positive");
  require(lambda >= 0 && alpha >= 0, ErrorCode::Domain,
          "lambda and alpha must be non-negative");
  require(std::isfinite(lambda) && std::isfinite(alpha), ErrorCode::Domain,
          "lambda and alpha must be finite");
}

UnitSystem UnitSystem::natural(double mass, double length, double hbar) {
  require(mass > 0 && length > 0 && hbar > 0, ErrorCode::Domain,
          "unit scales must be positive");
  UnitSystem u;
  u.mode = UnitMode::Natural;
  u.length_scale = length;
  u.mass_scale = mass;
  u.time_scale = mass * length * length / hbar;
  return u;
}

ModelParams UnitSystem::to_units(const ModelParams& p) const {
  if (mode == UnitMode::SI) return p;
  ModelParams out;
  out.mass = p.mass / mass_scale;
  out.hbar = p.hbar * time_scale / (mass_scale * length_scale * length_scale);
  out.lambda = p.lambda * length_scale * length_scale * time_scale;
  out.alpha = p.alpha / (length_scale * length_scale);
  return out;
}

ModelParams UnitSystem::to_si(const ModelParams& p) const {
  if (mode == UnitMode::SI) return p;
  ModelParams out;
  out.mass = p.mass * mass_scale;
  out.hbar = p.hbar * mass_scale * length_scale * length_scale / time_scale;
  out.lambda = p.lambda / (length_scale * length_scale * time_scale);
  out.alpha = p.alpha * length_scale * length_scale;
  return out;
}

ModelParams natural_params(double lambda, double alpha) {
  ModelParams p{1.0, lambda, alpha, 1.0};
  p.validate();
  return p;
}

ModelParams scale_parameters(const FundamentalConstants& base, double mass) {
  base.validate();
  require(mass > 0 && std::isfinite(mass), ErrorCode::Domain, "mass must be positive");
  const double ratio = mass / base.m0;
  return ModelParams{mass, ratio * base.lambda0, base.alpha0 / ratio, base.hbar};
}

ModelParams center_of_mass_params(const FundamentalConstants& base,
                                  std::span<const double> masses) {
  require(!masses.empty(), ErrorCode::Domain, "center of mass needs at least one mass");
  for (double m : masses)
    require(m > 0, ErrorCode::Domain, "constituent masses must be positive");
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  return scale_parameters(base, total);
}

DerivedConstants derive_constants(const ModelParams& p, double kB) {
  p.validate();
  require(p.lambda > 0, ErrorCode::Domain, "derived constants need lambda > 0");
  const double la = p.lambda * p.alpha;
  const double hm = p.hbar / p.mass;

  DerivedConstants d;
  // (4 l^4 a^4 + l^2 hbar^2/m^2)^(1/4) = sqrt(l) * (4 l^2 a^4 + hbar^2/m^2)^(1/4)
  d.omega = 2.0 * std::sqrt(p.lambda) *
            std::pow(4.0 * la * la * p.alpha * p.alpha + hm * hm, 0.25);
  d.theta = 0.5 * std::atan2(p.hbar, 2.0 * la * p.alpha * p.mass);
  d.omega1 = std::sqrt(2.0) * d.omega * std::cos(d.theta);
  d.omega2 = std::sqrt(2.0) * d.omega * std::sin(d.theta);
  d.kappa = 2.0 * std::sqrt(2.0) * la / d.omega;

  const double s = std::sin(d.theta);
  const double c = std::cos(d.theta) - d.kappa;
  const double scale = p.mass * d.omega / (2.0 * std::sqrt(2.0) * p.hbar);
  d.a_inf = scale * cdouble(s, -c);

  d.sigma_q_bar = std::sqrt(p.hbar / (std::sqrt(2.0) * p.mass * d.omega * s));
  d.sigma_p_bar = std::sqrt(p.hbar * p.mass * d.omega / (2.0 * std::sqrt(2.0)) *
                            (s * s + c * c) / s);
  d.sigma_qp_bar_sq = 0.5 * p.hbar * c / s;
  // alpha -> 0 is the infinite-temperature (pure position localization) limit.
  d.E_inf = p.alpha > 0 ? p.hbar * p.hbar / (8.0 * p.mass * p.alpha)
                        : std::numeric_limits<double>::infinity();
  if (kB > 0) d.temperature = 2.0 * d.E_inf / kB;
  return d;
}

double model_temperature(const FundamentalConstants& base) {
  base.validate();
  return base.hbar * base.hbar / (4.0 * base.m0 * base.alpha0 * base.kB);
}

double uncertainty_product(const DerivedConstants& d, double hbar) {
  const double s = std::sin(d.theta);
  const double c = std::cos(d.theta) - d.kappa;
  return 0.5 * hbar * std::sqrt(1.0 + c * c / (s * s));
}

}  // namespace collapse
