#include "collapse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "collapse/errors.hpp"

namespace collapse {

namespace {

constexpr cdouble I{0.0, 1.0};

double abs2(cdouble z) { return z.real() * z.real() + z.imag() * z.imag(); }

}  // namespace

void Grid::validate() const {
  require(x_max > x_min, ErrorCode::Domain, "grid needs x_max > x_min");
  require(n_points >= 64 && (n_points & (n_points - 1)) == 0, ErrorCode::Domain,
          "grid size must be a power of two >= 64");
}

GridSolver::GridSolver(Grid grid, ModelParams params)
    : grid_(grid), params_(params), fft_((grid.validate(), grid.n_points)) {
  params_.validate();
  if (params_.lambda > 0) derived_ = derive_constants(params_);
  const std::size_t n = grid_.n_points;
  x_.resize(n);
  k_.resize(n);
  const double dk = 2.0 * std::numbers::pi / grid_.length();
  for (std::size_t i = 0; i < n; ++i) {
    x_[i] = grid_.x(i);
    const auto j = static_cast<long>(i);
    k_[i] = dk * static_cast<double>(i < n / 2 ? j : j - static_cast<long>(n));
  }
  work_.resize(n);
  for (auto& v : rk_) v.resize(n);
}

GridState GridSolver::make_state(const std::vector<GaussianPacket>& packets) const {
  require(!packets.empty(), ErrorCode::Domain, "initial state needs at least one packet");
  GridState s;
  s.psi.assign(grid_.n_points, cdouble{});
  for (const auto& pk : packets) {
    require(pk.a.real() > 0, ErrorCode::Domain, "packet width needs Re(a) > 0");
    const double amp = std::pow(2.0 * pk.a.real() / std::numbers::pi, 0.25);
    for (std::size_t i = 0; i < grid_.n_points; ++i) {
      const double d = x_[i] - pk.xbar;
      s.psi[i] += pk.weight * amp * std::exp(-pk.a * d * d + I * pk.kbar * x_[i]);
    }
  }
  const double nrm = norm_sq(s);
  require(nrm > 0, ErrorCode::Domain, "initial state has zero norm on the grid");
  const double inv = 1.0 / std::sqrt(nrm);
  for (auto& v : s.psi) v *= inv;
  s.norm_sq = 1.0;
  return s;
}

double GridSolver::norm_sq(const GridState& s) const {
  double sum = 0.0;
  for (const auto& v : s.psi) sum += abs2(v);
  return sum * grid_.dx();
}

double GridSolver::mean_position(const GridState& s) const {
  double sum = 0.0, w = 0.0;
  for (std::size_t i = 0; i < s.psi.size(); ++i) {
    const double p = abs2(s.psi[i]);
    sum += x_[i] * p;
    w += p;
  }
  return sum / w;
}

void GridSolver::derivative(const std::vector<cdouble>& in, std::vector<cdouble>& out) {
  out = in;
  fft_.forward(out);
  const std::size_t nyq = grid_.n_points / 2;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (i == nyq) ? 0.0 : I * k_[i];
  fft_.inverse(out);
}

const std::vector<cdouble>& GridSolver::half_kinetic(double dt) {
  if (dt != kinetic_dt_) {
    kinetic_.resize(grid_.n_points);
    const double c = params_.hbar * dt / (4.0 * params_.mass);
    for (std::size_t i = 0; i < k_.size(); ++i) kinetic_[i] = std::exp(-I * c * k_[i] * k_[i]);
    kinetic_dt_ = dt;
  }
  return kinetic_;
}

GridState GridSolver::apply_A(const GridState& s) {
  derivative(s.psi, work_);
  GridState out = s;
  const double a = params_.alpha;
  for (std::size_t i = 0; i < s.psi.size(); ++i) out.psi[i] = x_[i] * s.psi[i] + a * work_[i];
  rk_[0] = s.psi;
  fft_.forward(rk_[0]);
  check_spectrum(rk_[0]);
  out.norm_sq = norm_sq(out);
  return out;
}

GridState GridSolver::apply_O(const GridState& s) {
  require(derived_.has_value(), ErrorCode::Domain, "operator O needs lambda > 0");
  derivative(s.psi, work_);
  GridState out = s;
  const double hb = params_.hbar;
  const cdouble c = -2.0 * I * hb * derived_->a_inf;
  for (std::size_t i = 0; i < s.psi.size(); ++i)
    out.psi[i] = -I * hb * work_[i] + c * x_[i] * s.psi[i];
  out.norm_sq = norm_sq(out);
  return out;
}

// psi(x) -> psi(x e^{-amount}) to fourth order, via RK4 on d/ds psi = -x psi'.
void GridSolver::dilate(std::vector<cdouble>& psi, double amount) {
  if (amount == 0.0) return;
  auto rhs = [&](const std::vector<cdouble>& in, std::vector<cdouble>& out) {
    derivative(in, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= -amount * x_[i];
  };
  auto& k1 = rk_[0];
  auto& k2 = rk_[1];
  auto& k3 = rk_[2];
  auto& k4 = rk_[3];
  auto& tmp = rk_[4];
  const std::size_t n = psi.size();
  rhs(psi, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + 0.5 * k1[i];
  rhs(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + 0.5 * k2[i];
  rhs(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + k3[i];
  rhs(tmp, k4);
  for (std::size_t i = 0; i < n; ++i)
    psi[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
}

void GridSolver::linear_step(GridState& s, double dt, double dxi) {
  require(dt > 0, ErrorCode::Domain, "step size must be positive");
  const double lam = params_.lambda, al = params_.alpha;
  const double c = std::sqrt(lam) * dxi;
  const double const_part = 0.5 * c * c * al - 0.5 * lam * al * dt;
  const auto& kin = half_kinetic(dt);
  auto& psi = s.psi;

  // Norm after the position multiplier alone; the remaining factors change
  // the norm only at order dt, so a much larger result signals instability.
  double expected = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double x = x_[i];
    expected += abs2(psi[i]) * std::exp(2.0 * (c * x - lam * x * x * dt + const_part));
  }
  expected *= grid_.dx();

  // exp(c A) = e^{c q} e^{i c alpha p/hbar} e^{c^2 alpha/2}; the translation is
  // diagonal in k and commutes with the kinetic half step.
  fft_.forward(psi);
  for (std::size_t i = 0; i < psi.size(); ++i)
    psi[i] *= kin[i] * std::exp(I * (c * al * k_[i]));
  fft_.inverse(psi);

  // Ito remainder: -lambda q^2 - lambda alpha/2 - 2 lambda alpha x d/dx.
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double x = x_[i];
    psi[i] *= std::exp(c * x - lam * x * x * dt + const_part);
  }
  dilate(psi, 2.0 * lam * al * dt);

  fft_.forward(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kin[i];
  fft_.inverse(psi);

  s.time += dt;
  s.norm_sq = norm_sq(s);
  if (!std::isfinite(s.norm_sq) || s.norm_sq > 10.0 * expected)
    fail(ErrorCode::Instability,
         "linear step grew the norm tenfold beyond the multiplicative factor; reduce dt");
}

double GridSolver::nonlinear_step(GridState& s, double dt, NoiseStream& noise) {
  const double r = mean_position(s);
  const double dW = noise.next_increment(dt);
  const double dxi = dW + 2.0 * std::sqrt(params_.lambda) * r * dt;
  s.norm_sq = 1.0;
  linear_step(s, dt, dxi);
  if (!(s.norm_sq > 0) || !std::isfinite(s.norm_sq))
    fail(ErrorCode::TrajectoryAbort, "state norm vanished after a step");
  const double inv = 1.0 / std::sqrt(s.norm_sq);
  for (auto& v : s.psi) v *= inv;
  s.norm_sq = 1.0;
  check_boundary(s);
  return dW;
}

void GridSolver::check_boundary(const GridState& s) const {
  double peak = 0.0;
  for (const auto& v : s.psi) peak = std::max(peak, abs2(v));
  const std::size_t n = s.psi.size();
  const double edge = std::max({abs2(s.psi[0]), abs2(s.psi[1]), abs2(s.psi[n - 1])});
  if (edge > 1e-16 * peak)
    fail(ErrorCode::Resolution, "wavefunction reaches the grid boundary; widen the domain");
}

void GridSolver::check_spectrum(const std::vector<cdouble>& spectrum) const {
  const double kcut = (std::numbers::pi / grid_.dx()) * (2.0 / 3.0);
  double top = 0.0, total = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double w = abs2(spectrum[i]);
    total += w;
    if (std::abs(k_[i]) > kcut) top += w;
  }
  if (top > 1e-6 * total)
    fail(ErrorCode::Resolution, "spectral mass in the top third exceeds 1e-6; refine the grid");
}

MomentRecord GridSolver::observables(const GridState& s) {
  const double dx = grid_.dx();
  const double nrm = norm_sq(s);
  require(std::abs(nrm - 1.0) < 1e-6, ErrorCode::Contract, "observables need a normalized state");
  const double hb = params_.hbar;
  const std::size_t n = s.psi.size();

  MomentRecord m;
  m.t = s.time;
  m.norm_sq = nrm;
  double q1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) q1 += x_[i] * abs2(s.psi[i]);
  m.q_mean = q1 * dx;
  double q2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x_[i] - m.q_mean;
    q2 += d * d * abs2(s.psi[i]);
  }
  m.sq_q = q2 * dx;

  work_ = s.psi;
  fft_.forward(work_);
  check_spectrum(work_);
  double w = 0.0, k1 = 0.0, k2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = abs2(work_[i]);
    w += p;
    k1 += k_[i] * p;
    k2 += k_[i] * k_[i] * p;
  }
  m.p_mean = hb * k1 / w;
  const double p2 = hb * hb * k2 / w;
  m.sq_p = p2 - m.p_mean * m.p_mean;
  m.energy = p2 / (2.0 * params_.mass);

  derivative(s.psi, work_);
  double qp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cdouble dp = -I * hb * work_[i] - m.p_mean * s.psi[i];
    qp += (std::conj(s.psi[i]) * (x_[i] - m.q_mean) * dp).real();
  }
  m.sq_qp = qp * dx;

  if (derived_) {
    const auto& d = *derived_;
    const double sq2 = d.sigma_q_bar * d.sigma_q_bar;
    const double sp2 = d.sigma_p_bar * d.sigma_p_bar;
    m.sigma_O_sq = m.sq_p + sp2 / sq2 * m.sq_q - 2.0 * d.sigma_qp_bar_sq / sq2 * m.sq_qp -
                   hb * hb / (2.0 * sq2);
  } else {
    m.sigma_O_sq = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

double GridSolver::sigma_O_sq_direct(const GridState& s) {
  const GridState o = apply_O(s);
  const double dx = grid_.dx();
  cdouble mean{};
  for (std::size_t i = 0; i < s.psi.size(); ++i) mean += std::conj(s.psi[i]) * o.psi[i];
  mean *= dx;
  double var = 0.0;
  for (std::size_t i = 0; i < s.psi.size(); ++i) var += abs2(o.psi[i] - mean * s.psi[i]);
  return var * dx;
}

double GridSolver::excess_kurtosis(const GridState& s) const {
  double w = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < s.psi.size(); ++i) {
    w += abs2(s.psi[i]);
    m1 += x_[i] * abs2(s.psi[i]);
  }
  m1 /= w;
  double m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < s.psi.size(); ++i) {
    const double d2 = (x_[i] - m1) * (x_[i] - m1);
    m2 += d2 * abs2(s.psi[i]);
    m4 += d2 * d2 * abs2(s.psi[i]);
  }
  m2 /= w;
  m4 /= w;
  return m4 / (m2 * m2) - 3.0;
}

double GridSolver::interval_mass(const GridState& s, double x_lo, double x_hi) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.psi.size(); ++i)
    if (x_[i] >= x_lo && x_[i] < x_hi) sum += abs2(s.psi[i]);
  return sum * grid_.dx();
}

double GridSolver::suggested_dt(const GridState& s) {
  if (params_.lambda == 0.0) return std::numeric_limits<double>::infinity();
  double peak = 0.0;
  for (const auto& v : s.psi) peak = std::max(peak, abs2(v));
  double xmax2 = 0.0;
  for (std::size_t i = 0; i < s.psi.size(); ++i)
    if (abs2(s.psi[i]) > 1e-10 * peak) xmax2 = std::max(xmax2, x_[i] * x_[i]);
  work_ = s.psi;
  fft_.forward(work_);
  double kpeak = 0.0;
  for (const auto& v : work_) kpeak = std::max(kpeak, abs2(v));
  double kmax2 = 0.0;
  for (std::size_t i = 0; i < work_.size(); ++i)
    if (abs2(work_[i]) > 1e-10 * kpeak) kmax2 = std::max(kmax2, k_[i] * k_[i]);
  const double a2p2 = params_.alpha * params_.alpha * kmax2;  // (alpha/hbar)^2 p^2 = alpha^2 k^2
  return 0.05 / (params_.lambda * std::max(xmax2, a2p2));
}

std::vector<MomentRecord> evolve_trajectory(GridSolver& solver, GridState psi0, double t_final,
                                            double dt, NoiseStream& noise,
                                            std::size_t record_every, const StepObserver& observer,
                                            GridState* final_state) {
  require(t_final > 0, ErrorCode::Domain, "t_final must be positive");
  require(dt > 0, ErrorCode::Domain, "step size must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
  require(steps >= 1, ErrorCode::Domain, "t_final shorter than one step");

  std::vector<MomentRecord> records;
  GridState s = std::move(psi0);
  records.push_back(solver.observables(s));
  for (std::size_t i = 0; i < steps; ++i) {
    try {
      solver.nonlinear_step(s, dt, noise);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " (t = " << s.time << ", step " << i << ")";
      throw Error(e.code(), msg.str());
    }
    const bool last = i + 1 == steps;
    const bool rec = last || (record_every > 0 && (i + 1) % record_every == 0);
    if (rec || observer) {
      const auto m = solver.observables(s);
      if (observer) observer(s, m, i + 1);
      if (rec) records.push_back(m);
    }
  }
  if (final_state) *final_state = std::move(s);
  return records;
}

std::vector<MomentRecord> evolve_linear_trajectory(GridSolver& solver, GridState psi0,
                                                   double t_final, double dt, NoiseStream& noise,
                                                   std::size_t record_every,
                                                   GridState* final_state) {
  require(t_final > 0, ErrorCode::Domain, "t_final must be positive");
  require(dt > 0, ErrorCode::Domain, "step size must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
  require(steps >= 1, ErrorCode::Domain, "t_final shorter than one step");

  auto record = [&](const GridState& s) {
    GridState unit = s;
    const double inv = 1.0 / std::sqrt(s.norm_sq);
    for (auto& v : unit.psi) v *= inv;
    unit.norm_sq = 1.0;
    auto m = solver.observables(unit);
    m.norm_sq = s.norm_sq;
    return m;
  };

  std::vector<MomentRecord> records;
  GridState s = std::move(psi0);
  s.norm_sq = solver.norm_sq(s);
  records.push_back(record(s));
  for (std::size_t i = 0; i < steps; ++i) {
    try {
      solver.linear_step(s, dt, noise.next_increment(dt));
      if (!(s.norm_sq > 0) || !std::isfinite(s.norm_sq))
        fail(ErrorCode::TrajectoryAbort, "state norm vanished after a step");
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " (t = " << s.time << ", step " << i << ")";
      throw Error(e.code(), msg.str());
    }
    const bool last = i + 1 == steps;
    if (last || (record_every > 0 && (i + 1) % record_every == 0)) records.push_back(record(s));
  }
  if (final_state) *final_state = std::move(s);
  return records;
}

}  // namespace collapse
