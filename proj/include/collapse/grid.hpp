#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "collapse/fft.hpp"
#include "collapse/model.hpp"
#include "collapse/rng.hpp"

namespace collapse {

/// Uniform periodic grid on [x_min, x_max).
struct Grid {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n_points = 256;

  double length() const { return x_max - x_min; }
  double dx() const { return length() / static_cast<double>(n_points); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  void validate() const;
  bool operator==(const Grid&) const = default;
};

struct GridState {
  std::vector<cdouble> psi;
  double time = 0.0;
  double norm_sq = 1.0;
};

struct MomentRecord {
  double t = 0.0;
  double q_mean = 0.0;
  double p_mean = 0.0;
  double sq_q = 0.0;
  double sq_p = 0.0;
  double sq_qp = 0.0;
  double sigma_O_sq = 0.0;
  double energy = 0.0;
  double norm_sq = 1.0;
};

/// One component c * exp(-a (x - xbar)^2 + i kbar x) of an initial state.
struct GaussianPacket {
  cdouble weight{1.0, 0.0};
  cdouble a{1.0, 0.0};
  double xbar = 0.0;
  double kbar = 0.0;
};

/// Per-step observer: (state after the step, record, step index).
using StepObserver = std::function<void(const GridState&, const MomentRecord&, std::size_t)>;

/// Owns the spectral workspace for one trajectory. Not thread-safe; give each
/// worker its own solver.
class GridSolver {
 public:
  GridSolver(Grid grid, ModelParams params);

  const Grid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const std::optional<DerivedConstants>& stationary() const { return derived_; }
  const std::vector<double>& positions() const { return x_; }

  /// Samples of a normalized superposition of Gaussian packets.
  GridState make_state(const std::vector<GaussianPacket>& packets) const;

  /// (q + i (alpha/hbar) p) psi, p applied spectrally. Unnormalized.
  GridState apply_A(const GridState& s);
  /// (p - 2 i hbar a_inf q) psi; the stationary Gaussian is its eigenstate.
  GridState apply_O(const GridState& s);

  /// One weak-order-1 step of the linear equation driven by increment dxi.
  /// Returns the unnormalized state; norm_sq is updated.
  void linear_step(GridState& s, double dt, double dxi);

  /// Shifted linear step plus renormalization. Returns the Wiener increment used.
  double nonlinear_step(GridState& s, double dt, NoiseStream& noise);

  MomentRecord observables(const GridState& s);
  /// <(O - <O>)^dagger (O - <O>)> evaluated directly on the grid.
  double sigma_O_sq_direct(const GridState& s);
  /// Excess kurtosis of |psi|^2 as a position distribution.
  double excess_kurtosis(const GridState& s) const;
  /// Probability mass in [x_lo, x_hi].
  double interval_mass(const GridState& s, double x_lo, double x_hi) const;

  /// Largest dt with lambda * max(x^2, (alpha/hbar)^2 p^2) * dt < 0.05 on the
  /// state's support (|psi|^2 above 1e-10 of peak).
  double suggested_dt(const GridState& s);

  double norm_sq(const GridState& s) const;
  double mean_position(const GridState& s) const;

  /// Throws Resolution if boundary amplitude exceeds 1e-8 of the peak.
  void check_boundary(const GridState& s) const;
  /// Throws Resolution if the top third of the spectrum carries > 1e-6 of the mass.
  void check_spectrum(const std::vector<cdouble>& spectrum) const;

 private:
  void derivative(const std::vector<cdouble>& in, std::vector<cdouble>& out);
  void dilate(std::vector<cdouble>& psi, double amount);
  const std::vector<cdouble>& half_kinetic(double dt);

  Grid grid_;
  ModelParams params_;
  std::optional<DerivedConstants> derived_;
  Fft fft_;
  std::vector<double> x_;
  std::vector<double> k_;
  std::vector<cdouble> work_;
  std::vector<cdouble> rk_[5];
  std::vector<cdouble> kinetic_;
  double kinetic_dt_ = -1.0;
};

/// Runs nonlinear steps from `psi0` to `t_final`. Records every
/// `record_every` steps (0: only initial and final) and always the final time.
std::vector<MomentRecord> evolve_trajectory(GridSolver& solver, GridState psi0, double t_final,
                                            double dt, NoiseStream& noise,
                                            std::size_t record_every,
                                            const StepObserver& observer = {},
                                            GridState* final_state = nullptr);

/// Runs the linear equation driven by the bare Wiener increments. Records are
/// computed on the normalized state and carry the unnormalized norm in norm_sq.
std::vector<MomentRecord> evolve_linear_trajectory(GridSolver& solver, GridState psi0,
                                                   double t_final, double dt, NoiseStream& noise,
                                                   std::size_t record_every,
                                                   GridState* final_state = nullptr);

}  // namespace collapse
