#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "collapse/grid.hpp"
#include "collapse/model.hpp"

namespace collapse {

enum class DynamicsMode { Nonlinear, Linear };
enum class ParamSource { Explicit, Scaled };
enum class OutputFormat { Csv, Json };

/// Everything needed to reproduce an ensemble run. Text form is flat
/// `key = value` lines (see README for the key list); JSON objects with the
/// same keys are accepted too.
struct ExperimentConfig {
  UnitMode units = UnitMode::Natural;
  DynamicsMode mode = DynamicsMode::Nonlinear;

  ParamSource params = ParamSource::Explicit;
  double mass = 1.0;
  double lambda = 1.0;
  double alpha = 0.5;
  double hbar = 1.0;
  double mass_kg = 1.0;       // scaled source
  double length_scale = 1e-7; // m per natural length unit (scaled source, natural units)
  FundamentalConstants base;

  std::vector<double> centers{0.0};
  std::vector<double> weights{1.0};
  std::vector<double> momenta{0.0};
  /// Width parameter Re(a); nullopt selects the stationary width a_inf.
  std::optional<double> width;
  double width_imag = 0.0;

  Grid grid{-12.0, 12.0, 256};
  double dt = 0.002;
  double t_final = 1.0;
  std::size_t record_every = 10;

  std::size_t n_trajectories = 100;
  std::uint64_t seed = 1;
  std::size_t workers = 0;  // 0: hardware concurrency
  std::size_t histogram_bins = 48;
  bool track_drift = true;
  bool compare_master = true;

  std::string out_dir = ".";
  OutputFormat format = OutputFormat::Csv;

  /// Apply one `key = value` setting; unknown keys raise a Config error.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  ModelParams model_params() const;
  std::vector<GaussianPacket> initial_packets() const;
  std::size_t steps() const;

  std::string to_text() const;
  std::string to_json() const;
  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig parse_json(const std::string& text);
  /// Reads a file, choosing JSON when the first non-blank character is '{'.
  static ExperimentConfig load(const std::string& path);

  bool operator==(const ExperimentConfig&) const = default;
};

/// Count, mean and centred sum of squares; merges exactly in the order given.
struct RunningStat {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const RunningStat& other);
  double variance() const;
  double standard_error() const;
};

enum Channel : std::size_t {
  kQMean,
  kPMean,
  kSqQ,
  kSqP,
  kSqQP,
  kSigmaO,
  kEnergy,
  kNorm,
  kQ2,
  kP2,
  kSigmaOStep,
  kDriftStep,
  kDriftResidual,
  kChannelCount
};

const std::array<const char*, kChannelCount>& channel_names();

struct EnsembleSummary {
  DynamicsMode mode = DynamicsMode::Nonlinear;
  ModelParams params;
  std::vector<double> times;
  std::vector<std::array<RunningStat, kChannelCount>> stats;

  std::size_t n_requested = 0;
  std::size_t n_completed = 0;
  std::size_t n_aborted = 0;
  std::string first_abort;

  /// Final record of every completed trajectory, ordered by trajectory index.
  std::vector<std::pair<std::uint64_t, MomentRecord>> finals;

  double hist_lo = 0.0;
  double hist_hi = 0.0;
  std::vector<std::uint64_t> hist_counts;

  std::vector<double> x;
  std::vector<double> density_sum;  // sum of final |psi|^2 over trajectories

  double master_l1 = -1.0;  // negative when not computed

  void merge(const EnsembleSummary& other);

  double mean(std::size_t time_index, Channel c) const { return stats[time_index][c].mean; }
  double se(std::size_t time_index, Channel c) const {
    return stats[time_index][c].standard_error();
  }
  /// Normalized histogram density of the final <q>.
  std::vector<double> histogram_density() const;
  std::vector<double> mean_density() const;
};

/// Moment records of trajectory `index`, identical to its role in an ensemble.
std::vector<MomentRecord> run_single_trajectory(const ExperimentConfig& cfg, std::uint64_t index,
                                                GridState* final_state = nullptr);

/// Runs the ensemble in blocks of 64 trajectories and merges blocks in index
/// order, so the result does not depend on the worker count.
EnsembleSummary run_ensemble(const ExperimentConfig& cfg);

struct MasterComparison {
  std::vector<double> times;
  std::vector<double> energy_pred, energy_z;
  std::vector<double> q2_pred, q2_z;
  std::vector<double> p2_pred, p2_z;
  double max_abs_z = 0.0;
  double density_l1 = -1.0;
};

/// z-scores of ensemble energy, <q^2>, <p^2> against the statistical-operator
/// flow started from the t = 0 moments, and L1 distance of the final density.
MasterComparison compare_to_master(const EnsembleSummary& summary, const ExperimentConfig& cfg);

void write_summary_csv(std::ostream& os, const EnsembleSummary& s);
void write_finals_csv(std::ostream& os, const EnsembleSummary& s);
void write_histogram_csv(std::ostream& os, const EnsembleSummary& s);
void write_density_csv(std::ostream& os, const EnsembleSummary& s);
std::string summary_json(const EnsembleSummary& s);
void write_records_csv(std::ostream& os, const std::vector<MomentRecord>& records);

/// Writes summary/finals/histogram/density files into cfg.out_dir.
void write_outputs(const EnsembleSummary& s, const ExperimentConfig& cfg);

/// Shortest round-trip text for doubles (17 significant digits).
std::string format_double(double v);

}  // namespace collapse
