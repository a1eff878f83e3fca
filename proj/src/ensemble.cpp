#include "collapse/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "collapse/errors.hpp"
#include "collapse/localization.hpp"
#include "collapse/master.hpp"

namespace collapse {

namespace {

constexpr std::size_t kBlockSize = 64;
constexpr const char* kSummaryVersion = "# collapse-ensemble-summary v1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Config, "config key '" + key + "': expected a number, got '" + v + "'");
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long d = std::stoull(v, &used);
      if (used == v.size()) return d;
    }
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Config, "config key '" + key + "': expected a non-negative integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto l = lower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  fail(ErrorCode::Config, "config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) fail(ErrorCode::Config, "config key '" + key + "': empty list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_double(v[i]);
  }
  return s;
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  auto d = [](double v) { return format_double(v); };
  auto u = [](std::uint64_t v) { return std::to_string(v); };
  e.emplace_back("units", c.units == UnitMode::SI ? "si" : "natural");
  e.emplace_back("mode", c.mode == DynamicsMode::Linear ? "linear" : "nonlinear");
  e.emplace_back("params", c.params == ParamSource::Scaled ? "scaled" : "explicit");
  e.emplace_back("mass", d(c.mass));
  e.emplace_back("lambda", d(c.lambda));
  e.emplace_back("alpha", d(c.alpha));
  e.emplace_back("hbar", d(c.hbar));
  e.emplace_back("mass_kg", d(c.mass_kg));
  e.emplace_back("length_scale", d(c.length_scale));
  e.emplace_back("lambda0", d(c.base.lambda0));
  e.emplace_back("alpha0", d(c.base.alpha0));
  e.emplace_back("packet.centers", join(c.centers));
  e.emplace_back("packet.weights", join(c.weights));
  e.emplace_back("packet.momenta", join(c.momenta));
  e.emplace_back("packet.width", c.width ? d(*c.width) : "stationary");
  e.emplace_back("packet.width_imag", d(c.width_imag));
  e.emplace_back("grid.x_min", d(c.grid.x_min));
  e.emplace_back("grid.x_max", d(c.grid.x_max));
  e.emplace_back("grid.n_points", u(c.grid.n_points));
  e.emplace_back("dt", d(c.dt));
  e.emplace_back("t_final", d(c.t_final));
  e.emplace_back("record_every", u(c.record_every));
  e.emplace_back("n_trajectories", u(c.n_trajectories));
  e.emplace_back("seed", u(c.seed));
  e.emplace_back("workers", u(c.workers));
  e.emplace_back("histogram_bins", u(c.histogram_bins));
  e.emplace_back("track_drift", c.track_drift ? "true" : "false");
  e.emplace_back("compare_master", c.compare_master ? "true" : "false");
  e.emplace_back("out_dir", c.out_dir);
  e.emplace_back("format", c.format == OutputFormat::Json ? "json" : "csv");
  return e;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- config

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  const std::string lv = lower(v);
  if (key == "units") {
    if (lv == "si") units = UnitMode::SI;
    else if (lv == "natural") units = UnitMode::Natural;
    else fail(ErrorCode::Config, "units must be 'si' or 'natural'");
  } else if (key == "mode") {
    if (lv == "linear") mode = DynamicsMode::Linear;
    else if (lv == "nonlinear") mode = DynamicsMode::Nonlinear;
    else fail(ErrorCode::Config, "mode must be 'linear' or 'nonlinear'");
  } else if (key == "params") {
    if (lv == "explicit") params = ParamSource::Explicit;
    else if (lv == "scaled") params = ParamSource::Scaled;
    else fail(ErrorCode::Config, "params must be 'explicit' or 'scaled'");
  } else if (key == "mass") {
    mass = to_double(key, v);
  } else if (key == "lambda") {
    lambda = to_double(key, v);
  } else if (key == "alpha") {
    alpha = to_double(key, v);
  } else if (key == "hbar") {
    hbar = to_double(key, v);
  } else if (key == "mass_kg") {
    mass_kg = to_double(key, v);
  } else if (key == "length_scale") {
    length_scale = to_double(key, v);
  } else if (key == "lambda0") {
    base.lambda0 = to_double(key, v);
  } else if (key == "alpha0") {
    base.alpha0 = to_double(key, v);
  } else if (key == "packet.centers") {
    centers = to_list(key, v);
  } else if (key == "packet.weights") {
    weights = to_list(key, v);
  } else if (key == "packet.momenta") {
    momenta = to_list(key, v);
  } else if (key == "packet.width") {
    if (lv == "stationary") width.reset();
    else width = to_double(key, v);
  } else if (key == "packet.width_imag") {
    width_imag = to_double(key, v);
  } else if (key == "grid.x_min") {
    grid.x_min = to_double(key, v);
  } else if (key == "grid.x_max") {
    grid.x_max = to_double(key, v);
  } else if (key == "grid.n_points") {
    grid.n_points = to_uint(key, v);
  } else if (key == "dt") {
    dt = to_double(key, v);
  } else if (key == "t_final") {
    t_final = to_double(key, v);
  } else if (key == "record_every") {
    record_every = to_uint(key, v);
  } else if (key == "n_trajectories") {
    n_trajectories = to_uint(key, v);
  } else if (key == "seed") {
    seed = to_uint(key, v);
  } else if (key == "workers") {
    workers = to_uint(key, v);
  } else if (key == "histogram_bins") {
    histogram_bins = to_uint(key, v);
  } else if (key == "track_drift") {
    track_drift = to_bool(key, v);
  } else if (key == "compare_master") {
    compare_master = to_bool(key, v);
  } else if (key == "out_dir") {
    out_dir = v;
  } else if (key == "format") {
    if (lv == "csv") format = OutputFormat::Csv;
    else if (lv == "json") format = OutputFormat::Json;
    else fail(ErrorCode::Config, "format must be 'csv' or 'json'");
  } else {
    fail(ErrorCode::Config, "unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorCode::Config, msg);
  };
  check(std::isfinite(dt) && dt > 0, "dt must be positive");
  check(std::isfinite(t_final) && t_final >= dt, "t_final must be at least one step");
  check(n_trajectories >= 1, "n_trajectories must be >= 1");
  check(histogram_bins >= 1, "histogram_bins must be >= 1");
  check(!centers.empty(), "packet.centers must not be empty");
  check(weights.size() == 1 || weights.size() == centers.size(),
        "packet.weights must have one entry or one per center");
  check(momenta.size() == 1 || momenta.size() == centers.size(),
        "packet.momenta must have one entry or one per center");
  check(!width || *width > 0, "packet.width must be positive or 'stationary'");
  check(mass_kg > 0 && length_scale > 0, "mass_kg and length_scale must be positive");
  try {
    grid.validate();
    base.validate();
    model_params().validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  for (double c : centers)
    check(c > grid.x_min && c < grid.x_max, "packet centers must lie inside the grid");
  if (!width) check(model_params().lambda > 0, "stationary packet width needs lambda > 0");
}

ModelParams ExperimentConfig::model_params() const {
  if (params == ParamSource::Explicit) return ModelParams{mass, lambda, alpha, hbar};
  const auto si_params = scale_parameters(base, mass_kg);
  if (units == UnitMode::SI) return si_params;
  return UnitSystem::natural(mass_kg, length_scale, base.hbar).to_units(si_params);
}

std::vector<GaussianPacket> ExperimentConfig::initial_packets() const {
  const auto p = model_params();
  cdouble a{0.0, 0.0};
  if (width) a = cdouble(*width, width_imag);
  else a = derive_constants(p).a_inf;
  std::vector<GaussianPacket> out;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    GaussianPacket pk;
    pk.weight = weights.size() == 1 ? weights[0] : weights[i];
    pk.a = a;
    pk.xbar = centers[i];
    pk.kbar = momenta.size() == 1 ? momenta[0] : momenta[i];
    out.push_back(pk);
  }
  return out;
}

std::size_t ExperimentConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  for (const auto& [k, v] : config_entries(*this)) s += k + " = " + v + "\n";
  return s;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : config_entries(*this)) j[k] = v;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Config, "config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("invalid JSON config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::Config, "JSON config must be an object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    std::string v;
    if (value.is_string()) {
      v = value.get<std::string>();
    } else if (value.is_boolean()) {
      v = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      v = value.dump();
    } else if (value.is_number()) {
      v = format_double(value.get<double>());
    } else if (value.is_array()) {
      std::vector<double> xs;
      for (const auto& x : value) {
        if (!x.is_number()) fail(ErrorCode::Config, "config key '" + key + "': list must be numeric");
        xs.push_back(x.get<double>());
      }
      v = join(xs);
    } else {
      fail(ErrorCode::Config, "config key '" + key + "': unsupported JSON value");
    }
    cfg.set(key, v);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json(text);
  return parse_text(text);
}

// ---------------------------------------------------------------- statistics

void RunningStat::add(double x) {
  count += 1.0;
  const double delta = x - mean;
  mean += delta / count;
  m2 += delta * (x - mean);
}

void RunningStat::merge(const RunningStat& o) {
  if (o.count == 0.0) return;
  if (count == 0.0) {
    *this = o;
    return;
  }
  const double n = count + o.count;
  const double delta = o.mean - mean;
  mean += delta * (o.count / n);
  m2 += o.m2 + delta * delta * (count * o.count / n);
  count = n;
}

double RunningStat::variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }

double RunningStat::standard_error() const {
  return count > 0.0 ? std::sqrt(variance() / count) : 0.0;
}

const std::array<const char*, kChannelCount>& channel_names() {
  static const std::array<const char*, kChannelCount> names{
      "q_mean", "p_mean", "sq_q", "sq_p", "sq_qp", "sigma_O_sq", "energy",
      "norm_sq", "q2", "p2", "sigma_O_step", "drift_step", "drift_residual"};
  return names;
}

void EnsembleSummary::merge(const EnsembleSummary& o) {
  if (o.n_requested == 0) return;
  if (n_requested == 0) {
    *this = o;
    return;
  }
  require(times.size() == o.times.size() && x.size() == o.x.size() &&
              hist_counts.size() == o.hist_counts.size(),
          ErrorCode::Contract, "cannot merge summaries of different runs");
  for (std::size_t i = 0; i < stats.size(); ++i)
    for (std::size_t c = 0; c < kChannelCount; ++c) stats[i][c].merge(o.stats[i][c]);
  n_requested += o.n_requested;
  n_completed += o.n_completed;
  n_aborted += o.n_aborted;
  if (first_abort.empty()) first_abort = o.first_abort;
  finals.insert(finals.end(), o.finals.begin(), o.finals.end());
  std::stable_sort(finals.begin(), finals.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < hist_counts.size(); ++i) hist_counts[i] += o.hist_counts[i];
  for (std::size_t i = 0; i < density_sum.size(); ++i) density_sum[i] += o.density_sum[i];
}

std::vector<double> EnsembleSummary::histogram_density() const {
  std::vector<double> d(hist_counts.size(), 0.0);
  if (n_completed == 0 || hist_counts.empty()) return d;
  const double w = (hist_hi - hist_lo) / static_cast<double>(hist_counts.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = static_cast<double>(hist_counts[i]) / (static_cast<double>(n_completed) * w);
  return d;
}

std::vector<double> EnsembleSummary::mean_density() const {
  std::vector<double> d(density_sum.size(), 0.0);
  if (n_completed == 0) return d;
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = density_sum[i] / static_cast<double>(n_completed);
  return d;
}

// ---------------------------------------------------------------- running

namespace {

bool is_record_step(std::size_t step, std::size_t steps, std::size_t every) {
  return step == steps || (every > 0 && step % every == 0);
}

std::vector<double> record_times(const ExperimentConfig& cfg) {
  std::vector<double> t{0.0};
  const std::size_t steps = cfg.steps();
  for (std::size_t s = 1; s <= steps; ++s)
    if (is_record_step(s, steps, cfg.record_every)) t.push_back(static_cast<double>(s) * cfg.dt);
  return t;
}

struct TrajectoryRun {
  std::vector<MomentRecord> records;
  std::vector<double> drift_integral;  // cumulative, aligned with records
  GridState final_state;
};

TrajectoryRun run_trajectory(GridSolver& solver, const ExperimentConfig& cfg,
                             const GridState& psi0, std::uint64_t index, bool track_drift) {
  NoiseStream noise(cfg.seed, index);
  TrajectoryRun run;
  const std::size_t steps = cfg.steps();
  const double t_final = static_cast<double>(steps) * cfg.dt;
  if (cfg.mode == DynamicsMode::Linear) {
    run.records = evolve_linear_trajectory(solver, psi0, t_final, cfg.dt, noise, cfg.record_every,
                                           &run.final_state);
    return run;
  }
  if (!track_drift) {
    run.records = evolve_trajectory(solver, psi0, t_final, cfg.dt, noise, cfg.record_every, {},
                                    &run.final_state);
    return run;
  }
  const auto stat = StationaryTriple::from(*solver.stationary());
  const auto& p = solver.params();
  double prev = drift_prediction(solver.observables(psi0), stat, p);
  double integral = 0.0;
  run.drift_integral.push_back(0.0);
  auto observer = [&](const GridState&, const MomentRecord& m, std::size_t step) {
    const double cur = drift_prediction(m, stat, p);
    integral += 0.5 * (prev + cur) * cfg.dt;
    prev = cur;
    if (is_record_step(step, steps, cfg.record_every)) run.drift_integral.push_back(integral);
  };
  run.records = evolve_trajectory(solver, psi0, t_final, cfg.dt, noise, cfg.record_every,
                                  observer, &run.final_state);
  return run;
}

EnsembleSummary empty_summary(const ExperimentConfig& cfg, const GridSolver& solver) {
  EnsembleSummary s;
  s.mode = cfg.mode;
  s.params = cfg.model_params();
  s.times = record_times(cfg);
  s.stats.assign(s.times.size(), {});
  s.hist_lo = cfg.grid.x_min;
  s.hist_hi = cfg.grid.x_max;
  s.hist_counts.assign(cfg.histogram_bins, 0);
  s.x = solver.positions();
  s.density_sum.assign(s.x.size(), 0.0);
  return s;
}

void add_trajectory(EnsembleSummary& s, std::uint64_t index, const TrajectoryRun& run) {
  require(run.records.size() == s.times.size(), ErrorCode::Contract,
          "trajectory produced an unexpected number of records");
  for (std::size_t j = 0; j < run.records.size(); ++j) {
    const auto& m = run.records[j];
    auto& st = s.stats[j];
    st[kQMean].add(m.q_mean);
    st[kPMean].add(m.p_mean);
    st[kSqQ].add(m.sq_q);
    st[kSqP].add(m.sq_p);
    st[kSqQP].add(m.sq_qp);
    st[kSigmaO].add(m.sigma_O_sq);
    st[kEnergy].add(m.energy);
    st[kNorm].add(m.norm_sq);
    st[kQ2].add(m.sq_q + m.q_mean * m.q_mean);
    st[kP2].add(m.sq_p + m.p_mean * m.p_mean);
    const double so_step = j == 0 ? 0.0 : m.sigma_O_sq - run.records[j - 1].sigma_O_sq;
    const double dr_step = (j == 0 || run.drift_integral.empty())
                               ? 0.0
                               : run.drift_integral[j] - run.drift_integral[j - 1];
    st[kSigmaOStep].add(so_step);
    st[kDriftStep].add(dr_step);
    st[kDriftResidual].add(run.drift_integral.empty() ? 0.0 : so_step - dr_step);
  }
  const auto& fin = run.records.back();
  s.finals.emplace_back(index, fin);
  const double w = (s.hist_hi - s.hist_lo) / static_cast<double>(s.hist_counts.size());
  const double pos = (fin.q_mean - s.hist_lo) / w;
  if (pos >= 0 && pos < static_cast<double>(s.hist_counts.size()))
    ++s.hist_counts[static_cast<std::size_t>(pos)];
  for (std::size_t i = 0; i < s.density_sum.size(); ++i)
    s.density_sum[i] += std::norm(run.final_state.psi[i]);
  ++s.n_completed;
}

}  // namespace

std::vector<MomentRecord> run_single_trajectory(const ExperimentConfig& cfg, std::uint64_t index,
                                                GridState* final_state) {
  cfg.validate();
  GridSolver solver(cfg.grid, cfg.model_params());
  const auto psi0 = solver.make_state(cfg.initial_packets());
  auto run = run_trajectory(solver, cfg, psi0, index, false);
  if (final_state) *final_state = std::move(run.final_state);
  return run.records;
}

EnsembleSummary run_ensemble(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto params = cfg.model_params();
  const auto packets = cfg.initial_packets();
  const bool track = cfg.track_drift && cfg.mode == DynamicsMode::Nonlinear && params.lambda > 0;
  const std::size_t n = cfg.n_trajectories;
  const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::size_t workers = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, n_blocks);

  std::vector<EnsembleSummary> blocks(n_blocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      GridSolver solver(cfg.grid, params);
      const GridState psi0 = solver.make_state(packets);
      for (std::size_t b = next++; b < n_blocks; b = next++) {
        EnsembleSummary part = empty_summary(cfg, solver);
        const std::size_t lo = b * kBlockSize, hi = std::min(n, lo + kBlockSize);
        for (std::size_t i = lo; i < hi; ++i) {
          ++part.n_requested;
          try {
            add_trajectory(part, i, run_trajectory(solver, cfg, psi0, i, track));
          } catch (const Error& e) {
            ++part.n_aborted;
            if (part.first_abort.empty())
              part.first_abort = "trajectory " + std::to_string(i) + ": " + e.what();
          }
        }
        blocks[b] = std::move(part);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n_blocks;
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleSummary total;
  for (const auto& b : blocks) total.merge(b);

  if (static_cast<double>(total.n_aborted) > 0.01 * static_cast<double>(n))
    fail(ErrorCode::TrajectoryAbort, std::to_string(total.n_aborted) + " of " + std::to_string(n) +
                                         " trajectories aborted; first: " + total.first_abort);
  require(total.n_completed > 0, ErrorCode::TrajectoryAbort, "no trajectory completed");

  if (cfg.compare_master && cfg.mode == DynamicsMode::Nonlinear) {
    const auto prof = position_density(packets, total.times.back(), params, total.x);
    const auto mean = total.mean_density();
    double l1 = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) l1 += std::abs(mean[i] - prof.exact[i]);
    total.master_l1 = l1 * cfg.grid.dx();
  }
  return total;
}

MasterComparison compare_to_master(const EnsembleSummary& s, const ExperimentConfig& cfg) {
  require(s.mode == DynamicsMode::Nonlinear, ErrorCode::Contract,
          "master-equation comparison needs a nonlinear (normalized) ensemble");
  const auto p = cfg.model_params();
  require(p == s.params && record_times(cfg) == s.times && s.n_completed > 0,
          ErrorCode::Contract, "summary does not belong to this configuration");

  RawMoments m0;
  m0.q = s.mean(0, kQMean);
  m0.p = s.mean(0, kPMean);
  m0.qq = s.mean(0, kQ2);
  m0.pp = s.mean(0, kP2);
  m0.qp = s.mean(0, kSqQP) + m0.q * m0.p;

  auto zscore = [](double mean, double se, double pred) {
    const double diff = mean - pred;
    if (se > 0) return diff / se;
    return std::abs(diff) <= 1e-6 * std::max(1.0, std::abs(pred))
               ? 0.0
               : std::copysign(std::numeric_limits<double>::infinity(), diff);
  };

  MasterComparison r;
  r.times = s.times;
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    const auto mt = moments_flow(m0, s.times[j], p);
    r.energy_pred.push_back(mt.pp / (2.0 * p.mass));
    r.q2_pred.push_back(mt.qq);
    r.p2_pred.push_back(mt.pp);
    r.energy_z.push_back(zscore(s.mean(j, kEnergy), s.se(j, kEnergy), r.energy_pred.back()));
    r.q2_z.push_back(zscore(s.mean(j, kQ2), s.se(j, kQ2), r.q2_pred.back()));
    r.p2_z.push_back(zscore(s.mean(j, kP2), s.se(j, kP2), r.p2_pred.back()));
    r.max_abs_z = std::max({r.max_abs_z, std::abs(r.energy_z.back()), std::abs(r.q2_z.back()),
                            std::abs(r.p2_z.back())});
  }
  const auto prof = position_density(cfg.initial_packets(), s.times.back(), p, s.x);
  const auto mean = s.mean_density();
  double l1 = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) l1 += std::abs(mean[i] - prof.exact[i]);
  r.density_l1 = l1 * cfg.grid.dx();
  return r;
}

// ---------------------------------------------------------------- output

void write_summary_csv(std::ostream& os, const EnsembleSummary& s) {
  os << kSummaryVersion << "\n";
  os << "# n_requested=" << s.n_requested << " n_completed=" << s.n_completed
     << " n_aborted=" << s.n_aborted << " master_l1=" << format_double(s.master_l1) << "\n";
  os << "t";
  for (const char* name : channel_names()) os << "," << name << "_mean," << name << "_se";
  os << "\n";
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    os << format_double(s.times[j]);
    for (std::size_t c = 0; c < kChannelCount; ++c)
      os << "," << format_double(s.stats[j][c].mean) << ","
         << format_double(s.stats[j][c].standard_error());
    os << "\n";
  }
}

void write_records_csv(std::ostream& os, const std::vector<MomentRecord>& records) {
  os << "# collapse-trajectory v1\n";
  os << "t,q_mean,p_mean,sq_q,sq_p,sq_qp,sigma_O_sq,energy,norm_sq\n";
  for (const auto& m : records)
    os << format_double(m.t) << "," << format_double(m.q_mean) << "," << format_double(m.p_mean)
       << "," << format_double(m.sq_q) << "," << format_double(m.sq_p) << ","
       << format_double(m.sq_qp) << "," << format_double(m.sigma_O_sq) << ","
       << format_double(m.energy) << "," << format_double(m.norm_sq) << "\n";
}

void write_finals_csv(std::ostream& os, const EnsembleSummary& s) {
  os << "# collapse-ensemble-finals v1\n";
  os << "trajectory,t,q_mean,p_mean,sq_q,sq_p,sq_qp,sigma_O_sq,energy,norm_sq\n";
  for (const auto& [i, m] : s.finals)
    os << i << "," << format_double(m.t) << "," << format_double(m.q_mean) << ","
       << format_double(m.p_mean) << "," << format_double(m.sq_q) << "," << format_double(m.sq_p)
       << "," << format_double(m.sq_qp) << "," << format_double(m.sigma_O_sq) << ","
       << format_double(m.energy) << "," << format_double(m.norm_sq) << "\n";
}

void write_histogram_csv(std::ostream& os, const EnsembleSummary& s) {
  os << "# collapse-ensemble-histogram v1\n";
  os << "bin_lo,bin_hi,count,density\n";
  const auto d = s.histogram_density();
  const double w = (s.hist_hi - s.hist_lo) / static_cast<double>(s.hist_counts.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    os << format_double(s.hist_lo + w * static_cast<double>(i)) << ","
       << format_double(s.hist_lo + w * static_cast<double>(i + 1)) << "," << s.hist_counts[i]
       << "," << format_double(d[i]) << "\n";
}

void write_density_csv(std::ostream& os, const EnsembleSummary& s) {
  os << "# collapse-ensemble-density v1\n";
  os << "x,mean_density\n";
  const auto d = s.mean_density();
  for (std::size_t i = 0; i < d.size(); ++i)
    os << format_double(s.x[i]) << "," << format_double(d[i]) << "\n";
}

std::string summary_json(const EnsembleSummary& s) {
  nlohmann::ordered_json j;
  j["version"] = "collapse-ensemble-summary v1";
  j["n_requested"] = s.n_requested;
  j["n_completed"] = s.n_completed;
  j["n_aborted"] = s.n_aborted;
  j["first_abort"] = s.first_abort;
  j["master_l1"] = s.master_l1;
  j["t"] = s.times;
  nlohmann::ordered_json ch;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    std::vector<double> mean, se;
    for (const auto& st : s.stats) {
      mean.push_back(st[c].mean);
      se.push_back(st[c].standard_error());
    }
    ch[channel_names()[c]] = {{"mean", mean}, {"se", se}};
  }
  j["channels"] = ch;
  j["histogram"] = {{"lo", s.hist_lo}, {"hi", s.hist_hi}, {"counts", s.hist_counts},
                    {"density", s.histogram_density()}};
  j["density"] = {{"x", s.x}, {"mean", s.mean_density()}};
  nlohmann::ordered_json fin = nlohmann::ordered_json::array();
  for (const auto& [i, m] : s.finals)
    fin.push_back({{"trajectory", i}, {"q_mean", m.q_mean}, {"p_mean", m.p_mean},
                   {"sq_q", m.sq_q}, {"sq_p", m.sq_p}, {"sq_qp", m.sq_qp},
                   {"sigma_O_sq", m.sigma_O_sq}, {"energy", m.energy}, {"norm_sq", m.norm_sq}});
  j["finals"] = fin;
  return j.dump(1);
}

void write_outputs(const EnsembleSummary& s, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory '" + cfg.out_dir + "'");
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(cfg.out_dir) / name);
    if (!f) fail(ErrorCode::Io, "cannot write '" + name + "' in '" + cfg.out_dir + "'");
    return f;
  };
  {
    auto f = open("config.txt");
    f << cfg.to_text();
  }
  if (cfg.format == OutputFormat::Json) {
    auto f = open("summary.json");
    f << summary_json(s) << "\n";
    return;
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(f, s);
  }
  {
    auto f = open("finals.csv");
    write_finals_csv(f, s);
  }
  {
    auto f = open("histogram.csv");
    write_histogram_csv(f, s);
  }
  {
    auto f = open("density.csv");
    write_density_csv(f, s);
  }
}

}  // namespace collapse
