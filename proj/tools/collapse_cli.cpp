// Command-line front end. Talks to the library only through collapse.h.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "collapse/collapse.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunError = 1;
constexpr int kExitVerification = 2;

struct RunError {
  std::string message;
};

void check(clp_status s) {
  if (s != CLP_OK) throw RunError{clp_last_error()};
}

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string units;
  std::string format = "csv";
  std::vector<std::string> sets;
  // constants
  double mass_kg = 0.0;
  double length_m = 1e-7;
  // trajectory
  std::uint64_t index = 0;
  // master / density
  std::size_t points = 101;
  bool with_density = false;
  std::optional<double> time;
};

struct ConfigHandle {
  clp_config* cfg = nullptr;
  ~ConfigHandle() { clp_config_free(cfg); }
};

void load_config(const Options& o, ConfigHandle& h) {
  if (!o.config_path.empty()) check(clp_config_load(o.config_path.c_str(), &h.cfg));
  else check(clp_config_new(&h.cfg));
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw RunError{"--set expects key=value, got '" + kv + "'"};
    check(clp_config_set(h.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (o.seed) check(clp_config_set(h.cfg, "seed", std::to_string(*o.seed).c_str()));
  if (!o.out_dir.empty()) check(clp_config_set(h.cfg, "out_dir", o.out_dir.c_str()));
  if (!o.units.empty()) check(clp_config_set(h.cfg, "units", o.units.c_str()));
  check(clp_config_set(h.cfg, "format", o.format.c_str()));
  check(clp_config_validate(h.cfg));
}

// Reads a single value back from the serialized config.
std::string config_value(clp_config* cfg, const std::string& key) {
  const std::string text = clp_config_serialize(cfg, "text");
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const std::string line = text.substr(pos, end - pos);
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
    pos = end == std::string::npos ? text.size() : end + 1;
  }
  throw RunError{"missing config key " + key};
}

double config_number(clp_config* cfg, const std::string& key) {
  return std::stod(config_value(cfg, key));
}

double first_of_list(clp_config* cfg, const std::string& key) {
  const std::string v = config_value(cfg, key);
  return std::stod(v.substr(0, v.find(',')));
}

std::vector<double> list_of(clp_config* cfg, const std::string& key) {
  std::vector<double> out;
  std::string v = config_value(cfg, key);
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto end = v.find(',', pos);
    out.push_back(std::stod(v.substr(pos, end - pos)));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

// Width parameter of the configured packets (stationary width when unset).
std::pair<double, double> packet_width(clp_config* cfg, const clp_params& p) {
  const std::string w = config_value(cfg, "packet.width");
  if (w == "stationary") {
    clp_derived d{};
    check(clp_derive_constants(&p, 0.0, &d));
    return {d.a_inf_re, d.a_inf_im};
  }
  return {std::stod(w), config_number(cfg, "packet.width_imag")};
}

std::string output_path(const Options& o, const std::string& stem) {
  if (o.out_dir.empty()) return {};
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / (stem + "." + o.format)).string();
}

void emit(clp_table* t, const Options& o, const std::string& stem) {
  const std::string path = output_path(o, stem);
  const clp_status s = clp_table_write(t, path.empty() ? nullptr : path.c_str(), o.format.c_str());
  clp_table_free(t);
  check(s);
  if (!path.empty()) std::cerr << "wrote " << path << "\n";
}

int cmd_constants(const Options& o) {
  const clp_fundamental base = clp_default_fundamental();
  const double mass = o.mass_kg > 0 ? o.mass_kg : base.m0;
  clp_params si{};
  check(clp_scale_parameters(&base, mass, &si));
  clp_params p = si;
  const bool natural = o.units == "natural";
  if (natural) check(clp_to_natural(&si, mass, o.length_m, &p));
  clp_derived d{};
  check(clp_derive_constants(&p, natural ? 0.0 : base.kB, &d));
  const std::vector<std::pair<const char*, double>> rows = {
      {"mass", p.mass},           {"lambda", p.lambda},
      {"alpha", p.alpha},         {"hbar", p.hbar},
      {"omega", d.omega},         {"theta", d.theta},
      {"omega1", d.omega1},       {"omega2", d.omega2},
      {"kappa", d.kappa},         {"a_inf_re", d.a_inf_re},
      {"a_inf_im", d.a_inf_im},   {"sigma_q_bar", d.sigma_q_bar},
      {"sigma_p_bar", d.sigma_p_bar}, {"sigma_qp_bar_sq", d.sigma_qp_bar_sq},
      {"E_inf", d.E_inf},         {"temperature_K", natural ? NAN : d.temperature}};
  char buf[64];
  if (o.format == "json") {
    std::cout << "{\n  \"units\": \"" << (natural ? "natural" : "si") << "\"";
    for (const auto& [k, v] : rows) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::cout << ",\n  \"" << k << "\": " << (std::isfinite(v) ? buf : "null");
    }
    std::cout << "\n}\n";
  } else {
    std::cout << "# collapse-constants v1 units=" << (natural ? "natural" : "si") << "\n";
    std::cout << "quantity,value\n";
    for (const auto& [k, v] : rows) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::cout << k << "," << buf << "\n";
    }
  }
  return kExitOk;
}

int cmd_gaussian(const Options& o) {
  ConfigHandle h;
  load_config(o, h);
  clp_params p{};
  check(clp_config_params(h.cfg, &p));
  const auto [ar, ai] = packet_width(h.cfg, p);
  clp_table* t = nullptr;
  check(clp_gaussian_table(&p, ar, ai, first_of_list(h.cfg, "packet.centers"),
                           first_of_list(h.cfg, "packet.momenta"), config_number(h.cfg, "t_final"),
                           config_number(h.cfg, "dt"),
                           static_cast<std::size_t>(config_number(h.cfg, "record_every")),
                           static_cast<std::uint64_t>(config_number(h.cfg, "seed")), &t));
  emit(t, o, "gaussian");
  return kExitOk;
}

int cmd_trajectory(const Options& o) {
  ConfigHandle h;
  load_config(o, h);
  clp_table* t = nullptr;
  check(clp_trajectory_table(h.cfg, o.index, &t));
  emit(t, o, "trajectory");
  return kExitOk;
}

int cmd_ensemble(const Options& o) {
  ConfigHandle h;
  load_config(o, h);
  clp_summary* s = nullptr;
  check(clp_ensemble_run(h.cfg, &s));
  struct Guard {
    clp_summary* s;
    ~Guard() { clp_summary_free(s); }
  } guard{s};
  check(clp_summary_write(s, h.cfg));
  std::cout << "trajectories completed: " << clp_summary_completed(s)
            << ", aborted: " << clp_summary_aborted(s) << "\n";
  const std::size_t last = clp_summary_times(s) - 1;
  double mean = 0, se = 0;
  for (const char* ch : {"energy", "sq_q", "sigma_O_sq"}) {
    check(clp_summary_stat(s, last, ch, &mean, &se));
    std::printf("final %-11s %.10g +- %.3g\n", ch, mean, se);
  }
  if (config_value(h.cfg, "compare_master") == "true" &&
      config_value(h.cfg, "mode") == "nonlinear") {
    double z = 0, l1 = 0;
    check(clp_summary_compare_master(s, h.cfg, &z, &l1));
    std::printf("master equation: max |z| = %.3g, density L1 = %.3g\n", z, l1);
  }
  std::cout << "outputs in " << config_value(h.cfg, "out_dir") << "\n";
  return kExitOk;
}

int cmd_master(const Options& o) {
  ConfigHandle h;
  load_config(o, h);
  clp_params p{};
  check(clp_config_params(h.cfg, &p));
  const auto [ar, ai] = packet_width(h.cfg, p);
  double c[6];
  check(clp_gaussian_coefficients(&p, ar, ai, first_of_list(h.cfg, "packet.centers"),
                                  first_of_list(h.cfg, "packet.momenta"), c));
  const double t_final = o.time ? *o.time : config_number(h.cfg, "t_final");
  clp_table* t = nullptr;
  check(clp_master_table(&p, c, t_final, o.points, &t));
  emit(t, o, "master");
  if (o.with_density) {
    Options od = o;
    od.time = t_final;
    const double x_min = config_number(h.cfg, "grid.x_min"), x_max = config_number(h.cfg, "grid.x_max");
    const auto n = static_cast<std::size_t>(config_number(h.cfg, "grid.n_points"));
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x_min + (x_max - x_min) * i / static_cast<double>(n - 1);
    clp_packet pk{1.0, 0.0, ar, ai, first_of_list(h.cfg, "packet.centers"),
                  first_of_list(h.cfg, "packet.momenta")};
    clp_table* d = nullptr;
    double beta = 0;
    check(clp_density_table(&p, &pk, 1, t_final, xs.data(), xs.size(), &beta, &d));
    emit(d, o, "master_density");
  }
  return kExitOk;
}

int cmd_density(const Options& o) {
  ConfigHandle h;
  load_config(o, h);
  clp_params p{};
  check(clp_config_params(h.cfg, &p));
  const auto [ar, ai] = packet_width(h.cfg, p);
  const auto centers = list_of(h.cfg, "packet.centers");
  const auto weights = list_of(h.cfg, "packet.weights");
  const auto momenta = list_of(h.cfg, "packet.momenta");
  std::vector<clp_packet> packets;
  for (std::size_t i = 0; i < centers.size(); ++i)
    packets.push_back({weights.size() == 1 ? weights[0] : weights[i], 0.0, ar, ai, centers[i],
                       momenta.size() == 1 ? momenta[0] : momenta[i]});
  const double t = o.time ? *o.time : config_number(h.cfg, "t_final");
  const double x_min = config_number(h.cfg, "grid.x_min"), x_max = config_number(h.cfg, "grid.x_max");
  const std::size_t n = std::max<std::size_t>(o.points, 2);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = x_min + (x_max - x_min) * i / static_cast<double>(n - 1);
  clp_table* d = nullptr;
  double beta = 0;
  check(clp_density_table(&p, packets.data(), packets.size(), t, xs.data(), xs.size(), &beta, &d));
  // L1 distances of the approximate forms from the exact density.
  double l1[3] = {0, 0, 0};
  const double dx = (x_max - x_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      l1[k] += std::abs(clp_table_value(d, i, 2 + k) - clp_table_value(d, i, 1)) * dx;
  std::fprintf(stderr, "beta_t = %.6g; L1 vs exact: expansion %.3g, smoothing %.3g, schrodinger %.3g\n",
               beta, l1[0], l1[1], l1[2]);
  emit(d, o, "density");
  return kExitOk;
}

int cmd_verify(const Options& o) {
  ConfigHandle h;
  load_config(o, h);
  clp_params p{};
  check(clp_config_params(h.cfg, &p));
  clp_report* r = nullptr;
  check(clp_verify(&p, static_cast<std::uint64_t>(config_number(h.cfg, "seed")), &r));
  bool all = true;
  for (std::size_t i = 0; i < clp_report_size(r); ++i) {
    const bool ok = clp_report_passed(r, i);
    all = all && ok;
    std::printf("%s  %-62s residual %-12.4g tol %.3g\n", ok ? "PASS" : "FAIL", clp_report_name(r, i),
                clp_report_value(r, i), clp_report_tolerance(r, i));
  }
  clp_report_free(r);
  std::printf("%s\n", all ? "all checks passed" : "verification FAILED");
  return all ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification tools for a dissipative collapse model"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "experiment config (key = value text or JSON)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out_dir, "output directory");
  app.add_option("--units", o.units, "unit system")->check(CLI::IsMember({"si", "natural"}));
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", o.sets, "override a config key (key=value), repeatable");

  auto* constants = app.add_subcommand("constants", "derived constants for a body of given mass");
  constants->add_option("--mass", o.mass_kg, "mass in kg (default: nucleon)");
  constants->add_option("--length", o.length_m, "natural length unit in m");
  auto* gaussian = app.add_subcommand("gaussian", "Gaussian-state width, means and covariance");
  auto* trajectory = app.add_subcommand("trajectory", "one grid trajectory");
  trajectory->add_option("--index", o.index, "trajectory index");
  auto* ensemble = app.add_subcommand("ensemble", "trajectory ensemble with statistics");
  auto* master = app.add_subcommand("master", "statistical-operator coefficient flow");
  master->add_option("--points", o.points, "number of output times");
  master->add_option("--time", o.time, "final time (default t_final)");
  master->add_flag("--density", o.with_density, "also write the position density at the final time");
  auto* density = app.add_subcommand("density", "compare the three position-density evaluations");
  density->add_option("--time", o.time, "evaluation time (default t_final)");
  density->add_option("--points", o.points, "number of sample points");
  auto* verify = app.add_subcommand("verify", "identity and property checks");

  // Global options may appear after the subcommand name as well.
  for (auto* sub : {constants, gaussian, trajectory, ensemble, master, density, verify})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitRunError;
  }

  try {
    if (*constants) return cmd_constants(o);
    if (*gaussian) return cmd_gaussian(o);
    if (*trajectory) return cmd_trajectory(o);
    if (*ensemble) return cmd_ensemble(o);
    if (*master) return cmd_master(o);
    if (*density) return cmd_density(o);
    if (*verify) return cmd_verify(o);
  } catch (const RunError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitRunError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunError;
  }
  return kExitRunError;
}
