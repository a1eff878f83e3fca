#include "collapse/collapse.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "collapse/ensemble.hpp"
#include "collapse/errors.hpp"
#include "collapse/gaussian.hpp"
#include "collapse/master.hpp"
#include "collapse/rng.hpp"
#include "collapse/verify.hpp"

using namespace collapse;

struct clp_table {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct clp_config {
  ExperimentConfig cfg;
  std::string text;
};

struct clp_summary {
  EnsembleSummary summary;
  std::string text;
};

struct clp_report {
  std::vector<CheckResult> checks;
};

namespace {

thread_local std::string g_last_error;

clp_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::Domain: return CLP_ERR_DOMAIN;
    case ErrorCode::Instability: return CLP_ERR_INSTABILITY;
    case ErrorCode::Resolution: return CLP_ERR_RESOLUTION;
    case ErrorCode::Contract: return CLP_ERR_CONTRACT;
    case ErrorCode::TrajectoryAbort: return CLP_ERR_TRAJECTORY_ABORT;
    case ErrorCode::Io: return CLP_ERR_IO;
    case ErrorCode::Config: return CLP_ERR_CONFIG;
    case ErrorCode::Verification: return CLP_ERR_VERIFICATION;
  }
  return CLP_ERR_INTERNAL;
}

template <class F>
clp_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return CLP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return CLP_ERR_INTERNAL;
}

#define CLP_REQUIRE_ARG(x)                                  \
  do {                                                      \
    if (!(x)) {                                             \
      g_last_error = "null argument: " #x;                  \
      return CLP_ERR_NULL_ARGUMENT;                         \
    }                                                       \
  } while (0)

ModelParams from_c(const clp_params& p) { return {p.mass, p.lambda, p.alpha, p.hbar}; }
clp_params to_c(const ModelParams& p) { return {p.mass, p.lambda, p.alpha, p.hbar}; }

FundamentalConstants from_c(const clp_fundamental& b) {
  FundamentalConstants f;
  f.lambda0 = b.lambda0;
  f.alpha0 = b.alpha0;
  f.m0 = b.m0;
  f.hbar = b.hbar;
  f.kB = b.kB;
  return f;
}

CharCoefficients coeffs_from(const double c[6]) { return {c[0], c[1], c[2], c[3], c[4], c[5]}; }

std::string table_csv(const clp_table& t) {
  std::ostringstream os;
  os << "# collapse-" << t.kind << " v1\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\n";
  }
  return os.str();
}

std::string table_json(const clp_table& t) {
  nlohmann::ordered_json j;
  j["version"] = "collapse-" + t.kind + " v1";
  j["columns"] = t.columns;
  j["rows"] = t.rows;
  return j.dump(1) + "\n";
}

}  // namespace

extern "C" {

const char* clp_last_error(void) { return g_last_error.c_str(); }
const char* clp_version(void) { return "1.0.0"; }

clp_fundamental clp_default_fundamental(void) {
  const FundamentalConstants f;
  return {f.lambda0, f.alpha0, f.m0, f.hbar, f.kB};
}

clp_status clp_scale_parameters(const clp_fundamental* base, double mass, clp_params* out) {
  CLP_REQUIRE_ARG(base);
  CLP_REQUIRE_ARG(out);
  return guarded([&] { *out = to_c(scale_parameters(from_c(*base), mass)); });
}

clp_status clp_to_natural(const clp_params* si, double mass_kg, double length_m, clp_params* out) {
  CLP_REQUIRE_ARG(si);
  CLP_REQUIRE_ARG(out);
  return guarded(
      [&] { *out = to_c(UnitSystem::natural(mass_kg, length_m, si->hbar).to_units(from_c(*si))); });
}

clp_status clp_derive_constants(const clp_params* p, double kB, clp_derived* out) {
  CLP_REQUIRE_ARG(p);
  CLP_REQUIRE_ARG(out);
  return guarded([&] {
    const auto d = derive_constants(from_c(*p), kB);
    *out = {d.omega,       d.theta,       d.omega1,          d.omega2, d.kappa,
            d.a_inf.real(), d.a_inf.imag(), d.sigma_q_bar,    d.sigma_p_bar,
            d.sigma_qp_bar_sq, d.E_inf,   d.temperature};
  });
}

clp_status clp_a_closed_form(const clp_params* p, double a0_re, double a0_im, double t,
                             double* a_re, double* a_im) {
  CLP_REQUIRE_ARG(p);
  CLP_REQUIRE_ARG(a_re);
  CLP_REQUIRE_ARG(a_im);
  return guarded([&] {
    const auto a = a_closed_form(cdouble(a0_re, a0_im), t, from_c(*p));
    *a_re = a.real();
    *a_im = a.imag();
  });
}

size_t clp_table_rows(const clp_table* t) { return t ? t->rows.size() : 0; }
size_t clp_table_cols(const clp_table* t) { return t ? t->columns.size() : 0; }
const char* clp_table_column(const clp_table* t, size_t col) {
  return (t && col < t->columns.size()) ? t->columns[col].c_str() : nullptr;
}
double clp_table_value(const clp_table* t, size_t row, size_t col) {
  if (!t || row >= t->rows.size() || col >= t->columns.size()) return std::numeric_limits<double>::quiet_NaN();
  return t->rows[row][col];
}

clp_status clp_table_write(const clp_table* t, const char* path, const char* format) {
  CLP_REQUIRE_ARG(t);
  return guarded([&] {
    const std::string fmt = format ? format : "csv";
    if (fmt != "csv" && fmt != "json") fail(ErrorCode::Config, "format must be 'csv' or 'json'");
    const std::string body = fmt == "json" ? table_json(*t) : table_csv(*t);
    if (!path) {
      std::cout << body;
      std::cout.flush();
      return;
    }
    std::ofstream f(path);
    if (!f) fail(ErrorCode::Io, std::string("cannot write '") + path + "'");
    f << body;
  });
}

void clp_table_free(clp_table* t) { delete t; }

clp_status clp_gaussian_table(const clp_params* p, double a0_re, double a0_im, double xbar0,
                              double kbar0, double t_final, double dt, size_t record_every,
                              uint64_t seed, clp_table** out) {
  CLP_REQUIRE_ARG(p);
  CLP_REQUIRE_ARG(out);
  return guarded([&] {
    const auto mp = from_c(*p);
    mp.validate();
    require(dt > 0 && t_final >= dt, ErrorCode::Domain, "need dt > 0 and t_final >= dt");
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    const std::size_t every = record_every ? record_every : 1;
    std::vector<double> times{0.0};
    for (std::size_t s = 1; s <= steps; ++s)
      if (s % every == 0 || s == steps) times.push_back(static_cast<double>(s) * dt);
    const cdouble a0(a0_re, a0_im);
    const auto cov = integrate_covariance(a0, times, mp);

    auto table = std::make_unique<clp_table>();
    table->kind = "gaussian";
    table->columns = {"t", "aR", "aI", "sigma_q", "sigma_p", "xbar", "kbar",
                      "C_qq", "C_qp", "C_pp", "energy"};
    NoiseStream noise(seed, 0);
    GaussianState s{a0, xbar0, kbar0};
    std::size_t rec = 0;
    auto emit = [&](double t) {
      const auto sp = spreads(s.a, mp);
      const auto& c = cov[rec++];
      table->rows.push_back({t, s.a.real(), s.a.imag(), sp.sigma_q, sp.sigma_p, s.xbar, s.kbar,
                             c.qq, c.qp, c.pp, gaussian_energy(s, mp)});
    };
    emit(0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
      s = step_means(s, dt, noise.next_increment(dt), mp, MeanScheme::Heun);
      if (i % every == 0 || i == steps) emit(static_cast<double>(i) * dt);
    }
    *out = table.release();
  });
}

clp_status clp_master_table(const clp_params* p, const double c0[6], double t_final,
                            size_t n_points, clp_table** out) {
  CLP_REQUIRE_ARG(p);
  CLP_REQUIRE_ARG(c0);
  CLP_REQUIRE_ARG(out);
  return guarded([&] {
    const auto mp = from_c(*p);
    mp.validate();
    require(t_final >= 0 && n_points >= 2, ErrorCode::Domain,
            "need t_final >= 0 and at least two output points");
    const auto c = coeffs_from(c0);
    require(c.positive(), ErrorCode::Domain, "initial coefficients are not a valid state");
    auto table = std::make_unique<clp_table>();
    table->kind = "master";
    table->columns = {"t", "c1", "c2", "c3", "c4", "c5", "purity", "energy"};
    for (std::size_t i = 0; i < n_points; ++i) {
      const double t = t_final * static_cast<double>(i) / static_cast<double>(n_points - 1);
      const auto ct = coeff_flow(c, t, mp);
      table->rows.push_back({t, ct.c1, ct.c2, ct.c3, ct.c4, ct.c5, purity(ct, mp.hbar),
                             coefficient_energy(ct, mp)});
    }
    *out = table.release();
  });
}

clp_status clp_gaussian_coefficients(const clp_params* p, double a_re, double a_im, double xbar,
                                     double kbar, double c[6]) {
  CLP_REQUIRE_ARG(p);
  CLP_REQUIRE_ARG(c);
  return guarded([&] {
    const auto r = coefficients_of(GaussianState{cdouble(a_re, a_im), xbar, kbar}, from_c(*p));
    const double v[6] = {r.c1, r.c2, r.c3, r.c4, r.c5, r.c6};
    std::copy(v, v + 6, c);
  });
}

clp_status clp_density_table(const clp_params* p, const clp_packet* packets, size_t n_packets,
                             double t, const double* x, size_t n_x, double* beta, clp_table** out) {
  CLP_REQUIRE_ARG(p);
  CLP_REQUIRE_ARG(packets);
  CLP_REQUIRE_ARG(x);
  CLP_REQUIRE_ARG(out);
  return guarded([&] {
    std::vector<GaussianPacket> pk;
    for (std::size_t i = 0; i < n_packets; ++i)
      pk.push_back({cdouble(packets[i].weight_re, packets[i].weight_im),
                    cdouble(packets[i].a_re, packets[i].a_im), packets[i].xbar, packets[i].kbar});
    const auto prof = position_density(pk, t, from_c(*p), std::vector<double>(x, x + n_x));
    auto table = std::make_unique<clp_table>();
    table->kind = "density";
    table->columns = {"x", "exact", "expansion", "smoothing", "schrodinger"};
    for (std::size_t i = 0; i < n_x; ++i)
      table->rows.push_back(
          {prof.x[i], prof.exact[i], prof.expansion[i], prof.smoothing[i], prof.schrodinger[i]});
    if (beta) *beta = prof.beta_t;
    *out = table.release();
  });
}

clp_status clp_config_new(clp_config** out) {
  CLP_REQUIRE_ARG(out);
  return guarded([&] { *out = new clp_config{}; });
}

clp_status clp_config_load(const char* path, clp_config** out) {
  CLP_REQUIRE_ARG(path);
  CLP_REQUIRE_ARG(out);
  return guarded([&] { *out = new clp_config{ExperimentConfig::load(path), {}}; });
}

clp_status clp_config_set(clp_config* cfg, const char* key, const char* value) {
  CLP_REQUIRE_ARG(cfg);
  CLP_REQUIRE_ARG(key);
  CLP_REQUIRE_ARG(value);
  return guarded([&] { cfg->cfg.set(key, value); });
}

clp_status clp_config_validate(const clp_config* cfg) {
  CLP_REQUIRE_ARG(cfg);
  return guarded([&] { cfg->cfg.validate(); });
}

const char* clp_config_serialize(clp_config* cfg, const char* format) {
  if (!cfg) return nullptr;
  const std::string fmt = format ? format : "text";
  cfg->text = fmt == "json" ? cfg->cfg.to_json() : cfg->cfg.to_text();
  return cfg->text.c_str();
}

clp_status clp_config_params(const clp_config* cfg, clp_params* out) {
  CLP_REQUIRE_ARG(cfg);
  CLP_REQUIRE_ARG(out);
  return guarded([&] { *out = to_c(cfg->cfg.model_params()); });
}

void clp_config_free(clp_config* cfg) { delete cfg; }

clp_status clp_trajectory_table(const clp_config* cfg, uint64_t index, clp_table** out) {
  CLP_REQUIRE_ARG(cfg);
  CLP_REQUIRE_ARG(out);
  return guarded([&] {
    const auto records = run_single_trajectory(cfg->cfg, index);
    auto table = std::make_unique<clp_table>();
    table->kind = "trajectory";
    table->columns = {"t", "q_mean", "p_mean", "sq_q", "sq_p", "sq_qp", "sigma_O_sq", "energy",
                      "norm_sq"};
    for (const auto& m : records)
      table->rows.push_back(
          {m.t, m.q_mean, m.p_mean, m.sq_q, m.sq_p, m.sq_qp, m.sigma_O_sq, m.energy, m.norm_sq});
    *out = table.release();
  });
}

clp_status clp_ensemble_run(const clp_config* cfg, clp_summary** out) {
  CLP_REQUIRE_ARG(cfg);
  CLP_REQUIRE_ARG(out);
  return guarded([&] { *out = new clp_summary{run_ensemble(cfg->cfg), {}}; });
}

clp_status clp_summary_write(const clp_summary* s, const clp_config* cfg) {
  CLP_REQUIRE_ARG(s);
  CLP_REQUIRE_ARG(cfg);
  return guarded([&] { write_outputs(s->summary, cfg->cfg); });
}

const char* clp_summary_serialize(clp_summary* s, const char* format) {
  if (!s) return nullptr;
  const std::string fmt = format ? format : "csv";
  if (fmt == "json") {
    s->text = summary_json(s->summary);
  } else {
    std::ostringstream os;
    write_summary_csv(os, s->summary);
    write_finals_csv(os, s->summary);
    write_histogram_csv(os, s->summary);
    write_density_csv(os, s->summary);
    s->text = os.str();
  }
  return s->text.c_str();
}

size_t clp_summary_times(const clp_summary* s) { return s ? s->summary.times.size() : 0; }
size_t clp_summary_completed(const clp_summary* s) { return s ? s->summary.n_completed : 0; }
size_t clp_summary_aborted(const clp_summary* s) { return s ? s->summary.n_aborted : 0; }

clp_status clp_summary_stat(const clp_summary* s, size_t time_index, const char* channel,
                            double* mean, double* se) {
  CLP_REQUIRE_ARG(s);
  CLP_REQUIRE_ARG(channel);
  return guarded([&] {
    require(time_index < s->summary.times.size(), ErrorCode::Domain, "time index out of range");
    const auto& names = channel_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (std::string(names[c]) != channel) continue;
      if (mean) *mean = s->summary.mean(time_index, static_cast<Channel>(c));
      if (se) *se = s->summary.se(time_index, static_cast<Channel>(c));
      return;
    }
    fail(ErrorCode::Domain, std::string("unknown channel '") + channel + "'");
  });
}

clp_status clp_summary_compare_master(const clp_summary* s, const clp_config* cfg,
                                      double* max_abs_z, double* density_l1) {
  CLP_REQUIRE_ARG(s);
  CLP_REQUIRE_ARG(cfg);
  return guarded([&] {
    const auto r = compare_to_master(s->summary, cfg->cfg);
    if (max_abs_z) *max_abs_z = r.max_abs_z;
    if (density_l1) *density_l1 = r.density_l1;
  });
}

void clp_summary_free(clp_summary* s) { delete s; }

clp_status clp_verify(const clp_params* p, uint64_t seed, clp_report** out) {
  CLP_REQUIRE_ARG(p);
  CLP_REQUIRE_ARG(out);
  return guarded([&] { *out = new clp_report{run_verification(from_c(*p), seed)}; });
}

size_t clp_report_size(const clp_report* r) { return r ? r->checks.size() : 0; }
const char* clp_report_name(const clp_report* r, size_t i) {
  return (r && i < r->checks.size()) ? r->checks[i].name.c_str() : nullptr;
}
double clp_report_value(const clp_report* r, size_t i) {
  return (r && i < r->checks.size()) ? r->checks[i].value : std::numeric_limits<double>::quiet_NaN();
}
double clp_report_tolerance(const clp_report* r, size_t i) {
  return (r && i < r->checks.size()) ? r->checks[i].tolerance : std::numeric_limits<double>::quiet_NaN();
}
int clp_report_passed(const clp_report* r, size_t i) {
  return (r && i < r->checks.size() && r->checks[i].passed) ? 1 : 0;
}
void clp_report_free(clp_report* r) { delete r; }

}  // extern "C"
