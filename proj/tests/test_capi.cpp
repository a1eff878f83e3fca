#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "collapse/collapse.h"

TEST_CASE("C API: constants and closed-form width") {
  const clp_fundamental base = clp_default_fundamental();
  clp_params p{};
  REQUIRE(clp_scale_parameters(&base, base.m0, &p) == CLP_OK);
  clp_derived d{};
  REQUIRE(clp_derive_constants(&p, base.kB, &d) == CLP_OK);
  CHECK(d.omega > 5e-6);
  CHECK(d.temperature > 0.0);
  double re = 0, im = 0;
  const clp_params nat{1.0, 1.0, 0.5, 1.0};
  REQUIRE(clp_a_closed_form(&nat, 1.0, 0.0, 100.0, &re, &im) == CLP_OK);
  clp_derived dn{};
  REQUIRE(clp_derive_constants(&nat, 0.0, &dn) == CLP_OK);
  CHECK(re == doctest::Approx(dn.a_inf_re));
  CHECK(im == doctest::Approx(dn.a_inf_im));
  CHECK(std::strlen(clp_version()) > 0);
}

TEST_CASE("C API: errors map to status codes") {
  clp_params bad{-1.0, 1.0, 0.5, 1.0};
  clp_derived d{};
  CHECK(clp_derive_constants(&bad, 0.0, &d) == CLP_ERR_DOMAIN);
  CHECK(std::strlen(clp_last_error()) > 0);
  CHECK(clp_derive_constants(nullptr, 0.0, &d) == CLP_ERR_NULL_ARGUMENT);
  clp_config* cfg = nullptr;
  REQUIRE(clp_config_new(&cfg) == CLP_OK);
  CHECK(clp_config_set(cfg, "bogus", "1") == CLP_ERR_CONFIG);
  CHECK(clp_config_set(cfg, "grid.n_points", "3") == CLP_OK);
  CHECK(clp_config_validate(cfg) == CLP_ERR_CONFIG);
  clp_config_free(cfg);
  clp_config* missing = nullptr;
  CHECK(clp_config_load("/nonexistent/cfg.txt", &missing) != CLP_OK);
  CHECK(missing == nullptr);
}

TEST_CASE("C API: config, trajectory and ensemble") {
  clp_config* cfg = nullptr;
  REQUIRE(clp_config_new(&cfg) == CLP_OK);
  for (auto [k, v] : {std::pair{"t_final", "0.05"}, {"n_trajectories", "8"}, {"record_every", "5"},
                      {"grid.x_min", "-16"}, {"grid.x_max", "16"}, {"workers", "1"}})
    REQUIRE(clp_config_set(cfg, k, v) == CLP_OK);
  REQUIRE(clp_config_validate(cfg) == CLP_OK);
  const std::string text = clp_config_serialize(cfg, "text");
  CHECK(text.find("t_final = 0.050000000000000003") != std::string::npos);
  clp_params p{};
  REQUIRE(clp_config_params(cfg, &p) == CLP_OK);
  CHECK(p.lambda == 1.0);

  clp_table* t = nullptr;
  REQUIRE(clp_trajectory_table(cfg, 0, &t) == CLP_OK);
  CHECK(clp_table_rows(t) == 6);
  CHECK(std::string(clp_table_column(t, 0)) == "t");
  CHECK(std::isnan(clp_table_value(t, 1000, 0)));
  clp_table_free(t);

  clp_summary* s = nullptr;
  REQUIRE(clp_ensemble_run(cfg, &s) == CLP_OK);
  CHECK(clp_summary_completed(s) == 8);
  CHECK(clp_summary_aborted(s) == 0);
  double mean = 0, se = 0;
  CHECK(clp_summary_stat(s, 0, "norm_sq", &mean, &se) == CLP_OK);
  CHECK(mean == doctest::Approx(1.0));
  CHECK(clp_summary_stat(s, 0, "nope", &mean, &se) != CLP_OK);
  const std::string json = clp_summary_serialize(s, "json");
  CHECK(json.find("\"channels\"") != std::string::npos);
  clp_summary_free(s);
  clp_config_free(cfg);
}

TEST_CASE("C API: verification report") {
  const clp_params p{1.0, 1.0, 0.5, 1.0};
  clp_report* r = nullptr;
  REQUIRE(clp_verify(&p, 3, &r) == CLP_OK);
  REQUIRE(clp_report_size(r) > 10);
  for (size_t i = 0; i < clp_report_size(r); ++i) {
    CAPTURE(clp_report_name(r, i));
    CHECK(clp_report_passed(r, i) == 1);
  }
  clp_report_free(r);
}

TEST_CASE("C API: master table and density") {
  const clp_params p{1.0, 1.0, 0.5, 1.0};
  double c[6];
  REQUIRE(clp_gaussian_coefficients(&p, 0.5, 0.0, 0.0, 0.0, c) == CLP_OK);
  clp_table* t = nullptr;
  REQUIRE(clp_master_table(&p, c, 1.0, 11, &t) == CLP_OK);
  CHECK(clp_table_rows(t) == 11);
  clp_table_free(t);
  const clp_packet pk{1.0, 0.0, 0.5, 0.0, 0.0, 0.0};
  const double xs[3] = {-1.0, 0.0, 1.0};
  double beta = 0;
  REQUIRE(clp_density_table(&p, &pk, 1, 0.5, xs, 3, &beta, &t) == CLP_OK);
  CHECK(clp_table_value(t, 1, 1) > clp_table_value(t, 0, 1));
  CHECK(beta > 0.0);
  clp_table_free(t);
}
