// Exercises the shared library strictly through the public C header.
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "eisfit/eisfit.h"

TEST_CASE("version and parameter names") {
  CHECK(std::string(eisfit_version()).size() >= 5);
  CHECK(std::string(eisfit_param_name(0)) == "R_s");
  CHECK(std::string(eisfit_param_name(9)) == "Q_W");
  CHECK(eisfit_param_name(10) == nullptr);
  CHECK(eisfit_param_name(-1) == nullptr);
}

TEST_CASE("error reporting on bad arguments") {
  CHECK(eisfit_default_truth(nullptr) == EISFIT_ERR_ARGUMENT);
  eisfit_grid* g = nullptr;
  CHECK(eisfit_grid_logspace(10.0, 1.0, 10, &g) == EISFIT_ERR_ARGUMENT);
  CHECK(std::string(eisfit_last_error()).size() > 0);
  eisfit_noise* m = nullptr;
  CHECK(eisfit_noise_single_region(-1.0, 1.0, &m) == EISFIT_ERR_ARGUMENT);
  CHECK(eisfit_noise_load("/no/such/file", &m) == EISFIT_ERR_IO);
}

TEST_CASE("simulate, save, load, initialize, fit, crlb") {
  double theta[EISFIT_NPARAMS];
  REQUIRE(eisfit_default_truth(theta) == EISFIT_OK);

  eisfit_noise* noise = nullptr;
  REQUIRE(eisfit_noise_single_region(1.0, 1.0, &noise) == EISFIT_OK);
  eisfit_grid* grid = nullptr;
  REQUIRE(eisfit_grid_logspace(1e-2, 1e4, 10, &grid) == EISFIT_OK);
  CHECK(eisfit_grid_size(grid) == 61);

  eisfit_spectrum* sp = nullptr;
  REQUIRE(eisfit_spectrum_simulate(theta, grid, noise, 42, 1, &sp) ==
          EISFIT_OK);
  CHECK(eisfit_spectrum_size(sp) == 61);

  const char* path = "capi_spectrum_test.csv";
  REQUIRE(eisfit_spectrum_save_csv(sp, path, "cafe") == EISFIT_OK);
  eisfit_spectrum* sp2 = nullptr;
  REQUIRE(eisfit_spectrum_load_csv(path, &sp2) == EISFIT_OK);
  REQUIRE(eisfit_spectrum_size(sp2) == 61);
  for (int i = 0; i < 61; ++i) {
    double f1, r1, x1, f2, r2, x2;
    REQUIRE(eisfit_spectrum_get(sp, i, &f1, &r1, &x1, nullptr, nullptr,
                                nullptr, nullptr) == EISFIT_OK);
    REQUIRE(eisfit_spectrum_get(sp2, i, &f2, &r2, &x2, nullptr, nullptr,
                                nullptr, nullptr) == EISFIT_OK);
    CHECK(f1 == f2);
    CHECK(r1 == r2);
    CHECK(x1 == x2);
  }
  CHECK(eisfit_spectrum_get(sp, 61, nullptr, nullptr, nullptr, nullptr,
                            nullptr, nullptr, nullptr) == EISFIT_ERR_ARGUMENT);
  std::remove(path);
  std::remove((std::string(path) + ".meta.json").c_str());

  double theta0[EISFIT_NPARAMS];
  char* diag = nullptr;
  REQUIRE(eisfit_initialize(sp, noise, theta0, &diag) == EISFIT_OK);
  CHECK(std::string(diag).find("omega_c1") != std::string::npos);
  eisfit_string_free(diag);

  eisfit_fit_config cfg;
  eisfit_fit_config_default(&cfg);
  CHECK(cfg.max_iterations == 200);
  eisfit_fit_result* fit = nullptr;
  REQUIRE(eisfit_fit(sp, theta0, &cfg, &fit) == EISFIT_OK);
  CHECK(eisfit_fit_result_converged(fit) == 1);
  CHECK(eisfit_fit_result_cost(fit) > 0);
  double hat[EISFIT_NPARAMS];
  REQUIRE(eisfit_fit_result_theta(fit, hat) == EISFIT_OK);
  for (int i = 0; i < EISFIT_NPARAMS; ++i) {
    CHECK(std::abs(hat[i] - theta[i]) / std::abs(theta[i]) < 0.1);
  }
  char* fit_json = nullptr;
  REQUIRE(eisfit_fit_result_json(fit, &fit_json) == EISFIT_OK);
  CHECK(std::string(fit_json).find("theta_hat") != std::string::npos);
  eisfit_string_free(fit_json);
  eisfit_fit_result_free(fit);

  eisfit_crlb_report* crlb = nullptr;
  REQUIRE(eisfit_crlb(theta, grid, noise, EISFIT_COORDS_POLAR, &crlb) ==
          EISFIT_OK);
  double values[EISFIT_NPARAMS];
  REQUIRE(eisfit_crlb_values(crlb, values) == EISFIT_OK);
  CHECK(std::abs(values[0] - 1.159e-7) / 1.159e-7 < 0.05);
  double eig[EISFIT_NPARAMS];
  REQUIRE(eisfit_crlb_eigenvalues(crlb, eig) == EISFIT_OK);
  CHECK(eig[0] > 0);
  CHECK(eig[9] > eig[0]);
  CHECK(eisfit_crlb_ellipsoid_volume(crlb) > 0);
  double fim[EISFIT_NPARAMS * EISFIT_NPARAMS];
  REQUIRE(eisfit_crlb_fim(crlb, fim) == EISFIT_OK);
  CHECK(fim[0] > 0);
  eisfit_crlb_free(crlb);

  double contrib[EISFIT_NPARAMS * EISFIT_NPARAMS];
  REQUIRE(eisfit_fim_contribution(theta, 1.0, noise, EISFIT_COORDS_POLAR,
                                  contrib) == EISFIT_OK);
  CHECK(contrib[0] > 0);

  // Model evaluation round.
  double freqs[3] = {0.1, 10.0, 1000.0};
  double re[3], im[3];
  REQUIRE(eisfit_model_eval(theta, freqs, 3, re, im) == EISFIT_OK);
  CHECK(re[0] > re[2]);

  eisfit_spectrum_free(sp);
  eisfit_spectrum_free(sp2);
  eisfit_grid_free(grid);
  eisfit_noise_free(noise);
}

TEST_CASE("design and montecarlo through the c api") {
  double theta[EISFIT_NPARAMS];
  REQUIRE(eisfit_default_truth(theta) == EISFIT_OK);
  eisfit_noise* noise = nullptr;
  REQUIRE(eisfit_noise_single_region(1.0, 1.0, &noise) == EISFIT_OK);

  eisfit_design_config dcfg;
  eisfit_design_config_default(&dcfg);
  CHECK(dcfg.n_points == 61);
  dcfg.n_points = 25;
  eisfit_design_result* des = nullptr;
  REQUIRE(eisfit_design_run(theta, noise, &dcfg, &des) == EISFIT_OK);
  const int rows = eisfit_design_iterations(des);
  CHECK(rows == 26);
  int idx;
  double fo, fn, lb, la, vt, ve;
  REQUIRE(eisfit_design_history_row(des, 0, &idx, &fo, &fn, &lb, &la, &vt,
                                    &ve) == EISFIT_OK);
  CHECK(idx >= 0);
  CHECK(la >= lb * (1.0 - 1e-9));
  double ct[EISFIT_NPARAMS], ce[EISFIT_NPARAMS];
  REQUIRE(eisfit_design_crlb_row(des, rows - 1, ct, ce) == EISFIT_OK);
  CHECK(ct[0] > 0);
  std::vector<double> gridrow(dcfg.n_points);
  REQUIRE(eisfit_design_grid_row(des, 0, gridrow.data()) == EISFIT_OK);
  CHECK(gridrow[0] == doctest::Approx(1e-2));
  eisfit_grid* final_grid = nullptr;
  REQUIRE(eisfit_design_final_grid(des, &final_grid) == EISFIT_OK);
  CHECK(eisfit_grid_size(final_grid) == dcfg.n_points);
  char* js = nullptr;
  REQUIRE(eisfit_design_final_fit_json(des, &js) == EISFIT_OK);
  eisfit_string_free(js);
  eisfit_grid_free(final_grid);
  eisfit_design_free(des);

  eisfit_mc_config mcfg;
  eisfit_mc_config_default(&mcfg);
  mcfg.runs = 12;
  mcfg.threads = 2;
  eisfit_mc_report* mc = nullptr;
  REQUIRE(eisfit_montecarlo(theta, noise, &mcfg, &mc) == EISFIT_OK);
  CHECK(eisfit_mc_runs(mc) == 12);
  CHECK(eisfit_mc_failures(mc) == 0);
  double truth_v, mean_init, init_err, mean_est, est_err, var, crlb, ratio;
  REQUIRE(eisfit_mc_param_stats(mc, 0, &truth_v, &mean_init, &init_err,
                                &mean_est, &est_err, &var, &crlb,
                                &ratio) == EISFIT_OK);
  CHECK(truth_v == doctest::Approx(3.8e-2));
  CHECK(crlb > 0);
  int ok;
  double t0[EISFIT_NPARAMS], tp[EISFIT_NPARAMS], tc[EISFIT_NPARAMS];
  REQUIRE(eisfit_mc_run_thetas(mc, 3, &ok, t0, tp, tc) == EISFIT_OK);
  CHECK(ok == 1);
  char* mj = nullptr;
  REQUIRE(eisfit_mc_json(mc, &mj) == EISFIT_OK);
  CHECK(std::string(mj).find("variance_over_crlb") != std::string::npos);
  eisfit_string_free(mj);
  eisfit_mc_free(mc);
  eisfit_noise_free(noise);
}
