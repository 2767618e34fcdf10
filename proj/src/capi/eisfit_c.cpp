// C API implementation: thin handle wrappers over the C++ core. Every entry
// point catches exceptions, maps them to status codes and stores the message
// in a thread-local slot.

#include "eisfit/eisfit.h"

#include <cstring>
#include <string>

#include "eis/cnls.hpp"
#include "eis/design.hpp"
#include "eis/ecm.hpp"
#include "eis/errors.hpp"
#include "eis/fisher.hpp"
#include "eis/initializer.hpp"
#include "eis/montecarlo.hpp"
#include "eis/noise.hpp"
#include "eis/spectrum.hpp"
#include "eis/synth.hpp"

struct eisfit_noise {
  eis::NoiseModel model;
};
struct eisfit_grid {
  eis::FrequencyGrid grid;
};
struct eisfit_spectrum {
  eis::ImpedanceSpectrum spectrum;
};
struct eisfit_fit_result {
  eis::FitResult result;
};
struct eisfit_crlb_report {
  eis::CrlbReport report;
};
struct eisfit_design_result {
  eis::DesignResult result;
};
struct eisfit_mc_report {
  eis::MonteCarloReport report;
};

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

thread_local std::string g_last_error;

eisfit_status status_of(const std::exception& ex) {
  g_last_error = ex.what();
  if (const auto* e = dynamic_cast<const eis::Error*>(&ex)) {
    switch (e->code()) {
      case eis::ErrorCode::argument:
        return EISFIT_ERR_ARGUMENT;
      case eis::ErrorCode::domain:
        return EISFIT_ERR_DOMAIN;
      case eis::ErrorCode::undefined_region:
        return EISFIT_ERR_REGION;
      case eis::ErrorCode::numeric:
        return EISFIT_ERR_NUMERIC;
      case eis::ErrorCode::io:
        return EISFIT_ERR_IO;
      case eis::ErrorCode::no_convergence:
        return EISFIT_ERR_NO_CONVERGENCE;
    }
  }
  return EISFIT_ERR_NUMERIC;
}

template <typename Fn>
eisfit_status guarded(Fn&& fn) {
  try {
    fn();
    return EISFIT_OK;
  } catch (const std::exception& ex) {
    return status_of(ex);
  } catch (...) {
    g_last_error = "unknown error";
    return EISFIT_ERR_NUMERIC;
  }
}

eisfit_status require(bool ok, const char* what) {
  if (ok) return EISFIT_OK;
  g_last_error = what;
  return EISFIT_ERR_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

eis::Coordinates coords_of(int c) {
  if (c == EISFIT_COORDS_POLAR) return eis::Coordinates::polar;
  if (c == EISFIT_COORDS_CARTESIAN) return eis::Coordinates::cartesian;
  throw eis::ArgumentError("invalid coordinates enum value");
}

}  // namespace

extern "C" {

const char* eisfit_version(void) {
  static const std::string v = eis::tool_version();
  return v.c_str();
}

const char* eisfit_last_error(void) { return g_last_error.c_str(); }

void eisfit_string_free(char* s) { delete[] s; }

eisfit_status eisfit_default_truth(double theta[EISFIT_NPARAMS]) {
  if (auto st = require(theta != nullptr, "theta is null")) return st;
  eis::EcmParams::demo_cell().to_array(theta);
  return EISFIT_OK;
}

const char* eisfit_param_name(int index) {
  if (index < 0 || index >= EISFIT_NPARAMS) return nullptr;
  return eis::EcmParams::names()[index];
}

/* ---- noise model ---- */

eisfit_status eisfit_noise_single_region(double eps_rho_percent,
                                         double eps_phi_deg,
                                         eisfit_noise** out) {
  if (auto st = require(out != nullptr, "out is null")) return st;
  return guarded([&] {
    *out = new eisfit_noise{
        eis::NoiseModel::single_region(eps_rho_percent, eps_phi_deg)};
  });
}

eisfit_status eisfit_noise_load(const char* path, eisfit_noise** out) {
  if (auto st = require(out && path, "null argument")) return st;
  return guarded([&] { *out = new eisfit_noise{eis::NoiseModel::load(path)}; });
}

eisfit_status eisfit_noise_save(const eisfit_noise* m, const char* path) {
  if (auto st = require(m && path, "null argument")) return st;
  return guarded([&] { m->model.save(path); });
}

eisfit_status eisfit_noise_sigma_polar(const eisfit_noise* m, double f_hz,
                                       double rho, double* sigma_rho,
                                       double* sigma_phi) {
  if (auto st = require(m && sigma_rho && sigma_phi, "null argument")) return st;
  return guarded([&] {
    const auto [sr, sp] = m->model.sigma_polar(f_hz, rho);
    *sigma_rho = sr;
    *sigma_phi = sp;
  });
}

void eisfit_noise_free(eisfit_noise* m) { delete m; }

/* ---- frequency grid ---- */

eisfit_status eisfit_grid_logspace(double f_min_hz, double f_max_hz,
                                   int points_per_decade, eisfit_grid** out) {
  if (auto st = require(out != nullptr, "out is null")) return st;
  return guarded([&] {
    *out = new eisfit_grid{
        eis::FrequencyGrid::logspace(f_min_hz, f_max_hz, points_per_decade)};
  });
}

eisfit_status eisfit_grid_logspace_n(double f_min_hz, double f_max_hz,
                                     int n_points, eisfit_grid** out) {
  if (auto st = require(out != nullptr, "out is null")) return st;
  return guarded([&] {
    *out = new eisfit_grid{
        eis::FrequencyGrid::logspace_n(f_min_hz, f_max_hz, n_points)};
  });
}

eisfit_status eisfit_grid_from_freqs(const double* freq_hz, int n,
                                     double f_min_hz, double f_max_hz,
                                     eisfit_grid** out) {
  if (auto st = require(out && freq_hz && n > 0, "bad arguments")) return st;
  return guarded([&] {
    std::vector<double> f(freq_hz, freq_hz + n);
    *out = new eisfit_grid{
        eis::FrequencyGrid::from_freqs_hz(f, f_min_hz, f_max_hz)};
  });
}

int eisfit_grid_size(const eisfit_grid* g) { return g ? g->grid.size() : 0; }

eisfit_status eisfit_grid_get_freqs(const eisfit_grid* g,
                                    double* freq_hz_out) {
  if (auto st = require(g && freq_hz_out, "null argument")) return st;
  for (int i = 0; i < g->grid.size(); ++i) {
    freq_hz_out[i] = g->grid.omegas[i] / (2.0 * kPi);
  }
  return EISFIT_OK;
}

void eisfit_grid_free(eisfit_grid* g) { delete g; }

/* ---- model evaluation ---- */

eisfit_status eisfit_model_eval(const double theta[EISFIT_NPARAMS],
                                const double* freq_hz, int n, double* re_out,
                                double* im_out) {
  if (auto st = require(theta && freq_hz && re_out && im_out && n > 0,
                        "bad arguments")) {
    return st;
  }
  return guarded([&] {
    const eis::EcmParams p = eis::EcmParams::from_array(theta);
    for (int i = 0; i < n; ++i) {
      const eis::Complex z = eis::z_eq(p, 2.0 * kPi * freq_hz[i]);
      re_out[i] = z.real();
      im_out[i] = z.imag();
    }
  });
}

/* ---- spectra ---- */

eisfit_status eisfit_spectrum_simulate(const double theta[EISFIT_NPARAMS],
                                       const eisfit_grid* g,
                                       const eisfit_noise* m,
                                       unsigned long long seed,
                                       int inject_noise,
                                       eisfit_spectrum** out) {
  if (auto st = require(theta && g && m && out, "null argument")) return st;
  return guarded([&] {
    const eis::EcmParams p = eis::EcmParams::from_array(theta);
    p.validate();
    *out = new eisfit_spectrum{
        eis::measure_sweep(p, g->grid, m->model, seed, inject_noise != 0)};
  });
}

eisfit_status eisfit_spectrum_load_csv(const char* path,
                                       eisfit_spectrum** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded(
      [&] { *out = new eisfit_spectrum{eis::ImpedanceSpectrum::load_csv(path)}; });
}

eisfit_status eisfit_spectrum_save_csv(const eisfit_spectrum* s,
                                       const char* path,
                                       const char* config_hash) {
  if (auto st = require(s && path, "null argument")) return st;
  return guarded([&] {
    eis::ImpedanceSpectrum copy = s->spectrum;
    if (config_hash) copy.meta.config_hash = config_hash;
    copy.save_csv(path);
  });
}

int eisfit_spectrum_size(const eisfit_spectrum* s) {
  return s ? s->spectrum.size() : 0;
}

eisfit_status eisfit_spectrum_get(const eisfit_spectrum* s, int index,
                                  double* freq_hz, double* re, double* im,
                                  double* rho, double* phi, double* sigma_rho,
                                  double* sigma_phi) {
  if (auto st = require(s != nullptr, "spectrum is null")) return st;
  if (auto st = require(index >= 0 && index < s->spectrum.size(),
                        "point index out of range")) {
    return st;
  }
  const auto& p = s->spectrum.points[index];
  if (freq_hz) *freq_hz = p.freq_hz;
  if (re) *re = p.re;
  if (im) *im = p.im;
  if (rho) *rho = p.rho;
  if (phi) *phi = p.phi;
  if (sigma_rho) *sigma_rho = p.sigma_rho;
  if (sigma_phi) *sigma_phi = p.sigma_phi;
  return EISFIT_OK;
}

void eisfit_spectrum_free(eisfit_spectrum* s) { delete s; }

/* ---- initialization ---- */

eisfit_status eisfit_initialize(const eisfit_spectrum* s,
                                const eisfit_noise* m,
                                double theta0_out[EISFIT_NPARAMS],
                                char** diagnostics_json) {
  if (auto st = require(s && m && theta0_out, "null argument")) return st;
  return guarded([&] {
    const eis::InitReport rep = eis::initialize_all(s->spectrum, m->model);
    rep.theta0.to_array(theta0_out);
    if (diagnostics_json) *diagnostics_json = dup_string(rep.to_json());
  });
}

/* ---- fit ---- */

void eisfit_fit_config_default(eisfit_fit_config* cfg) {
  if (!cfg) return;
  const eis::FitConfig d;
  cfg->coordinates = EISFIT_COORDS_POLAR;
  cfg->max_iterations = d.max_iters;
  cfg->gradient_tol = d.gradient_tol;
  cfg->step_tol = d.step_tol;
  cfg->cost_tol = d.cost_tol;
  cfg->damping_init = d.damping_init;
}

eisfit_status eisfit_fit(const eisfit_spectrum* s,
                         const double theta0[EISFIT_NPARAMS],
                         const eisfit_fit_config* cfg,
                         eisfit_fit_result** out) {
  if (auto st = require(s && theta0 && out, "null argument")) return st;
  return guarded([&] {
    eis::FitConfig fc;
    if (cfg) {
      fc.coordinates = coords_of(cfg->coordinates);
      fc.max_iters = cfg->max_iterations;
      fc.gradient_tol = cfg->gradient_tol;
      fc.step_tol = cfg->step_tol;
      fc.cost_tol = cfg->cost_tol;
      fc.damping_init = cfg->damping_init;
    }
    *out = new eisfit_fit_result{
        eis::fit(s->spectrum, eis::EcmParams::from_array(theta0), fc)};
  });
}

eisfit_status eisfit_fit_result_theta(const eisfit_fit_result* r,
                                      double theta[EISFIT_NPARAMS]) {
  if (auto st = require(r && theta, "null argument")) return st;
  r->result.theta_hat.to_array(theta);
  return EISFIT_OK;
}

double eisfit_fit_result_cost(const eisfit_fit_result* r) {
  return r ? r->result.cost : -1.0;
}

int eisfit_fit_result_iterations(const eisfit_fit_result* r) {
  return r ? r->result.iterations : -1;
}

int eisfit_fit_result_converged(const eisfit_fit_result* r) {
  return (r && r->result.converged) ? 1 : 0;
}

eisfit_status eisfit_fit_result_variances(const eisfit_fit_result* r,
                                          double var[EISFIT_NPARAMS]) {
  if (auto st = require(r && var, "null argument")) return st;
  for (int i = 0; i < EISFIT_NPARAMS; ++i) var[i] = r->result.param_variances(i);
  return EISFIT_OK;
}

eisfit_status eisfit_fit_result_json(const eisfit_fit_result* r,
                                     char** json_out) {
  if (auto st = require(r && json_out, "null argument")) return st;
  return guarded([&] { *json_out = dup_string(r->result.to_json()); });
}

void eisfit_fit_result_free(eisfit_fit_result* r) { delete r; }

/* ---- CRLB ---- */

eisfit_status eisfit_crlb(const double theta[EISFIT_NPARAMS],
                          const eisfit_grid* g, const eisfit_noise* m,
                          int coordinates, eisfit_crlb_report** out) {
  if (auto st = require(theta && g && m && out, "null argument")) return st;
  return guarded([&] {
    const eis::EcmParams p = eis::EcmParams::from_array(theta);
    p.validate();
    *out = new eisfit_crlb_report{
        eis::fim(p, g->grid, m->model, coords_of(coordinates))};
  });
}

eisfit_status eisfit_crlb_values(const eisfit_crlb_report* r,
                                 double crlb[EISFIT_NPARAMS]) {
  if (auto st = require(r && crlb, "null argument")) return st;
  for (int i = 0; i < EISFIT_NPARAMS; ++i) crlb[i] = r->report.crlb(i);
  return EISFIT_OK;
}

eisfit_status eisfit_crlb_eigenvalues(const eisfit_crlb_report* r,
                                      double eig[EISFIT_NPARAMS]) {
  if (auto st = require(r && eig, "null argument")) return st;
  for (int i = 0; i < EISFIT_NPARAMS; ++i) eig[i] = r->report.eigenvalues(i);
  return EISFIT_OK;
}

double eisfit_crlb_ellipsoid_volume(const eisfit_crlb_report* r) {
  return r ? r->report.ellipsoid_volume : -1.0;
}

eisfit_status eisfit_crlb_fim(const eisfit_crlb_report* r,
                              double fim_row_major[EISFIT_NPARAMS *
                                                   EISFIT_NPARAMS]) {
  if (auto st = require(r && fim_row_major, "null argument")) return st;
  for (int i = 0; i < EISFIT_NPARAMS; ++i) {
    for (int j = 0; j < EISFIT_NPARAMS; ++j) {
      fim_row_major[i * EISFIT_NPARAMS + j] = r->report.fim(i, j);
    }
  }
  return EISFIT_OK;
}

eisfit_status eisfit_crlb_json(const eisfit_crlb_report* r, char** json_out) {
  if (auto st = require(r && json_out, "null argument")) return st;
  return guarded([&] { *json_out = dup_string(r->report.to_json()); });
}

void eisfit_crlb_free(eisfit_crlb_report* r) { delete r; }

eisfit_status eisfit_fim_contribution(const double theta[EISFIT_NPARAMS],
                                      double freq_hz, const eisfit_noise* m,
                                      int coordinates,
                                      double contrib_row_major[EISFIT_NPARAMS *
                                                               EISFIT_NPARAMS]) {
  if (auto st = require(theta && m && contrib_row_major, "null argument")) {
    return st;
  }
  return guarded([&] {
    const eis::EcmParams p = eis::EcmParams::from_array(theta);
    const eis::ParamMatrix c = eis::fim_contribution(
        p, 2.0 * kPi * freq_hz, m->model, coords_of(coordinates));
    for (int i = 0; i < EISFIT_NPARAMS; ++i) {
      for (int j = 0; j < EISFIT_NPARAMS; ++j) {
        contrib_row_major[i * EISFIT_NPARAMS + j] = c(i, j);
      }
    }
  });
}

/* ---- design ---- */

void eisfit_design_config_default(eisfit_design_config* cfg) {
  if (!cfg) return;
  const eis::DesignConfig d;
  cfg->f_min_hz = d.f_min_hz;
  cfg->f_max_hz = d.f_max_hz;
  cfg->n_points = d.n_points;
  cfg->mu = d.mu;
  cfg->coordinates = EISFIT_COORDS_POLAR;
  cfg->seed = d.seed;
}

eisfit_status eisfit_design_run(const double theta_true[EISFIT_NPARAMS],
                                const eisfit_noise* m,
                                const eisfit_design_config* cfg,
                                eisfit_design_result** out) {
  if (auto st = require(theta_true && m && out, "null argument")) return st;
  return guarded([&] {
    eis::DesignConfig dc;
    if (cfg) {
      dc.f_min_hz = cfg->f_min_hz;
      dc.f_max_hz = cfg->f_max_hz;
      dc.n_points = cfg->n_points;
      dc.mu = cfg->mu;
      dc.coords = coords_of(cfg->coordinates);
      dc.seed = cfg->seed;
    }
    const eis::EcmParams p = eis::EcmParams::from_array(theta_true);
    p.validate();
    *out = new eisfit_design_result{eis::run_design(p, m->model, dc)};
  });
}

int eisfit_design_iterations(const eisfit_design_result* r) {
  return r ? static_cast<int>(r->result.history.size()) : 0;
}

eisfit_status eisfit_design_history_row(const eisfit_design_result* r, int k,
                                        int* adjusted_index,
                                        double* freq_old_hz,
                                        double* freq_new_hz,
                                        double* lambda_before,
                                        double* lambda_after,
                                        double* volume_true,
                                        double* volume_est) {
  if (auto st = require(r != nullptr, "result is null")) return st;
  if (auto st = require(k >= 0 && k < static_cast<int>(r->result.history.size()),
                        "iteration index out of range")) {
    return st;
  }
  const auto& it = r->result.history[k];
  if (adjusted_index) *adjusted_index = it.adjusted_index;
  if (freq_old_hz) *freq_old_hz = it.omega_old / (2.0 * kPi);
  if (freq_new_hz) *freq_new_hz = it.omega_new / (2.0 * kPi);
  if (lambda_before) *lambda_before = it.lambda_before;
  if (lambda_after) *lambda_after = it.lambda_after;
  if (volume_true) *volume_true = it.volume_true;
  if (volume_est) *volume_est = it.volume_est;
  return EISFIT_OK;
}

eisfit_status eisfit_design_crlb_row(const eisfit_design_result* r, int k,
                                     double crlb_true[EISFIT_NPARAMS],
                                     double crlb_est[EISFIT_NPARAMS]) {
  if (auto st = require(r != nullptr, "result is null")) return st;
  if (auto st = require(k >= 0 && k < static_cast<int>(r->result.history.size()),
                        "iteration index out of range")) {
    return st;
  }
  const auto& it = r->result.history[k];
  for (int i = 0; i < EISFIT_NPARAMS; ++i) {
    if (crlb_true) crlb_true[i] = it.crlb_true(i);
    if (crlb_est) crlb_est[i] = it.crlb_est(i);
  }
  return EISFIT_OK;
}

eisfit_status eisfit_design_grid_row(const eisfit_design_result* r, int k,
                                     double* freq_hz_out) {
  if (auto st = require(r && freq_hz_out, "null argument")) return st;
  if (auto st = require(k >= 0 && k < static_cast<int>(r->result.history.size()),
                        "iteration index out of range")) {
    return st;
  }
  const auto& om = r->result.history[k].grid_omegas;
  for (size_t i = 0; i < om.size(); ++i) freq_hz_out[i] = om[i] / (2.0 * kPi);
  return EISFIT_OK;
}

eisfit_status eisfit_design_final_grid(const eisfit_design_result* r,
                                       eisfit_grid** out) {
  if (auto st = require(r && out, "null argument")) return st;
  *out = new eisfit_grid{r->result.final_grid};
  return EISFIT_OK;
}

eisfit_status eisfit_design_final_fit_json(const eisfit_design_result* r,
                                           char** json_out) {
  if (auto st = require(r && json_out, "null argument")) return st;
  return guarded([&] { *json_out = dup_string(r->result.final_fit.to_json()); });
}

void eisfit_design_free(eisfit_design_result* r) { delete r; }

/* ---- Monte-Carlo ---- */

void eisfit_mc_config_default(eisfit_mc_config* cfg) {
  if (!cfg) return;
  const eis::MonteCarloConfig d;
  cfg->f_min_hz = d.f_min_hz;
  cfg->f_max_hz = d.f_max_hz;
  cfg->points_per_decade = d.points_per_decade;
  cfg->runs = d.runs;
  cfg->seed = d.seed;
  cfg->coordinates = EISFIT_COORDS_POLAR;
  cfg->fit_both_coords = d.fit_both_coords ? 1 : 0;
  cfg->threads = d.threads;
}

eisfit_status eisfit_montecarlo(const double theta_true[EISFIT_NPARAMS],
                                const eisfit_noise* m,
                                const eisfit_mc_config* cfg,
                                eisfit_mc_report** out) {
  if (auto st = require(theta_true && m && out, "null argument")) return st;
  return guarded([&] {
    eis::MonteCarloConfig mc;
    mc.truth = eis::EcmParams::from_array(theta_true);
    mc.truth.validate();
    if (cfg) {
      mc.f_min_hz = cfg->f_min_hz;
      mc.f_max_hz = cfg->f_max_hz;
      mc.points_per_decade = cfg->points_per_decade;
      mc.runs = cfg->runs;
      mc.seed = cfg->seed;
      mc.coords = coords_of(cfg->coordinates);
      mc.fit_both_coords = cfg->fit_both_coords != 0;
      mc.threads = cfg->threads;
    }
    const auto& regions = m->model.regions();
    mc.eps_rho_percent = regions.front().eps_rho * 100.0;
    mc.eps_phi_deg = m->model.eps_phi() * 180.0 / kPi;
    *out = new eisfit_mc_report{eis::run_montecarlo(mc)};
  });
}

int eisfit_mc_runs(const eisfit_mc_report* r) {
  return r ? static_cast<int>(r->report.runs.size()) : 0;
}

int eisfit_mc_failures(const eisfit_mc_report* r) {
  return r ? r->report.failures : -1;
}

eisfit_status eisfit_mc_param_stats(const eisfit_mc_report* r, int param,
                                    double* truth, double* mean_init,
                                    double* mean_init_err_pct,
                                    double* mean_est,
                                    double* mean_est_err_pct,
                                    double* emp_variance, double* crlb,
                                    double* variance_over_crlb) {
  if (auto st = require(r != nullptr, "report is null")) return st;
  if (auto st = require(param >= 0 && param < EISFIT_NPARAMS,
                        "parameter index out of range")) {
    return st;
  }
  const auto& s = r->report.params[param];
  if (truth) *truth = s.truth;
  if (mean_init) *mean_init = s.mean_init;
  if (mean_init_err_pct) *mean_init_err_pct = 100.0 * s.mean_init_abs_rel_err;
  if (mean_est) *mean_est = s.mean_est;
  if (mean_est_err_pct) *mean_est_err_pct = 100.0 * s.mean_est_abs_rel_err;
  if (emp_variance) *emp_variance = s.emp_variance;
  if (crlb) *crlb = s.crlb;
  if (variance_over_crlb) *variance_over_crlb = s.variance_over_crlb;
  return EISFIT_OK;
}

eisfit_status eisfit_mc_run_thetas(const eisfit_mc_report* r, int run, int* ok,
                                   double theta0[EISFIT_NPARAMS],
                                   double theta_polar[EISFIT_NPARAMS],
                                   double theta_cart[EISFIT_NPARAMS]) {
  if (auto st = require(r != nullptr, "report is null")) return st;
  if (auto st = require(run >= 0 && run < static_cast<int>(r->report.runs.size()),
                        "run index out of range")) {
    return st;
  }
  const auto& rec = r->report.runs[run];
  if (ok) *ok = rec.ok ? 1 : 0;
  if (theta0) rec.theta0.to_array(theta0);
  if (theta_polar) rec.theta_polar.to_array(theta_polar);
  if (theta_cart) rec.theta_cart.to_array(theta_cart);
  return EISFIT_OK;
}

eisfit_status eisfit_mc_json(const eisfit_mc_report* r, char** json_out) {
  if (auto st = require(r && json_out, "null argument")) return st;
  return guarded([&] { *json_out = dup_string(r->report.to_json()); });
}

void eisfit_mc_free(eisfit_mc_report* r) { delete r; }

} /* extern "C" */
