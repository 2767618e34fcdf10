#pragma once

// Monte-Carlo validation harness: repeated simulate -> initialize -> fit
// runs with per-parameter aggregation against the CRLB.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eis/cnls.hpp"
#include "eis/fisher.hpp"
#include "eis/synth.hpp"

namespace eis {

struct MonteCarloConfig {
  EcmParams truth = EcmParams::demo_cell();
  double f_min_hz = 1e-2;
  double f_max_hz = 1e4;
  int points_per_decade = 10;
  double eps_rho_percent = 1.0;
  double eps_phi_deg = 1.0;
  int runs = 1000;
  std::uint64_t seed = 42;
  Coordinates coords = Coordinates::polar;  // coordinates for the report
  bool fit_both_coords = true;
  int threads = 0;  // 0: hardware concurrency
  FitConfig fit;
};

struct RunRecord {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  EcmParams theta0;
  EcmParams theta_polar;
  EcmParams theta_cart;
  bool converged_polar = false;
  bool converged_cart = false;
  double cost_polar = 0;
  ParamVector reported_var;  // diag(A^{-1}) in the report coordinates
};

struct ParamStats {
  double truth = 0;
  double mean_init = 0;
  double mean_init_abs_rel_err = 0;  // mean over runs of |θ0 - θ| / θ
  double mean_est = 0;
  double mean_est_abs_rel_err = 0;
  double bias_of_mean = 0;  // |θ - mean θ̂| / θ
  double emp_variance = 0;
  double crlb = 0;
  double variance_over_crlb = 0;
  double mean_reported_variance = 0;
};

struct MonteCarloReport {
  std::array<ParamStats, kNumParams> params;
  std::vector<RunRecord> runs;
  int failures = 0;
  double failed_fraction = 0;
  double wall_seconds = 0;
  Coordinates coords = Coordinates::polar;
  std::string to_json() const;
};

MonteCarloReport run_montecarlo(const MonteCarloConfig& config);

}  // namespace eis
