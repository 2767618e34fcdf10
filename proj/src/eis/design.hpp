#pragma once

// E-optimal adjustment of the measurement frequency grid: greedy
// sensitivity-ranked hill climbing on the smallest FIM eigenvalue, with
// incremental re-measurement of the adjusted point and warm-started refits.

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "eis/cnls.hpp"
#include "eis/fisher.hpp"
#include "eis/synth.hpp"

namespace eis {

struct DesignConfig {
  double f_min_hz = 1e-2;
  double f_max_hz = 1e4;
  int n_points = 61;
  double mu = 100.0;  // perturbation divisor; delta_omega = omega / mu
  Coordinates coords = Coordinates::polar;
  std::uint64_t seed = 42;
  FitConfig fit;
};

struct DesignIteration {
  int k = 0;
  int adjusted_index = -1;  // -1 for the terminal snapshot
  double omega_old = 0;
  double omega_new = 0;
  double lambda_before = 0;  // min FIM eigenvalue at theta_hat, pre-climb
  double lambda_after = 0;   // same theta_hat, post-climb grid
  bool clamped = false;
  double fit_cost = 0;
  bool fit_converged = true;
  ParamVector crlb_true;  // CRLB at the truth for this iteration's grid
  ParamVector crlb_est;   // CRLB at theta_hat
  double volume_true = 0;
  double volume_est = 0;
  std::vector<double> grid_omegas;  // grid at the start of the iteration
  EcmParams theta_hat;
};

struct DesignResult {
  std::vector<DesignIteration> history;  // N adjustment rows + terminal row
  FrequencyGrid final_grid;
  FitResult final_fit;
  CrlbReport final_report_true;
  CrlbReport final_report_est;
};

struct ScanResult {
  int index = -1;
  int direction = 1;  // climb direction that increases lambda_min
  std::vector<double> sensitivities;  // aligned with free_indices order
  std::vector<int> free_indices;
};

// Deterministic argmax-|d| tie-break: lowest index wins. Exposed for tests.
int select_adjustment_index(const std::vector<double>& sensitivities,
                            const std::vector<int>& free_indices);

// One sensitivity scan over the free indices at fixed theta_hat. The last
// grid index is probed downward (it starts at the upper frequency bound),
// every other index upward.
ScanResult sensitivity_scan(const FrequencyGrid& grid,
                            const EcmParams& theta_hat,
                            const NoiseModel& model, Coordinates coords,
                            double mu);

// Discrete hill climb of omega_base in steps of direction*n*delta while the
// objective strictly improves; a step crossing a bound clamps the frequency
// to that bound and stops the climb. Returns the final frequency.
double hill_climb_frequency(double omega_base, double delta, int direction,
                            double omega_lo, double omega_hi,
                            const std::function<double(double)>& lambda_at,
                            double lambda_start, bool* clamped,
                            double* lambda_final);

DesignResult run_design(const EcmParams& truth, const NoiseModel& model,
                        const DesignConfig& config);

}  // namespace eis
