#include "eis/design.hpp"

#include <cmath>

#include "eis/initializer.hpp"

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace

int select_adjustment_index(const std::vector<double>& sensitivities,
                            const std::vector<int>& free_indices) {
  if (sensitivities.empty() || sensitivities.size() != free_indices.size()) {
    throw ArgumentError("sensitivity scan shape mismatch");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(sensitivities.size()); ++i) {
    if (std::abs(sensitivities[i]) > std::abs(sensitivities[best])) best = i;
  }
  return best;
}

ScanResult sensitivity_scan(const FrequencyGrid& grid,
                            const EcmParams& theta_hat,
                            const NoiseModel& model, Coordinates coords,
                            double mu) {
  ScanResult out;
  out.free_indices = grid.free_indices();
  if (out.free_indices.empty()) {
    throw ArgumentError("sensitivity scan with no free frequencies");
  }
  const double lambda0 = fim_min_eigenvalue(theta_hat, grid, model, coords);
  const int last = grid.size() - 1;

  std::vector<double> lambda_probe(out.free_indices.size());
  for (size_t j = 0; j < out.free_indices.size(); ++j) {
    const int i = out.free_indices[j];
    const double delta = grid.omegas[i] / mu;
    const int probe_dir = (i == last) ? -1 : +1;
    FrequencyGrid probe = grid;
    probe.omegas[i] = grid.omegas[i] + probe_dir * delta;
    const double lp = fim_min_eigenvalue(theta_hat, probe, model, coords);
    lambda_probe[j] = lp;
    out.sensitivities.push_back((lambda0 - lp) / delta);
  }

  const int j = select_adjustment_index(out.sensitivities, out.free_indices);
  out.index = out.free_indices[j];
  const int probe_dir = (out.index == last) ? -1 : +1;
  const double lp = lambda_probe[j];
  // Climb in the direction that increased lambda_min during the probe;
  // a perfectly insensitive probe defaults to +1.
  if (lp > lambda0) {
    out.direction = probe_dir;
  } else if (lp < lambda0) {
    out.direction = -probe_dir;
  } else {
    out.direction = +1;
  }
  return out;
}

double hill_climb_frequency(double omega_base, double delta, int direction,
                            double omega_lo, double omega_hi,
                            const std::function<double(double)>& lambda_at,
                            double lambda_start, bool* clamped,
                            double* lambda_final) {
  if (clamped) *clamped = false;
  double lambda_prev = lambda_start;
  double omega_best = omega_base;
  for (int n = 1;; ++n) {
    const double trial = omega_base + direction * n * delta;
    if (trial >= omega_hi || trial <= omega_lo) {
      omega_best = (direction > 0) ? omega_hi : omega_lo;
      if (clamped) *clamped = true;
      lambda_prev = lambda_at(omega_best);
      break;
    }
    const double lambda_n = lambda_at(trial);
    if (!(lambda_n > lambda_prev)) break;  // first non-improving step
    lambda_prev = lambda_n;
    omega_best = trial;
  }
  if (lambda_final) *lambda_final = lambda_prev;
  return omega_best;
}

DesignResult run_design(const EcmParams& truth, const NoiseModel& model,
                        const DesignConfig& config) {
  if (config.n_points <= kNumParams) {
    throw ArgumentError("design needs more frequency points than parameters");
  }
  FrequencyGrid grid =
      FrequencyGrid::logspace_n(config.f_min_hz, config.f_max_hz,
                                config.n_points);
  const double omega_lo = 2.0 * kPi * config.f_min_hz;
  const double omega_hi = 2.0 * kPi * config.f_max_hz;
  const int n = grid.size();
  // Feasibility of the perturbation divisor for the second-highest point.
  const double omega_n1 = grid.omegas[n - 2];
  const double mu_floor = omega_n1 / (omega_hi - omega_n1);
  if (config.mu < mu_floor) {
    throw ArgumentError("mu below the bound-feasibility floor " +
                        std::to_string(mu_floor));
  }
  // The highest point is probed downward by omega/mu, which must stay > 0.
  if (config.mu <= 1.0) {
    throw ArgumentError("mu must exceed 1");
  }

  VirtualInstrument instrument(truth, model, config.seed);
  ImpedanceSpectrum spectrum = instrument.sweep(grid);

  FitConfig fit_cfg = config.fit;
  fit_cfg.coordinates = config.coords;

  DesignResult out;
  EcmParams theta_init = initialize_all(spectrum, model).theta0;
  int last_adjusted = -1;

  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      // Only the previously adjusted point is re-measured.
      spectrum.points[last_adjusted] =
          instrument.measure(last_adjusted, grid.omegas[last_adjusted]);
    }
    const FitResult fr = fit(spectrum, theta_init, fit_cfg);
    theta_init = fr.theta_hat;  // warm start for the next iteration

    DesignIteration it;
    it.k = k;
    it.theta_hat = fr.theta_hat;
    it.fit_cost = fr.cost;
    it.fit_converged = fr.converged;
    it.grid_omegas = grid.omegas;

    const CrlbReport rep_est = fim(fr.theta_hat, grid, model, config.coords);
    const CrlbReport rep_true = fim(truth, grid, model, config.coords);
    it.crlb_est = rep_est.crlb;
    it.crlb_true = rep_true.crlb;
    it.volume_est = rep_est.ellipsoid_volume;
    it.volume_true = rep_true.ellipsoid_volume;

    if (k == n) {
      // Terminal snapshot: every index is fixed, no further adjustment.
      it.lambda_before = it.lambda_after = rep_est.eigenvalues(0);
      out.history.push_back(std::move(it));
      out.final_fit = fr;
      out.final_report_est = rep_est;
      out.final_report_true = rep_true;
      break;
    }

    const ScanResult scan =
        sensitivity_scan(grid, fr.theta_hat, model, config.coords, config.mu);
    const int m = scan.index;
    const double omega_old = grid.omegas[m];
    const double delta = omega_old / config.mu;
    it.lambda_before = rep_est.eigenvalues(0);

    const auto lambda_at = [&](double w) {
      FrequencyGrid probe = grid;
      probe.omegas[m] = w;
      return fim_min_eigenvalue(fr.theta_hat, probe, model, config.coords);
    };
    bool clamped = false;
    double lambda_after = 0;
    const double omega_new =
        hill_climb_frequency(omega_old, delta, scan.direction, omega_lo,
                             omega_hi, lambda_at, it.lambda_before, &clamped,
                             &lambda_after);
    grid.omegas[m] = omega_new;
    grid.adjusted.insert(m);
    last_adjusted = m;

    it.adjusted_index = m;
    it.omega_old = omega_old;
    it.omega_new = omega_new;
    it.lambda_after = lambda_after;
    it.clamped = clamped;
    out.history.push_back(std::move(it));
  }
  out.final_grid = grid;
  return out;
}

}  // namespace eis
