#include "eis/montecarlo.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "eis/initializer.hpp"

namespace eis {

MonteCarloReport run_montecarlo(const MonteCarloConfig& config) {
  if (config.runs < 1) throw ArgumentError("runs must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  const NoiseModel model =
      NoiseModel::single_region(config.eps_rho_percent, config.eps_phi_deg);
  const FrequencyGrid grid = FrequencyGrid::logspace(
      config.f_min_hz, config.f_max_hz, config.points_per_decade);
  const CrlbReport crlb_report =
      fim(config.truth, grid, model, config.coords);

  MonteCarloReport rep;
  rep.coords = config.coords;
  rep.runs.resize(config.runs);

  const auto run_one = [&](int r) {
    RunRecord rec;
    rec.reported_var.setZero();
    rec.seed = config.seed + static_cast<std::uint64_t>(r);
    try {
      const ImpedanceSpectrum sp =
          measure_sweep(config.truth, grid, model, rec.seed);
      rec.theta0 = initialize_all(sp, model).theta0;

      FitConfig fc = config.fit;
      fc.coordinates = Coordinates::polar;
      const FitResult fp = fit(sp, rec.theta0, fc);
      rec.theta_polar = fp.theta_hat;
      rec.converged_polar = fp.converged;
      rec.cost_polar = fp.cost;
      if (config.coords == Coordinates::polar) rec.reported_var = fp.param_variances;

      if (config.fit_both_coords || config.coords == Coordinates::cartesian) {
        fc.coordinates = Coordinates::cartesian;
        const FitResult fcart = fit(sp, rec.theta0, fc);
        rec.theta_cart = fcart.theta_hat;
        rec.converged_cart = fcart.converged;
        if (config.coords == Coordinates::cartesian) {
          rec.reported_var = fcart.param_variances;
        }
      } else {
        rec.theta_cart = rec.theta_polar;
        rec.converged_cart = rec.converged_polar;
      }
      rec.ok = rec.converged_polar &&
               (!config.fit_both_coords || rec.converged_cart);
      if (!rec.ok) rec.error = "fit did not converge";
    } catch (const std::exception& ex) {
      rec.ok = false;
      rec.error = ex.what();
    }
    rep.runs[r] = std::move(rec);
  };

  int threads = config.threads;
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, config.runs);
  if (threads <= 1) {
    for (int r = 0; r < config.runs; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < config.runs;
             r = next.fetch_add(1)) {
          run_one(r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  double truth_arr[kNumParams];
  config.truth.to_array(truth_arr);
  int ok_count = 0;
  for (const auto& rec : rep.runs) ok_count += rec.ok ? 1 : 0;
  rep.failures = config.runs - ok_count;
  rep.failed_fraction =
      static_cast<double>(rep.failures) / static_cast<double>(config.runs);

  for (int k = 0; k < kNumParams; ++k) {
    ParamStats& s = rep.params[k];
    s.truth = truth_arr[k];
    if (ok_count == 0) continue;
    double sum0 = 0, sum_err0 = 0, sum_hat = 0, sum_err_hat = 0, sum_rv = 0;
    for (const auto& rec : rep.runs) {
      if (!rec.ok) continue;
      double a0[kNumParams], ah[kNumParams];
      rec.theta0.to_array(a0);
      (config.coords == Coordinates::polar ? rec.theta_polar : rec.theta_cart)
          .to_array(ah);
      sum0 += a0[k];
      sum_err0 += std::abs((a0[k] - s.truth) / s.truth);
      sum_hat += ah[k];
      sum_err_hat += std::abs((ah[k] - s.truth) / s.truth);
      sum_rv += rec.reported_var(k);
    }
    const double n = static_cast<double>(ok_count);
    s.mean_init = sum0 / n;
    s.mean_init_abs_rel_err = sum_err0 / n;
    s.mean_est = sum_hat / n;
    s.mean_est_abs_rel_err = sum_err_hat / n;
    s.bias_of_mean = std::abs((s.truth - s.mean_est) / s.truth);
    s.mean_reported_variance = sum_rv / n;
    double ss = 0;
    for (const auto& rec : rep.runs) {
      if (!rec.ok) continue;
      double ah[kNumParams];
      (config.coords == Coordinates::polar ? rec.theta_polar : rec.theta_cart)
          .to_array(ah);
      ss += (ah[k] - s.mean_est) * (ah[k] - s.mean_est);
    }
    s.emp_variance = ok_count > 1 ? ss / (n - 1.0) : 0.0;
    s.crlb = crlb_report.crlb(k);
    s.variance_over_crlb = s.crlb > 0 ? s.emp_variance / s.crlb : 0.0;
  }

  rep.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  return rep;
}

std::string MonteCarloReport::to_json() const {
  nlohmann::json j;
  j["coordinates"] = to_string(coords);
  j["runs"] = runs.size();
  j["failures"] = failures;
  j["failed_fraction"] = failed_fraction;
  j["wall_seconds"] = wall_seconds;
  for (int k = 0; k < kNumParams; ++k) {
    const auto& s = params[k];
    nlohmann::json row;
    row["param"] = EcmParams::names()[k];
    row["truth"] = s.truth;
    row["mean_init"] = s.mean_init;
    row["mean_init_abs_rel_err_pct"] = 100.0 * s.mean_init_abs_rel_err;
    row["mean_est"] = s.mean_est;
    row["mean_est_abs_rel_err_pct"] = 100.0 * s.mean_est_abs_rel_err;
    row["bias_of_mean_pct"] = 100.0 * s.bias_of_mean;
    row["emp_variance"] = s.emp_variance;
    row["crlb"] = s.crlb;
    row["variance_over_crlb"] = s.variance_over_crlb;
    row["mean_reported_variance"] = s.mean_reported_variance;
    j["params"].push_back(row);
  }
  return j.dump(2);
}

}  // namespace eis
