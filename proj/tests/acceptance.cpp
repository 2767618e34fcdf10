// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eis/cnls.hpp"
#include "eis/design.hpp"
#include "eis/ecm.hpp"
#include "eis/fisher.hpp"
#include "eis/initializer.hpp"
#include "eis/montecarlo.hpp"
#include "eis/noise.hpp"
#include "eis/synth.hpp"
#include "support/oracles.hpp"

using namespace eis;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  double seconds = 0;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.str().empty()) detail << "; ";
      detail << what;
    }
  }
};

// Reference values: estimated-parameter statistics of the 1000-run study
// (CRLB column) and the initializer accuracy column.
const double kCrlbReference[kNumParams] = {1.159e-7, 5.065e4, 1.723e-6,
                                           6.860e-6, 5.335e-8, 4.666e-6,
                                           2.788e-5, 8.710e-6, 2.921e-5,
                                           4.586e-4};
const double kInitErrReference[kNumParams] = {15.90, 7.53, 0.70, 4.75, 10.44,
                                              4.72, 1.90, 12.38, 4.72, 4.24};

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
  return buf;
}

const NoiseModel& noise() {
  static const NoiseModel m = NoiseModel::single_region(1.0, 1.0);
  return m;
}

const FrequencyGrid& grid61() {
  static const FrequencyGrid g = FrequencyGrid::logspace(1e-2, 1e4, 10);
  return g;
}

Outcome criterion1_crlb() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const CrlbReport rep =
      fim(EcmParams::demo_cell(), grid61(), noise(), Coordinates::polar);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  double worst = 0;
  for (int i = 0; i < kNumParams; ++i) {
    const double dev =
        std::abs(rep.crlb(i) - kCrlbReference[i]) / kCrlbReference[i];
    worst = std::max(worst, dev);
    out.require(dev <= 0.05, std::string(EcmParams::names()[i]) +
                                 " CRLB off by " + pct(dev));
  }
  out.require(out.seconds < 1.0, "runtime >= 1 s");
  out.detail << (out.detail.str().empty() ? "" : "; ") << "max deviation "
             << pct(worst) << ", " << out.seconds << " s";
  return out;
}

Outcome criterion2_unbiasedness(const MonteCarloReport& mc) {
  Outcome out;
  double worst = 0;
  for (int i = 0; i < kNumParams; ++i) {
    const auto& s = mc.params[i];
    worst = std::max(worst, s.mean_est_abs_rel_err);
    out.require(s.mean_est_abs_rel_err <= 0.015,
                std::string(EcmParams::names()[i]) + " mean |rel err| " +
                    pct(s.mean_est_abs_rel_err));
    out.require(s.bias_of_mean <= 0.015,
                std::string(EcmParams::names()[i]) + " bias of mean " +
                    pct(s.bias_of_mean));
  }
  out.detail << (out.detail.str().empty() ? "" : "; ")
             << "max mean |rel err| " << pct(worst);
  return out;
}

Outcome criterion3_efficiency(const MonteCarloReport& mc) {
  Outcome out;
  double lo = 1e9, hi = 0;
  for (int i = 0; i < kNumParams; ++i) {
    const double r = mc.params[i].variance_over_crlb;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    out.require(r >= 0.85 && r <= 1.35,
                std::string(EcmParams::names()[i]) + " variance/CRLB " +
                    std::to_string(r));
  }
  out.detail << (out.detail.str().empty() ? "" : "; ") << "ratios in ["
             << lo << ", " << hi << "]";
  return out;
}

Outcome criterion4_initializer(const MonteCarloReport& mc) {
  Outcome out;
  for (int i = 0; i < kNumParams; ++i) {
    const double err_pp = 100.0 * mc.params[i].mean_init_abs_rel_err;
    const double dev = std::abs(err_pp - kInitErrReference[i]);
    out.require(dev <= 3.0, std::string(EcmParams::names()[i]) + " init err " +
                                std::to_string(err_pp) + "pp vs reference " +
                                std::to_string(kInitErrReference[i]) + "pp");
  }
  if (out.pass) out.detail << "all within +/-3pp of the reference column";
  return out;
}

Outcome criterion5_coordinate_equivalence(const MonteCarloReport& mc) {
  Outcome out;
  double worst = 0;
  int worst_run = -1;
  for (size_t r = 0; r < mc.runs.size(); ++r) {
    const auto& rec = mc.runs[r];
    if (!rec.ok) continue;
    double tp[kNumParams], tc[kNumParams];
    rec.theta_polar.to_array(tp);
    rec.theta_cart.to_array(tc);
    for (int i = 0; i < kNumParams; ++i) {
      const double dev = std::abs(tp[i] - tc[i]) / std::abs(tp[i]);
      if (dev > worst) {
        worst = dev;
        worst_run = static_cast<int>(r);
      }
    }
  }
  out.require(worst <= 1e-3, "per-seed deviation " + pct(worst) + " at run " +
                                 std::to_string(worst_run));
  out.detail << (out.detail.str().empty() ? "" : "; ") << "worst per-seed "
             << pct(worst);
  return out;
}

Outcome criterion6_contributions() {
  Outcome out;
  const int n = grid61().size();
  std::vector<std::array<double, kNumParams>> diag(n);
  for (int i = 0; i < n; ++i) {
    const ParamMatrix c = fim_contribution(
        EcmParams::demo_cell(), grid61().omegas[i], noise(),
        Coordinates::polar);
    for (int k = 0; k < kNumParams; ++k) diag[i][k] = c(k, k);
  }
  std::array<int, kNumParams> argmax{};
  for (int k = 0; k < kNumParams; ++k) {
    for (int i = 1; i < n; ++i) {
      if (diag[i][k] > diag[argmax[k]][k]) argmax[k] = i;
    }
  }
  const int qw = argmax[9];
  const int r2lo = std::min({argmax[6], argmax[7], argmax[8]});
  const int r2hi = std::max({argmax[6], argmax[7], argmax[8]});
  const int r1lo = std::min({argmax[3], argmax[4], argmax[5]});
  const int r1hi = std::max({argmax[3], argmax[4], argmax[5]});
  out.require(qw < r2lo, "f*(Q_W) not below the R_2 group");
  out.require(r2hi < r1lo, "R_2 group not below the R_1 group");
  out.require(r1hi < argmax[0], "R_1 group not below f*(R_s)");
  for (int i = 0; i < 20; ++i) {
    out.require(diag[i][9] > diag[i + 1][9],
                "Q_W contribution not monotone at grid index " +
                    std::to_string(i));
  }
  if (out.pass) {
    out.detail << "peak order f*(Q_W) < R_2 group < R_1 group < f*(R_s), "
                  "Q_W monotone over the bottom two decades";
  }
  return out;
}

Outcome criterion7_design() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  DesignConfig cfg;  // defaults match the headline study
  const DesignResult res = run_design(EcmParams::demo_cell(), noise(), cfg);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const auto& first = res.history.front();
  const auto& last = res.history.back();

  const double volume_ratio = last.volume_true / first.volume_true;
  out.require(volume_ratio <= 0.85,
              "ellipsoid volume ratio " + std::to_string(volume_ratio));

  double sum_impr = 0, worst_increase = 0;
  for (int i = 0; i < kNumParams; ++i) {
    const double impr =
        (first.crlb_true(i) - last.crlb_true(i)) / first.crlb_true(i);
    sum_impr += impr;
    worst_increase = std::max(worst_increase, -impr);
  }
  out.require(sum_impr / kNumParams >= 0.10,
              "average CRLB improvement " + pct(sum_impr / kNumParams));
  out.require(worst_increase <= 0.03,
              "worst per-parameter CRLB increase " + pct(worst_increase));
  for (const auto& it : res.history) {
    if (it.adjusted_index >= 0) {
      out.require(it.lambda_after >= it.lambda_before * (1.0 - 1e-9),
                  "lambda_min decreased at iteration " + std::to_string(it.k));
    }
  }
  // Estimate tracking: CRLB at theta-hat within 20% of CRLB at the truth.
  double worst_track = 0;
  for (const auto& it : res.history) {
    for (int i = 0; i < kNumParams; ++i) {
      worst_track = std::max(worst_track,
                             std::abs(it.crlb_est(i) - it.crlb_true(i)) /
                                 it.crlb_true(i));
    }
  }
  out.require(worst_track <= 0.20, "estimate tracking " + pct(worst_track));
  out.require(out.seconds < 600.0, "runtime >= 10 min");
  out.detail << (out.detail.str().empty() ? "" : "; ") << "volume ratio "
             << volume_ratio << ", avg improvement " << pct(sum_impr / 10)
             << ", worst increase " << pct(worst_increase) << ", tracking "
             << pct(worst_track) << ", " << out.seconds << " s";
  return out;
}

Outcome criterion8_covariance_oracle() {
  Outcome out;
  std::mt19937_64 rng(88001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_sigma = 0;
  for (int i = 0; i < 20; ++i) {
    const double rho = std::exp(4.0 * (u(rng) - 0.5));
    const double phi = kPi * (u(rng) - 0.5);
    const double sr = rho * (0.002 + 0.012 * u(rng));
    const double sp = 0.002 + 0.012 * u(rng);
    const auto mc =
        oracles::mc_cartesian_cov(rho, phi, sr, sp, 1'000'000, 88200 + i);
    const CovBlock2x2 qt = polar_to_cartesian_cov_exact(rho, phi, sr, sp);
    const CovBlock2x2 qm = cov_cartesian_measured(rho, phi, sr, sp);
    int form = 0;
    for (const CovBlock2x2* q : {&qt, &qm}) {
      const double za = std::abs(q->a - mc.cov.a) / mc.se_a * 3.0;
      const double zb = std::abs(q->b - mc.cov.b) / mc.se_b * 3.0;
      const double zc = std::abs(q->c - mc.cov.c) / mc.se_c * 3.0;
      for (double z : {za, zb, zc}) worst_sigma = std::max(worst_sigma, z / 3.0 * 9.0 / 3.0);
      const char* tag = form == 0 ? "true-form" : "measured-form";
      out.require(std::abs(q->a - mc.cov.a) <= 3.0 * mc.se_a,
                  std::string(tag) + " element a at point " +
                      std::to_string(i));
      out.require(std::abs(q->b - mc.cov.b) <= 3.0 * mc.se_b,
                  std::string(tag) + " element b at point " +
                      std::to_string(i));
      out.require(std::abs(q->c - mc.cov.c) <= 3.0 * mc.se_c,
                  std::string(tag) + " element c at point " +
                      std::to_string(i));
      ++form;
    }
  }
  if (out.pass) {
    out.detail << "120 covariance elements within 3 sampling standard errors";
  }
  return out;
}

Outcome criterion9_derivatives() {
  Outcome out;
  std::mt19937_64 rng(88002);
  std::uniform_real_distribution<double> logw(-2.5, 5.5);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const EcmParams p = oracles::random_interior_params(rng);
    const double omega = std::pow(10.0, logw(rng));
    const ModelJacobian a = z_eq_jacobian(p, omega);
    const ModelJacobian f = oracles::fd_jacobian(p, omega);
    const double rho = std::abs(z_eq(p, omega));
    double arr[kNumParams];
    p.to_array(arr);
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < kNumParams; ++k) {
        const double slack = oracles::fd_slack(rho, 1e-6 * std::abs(arr[k]));
        out.require(oracles::fd_close(a(r, k), f(r, k), 1e-5, slack),
                    "jacobian (" + std::to_string(r) + "," +
                        std::to_string(k) + ") at point " + std::to_string(i));
        ++checked;
      }
    }
    // dQ/dtheta of the true-value covariance via (rho, phi) chain rule,
    // against direct finite differences in theta.
    const PolarJet jet = polar_jet(p, omega);
    const double eps_r = noise().eps_rho(omega / (2 * kPi), jet.rho);
    const CovBlockDerivs cd =
        cov_cartesian_true_derivs(jet.rho, jet.phi, eps_r, noise().eps_phi());
    for (int k = 0; k < kNumParams; ++k) {
      const double h = 1e-6 * std::abs(arr[k]);
      double plus[kNumParams], minus[kNumParams];
      for (int j = 0; j < kNumParams; ++j) plus[j] = minus[j] = arr[j];
      plus[k] += h;
      minus[k] -= h;
      const CovBlock2x2 qp =
          cov_cartesian_true(EcmParams::from_array(plus), omega, noise());
      const CovBlock2x2 qm =
          cov_cartesian_true(EcmParams::from_array(minus), omega, noise());
      const double slack = oracles::fd_slack(jet.rho * jet.rho, h);
      const double da = cd.d_rho.a * jet.d_rho(k) + cd.d_phi.a * jet.d_phi(k);
      const double db = cd.d_rho.b * jet.d_rho(k) + cd.d_phi.b * jet.d_phi(k);
      const double dc = cd.d_rho.c * jet.d_rho(k) + cd.d_phi.c * jet.d_phi(k);
      out.require(
          oracles::fd_close(da, (qp.a - qm.a) / (2 * h), 1e-5, slack),
          "dQ_a/dtheta_" + std::to_string(k) + " at point " + std::to_string(i));
      out.require(
          oracles::fd_close(db, (qp.b - qm.b) / (2 * h), 1e-5, slack),
          "dQ_b/dtheta_" + std::to_string(k) + " at point " + std::to_string(i));
      out.require(
          oracles::fd_close(dc, (qp.c - qm.c) / (2 * h), 1e-5, slack),
          "dQ_c/dtheta_" + std::to_string(k) + " at point " + std::to_string(i));
      checked += 3;
    }
  }
  out.detail << (out.detail.str().empty() ? "" : "; ") << checked
             << " derivative comparisons";
  return out;
}

Outcome criterion10_properties() {
  Outcome out;
  std::mt19937_64 rng(88003);
  std::uniform_real_distribution<double> logw(-2.0, 4.5);

  // FIM symmetric PSD.
  for (int i = 0; i < 25; ++i) {
    const EcmParams p = oracles::random_interior_params(rng);
    const FrequencyGrid g = FrequencyGrid::logspace(1e-2, 1e3, 3);
    const CrlbReport rep = fim(p, g, noise(), Coordinates::polar);
    out.require((rep.fim - rep.fim.transpose()).cwiseAbs().maxCoeff() <=
                    1e-12 * rep.fim.cwiseAbs().maxCoeff(),
                "FIM asymmetric");
    out.require(rep.eigenvalues(0) >=
                    -1e-10 * std::abs(rep.eigenvalues(kNumParams - 1)),
                "FIM not PSD");
  }

  // Property-1 block sum vs a monolithic stacked assembly.
  {
    const FrequencyGrid g = FrequencyGrid::logspace(1e-1, 1e3, 4);
    const EcmParams p = EcmParams::demo_cell();
    const int n = g.size();
    Eigen::MatrixXd j(2 * n, kNumParams);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    std::vector<Eigen::MatrixXd> dq(kNumParams,
                                    Eigen::MatrixXd::Zero(2 * n, 2 * n));
    for (int i = 0; i < n; ++i) {
      const double omega = g.omegas[i];
      const PolarJet jet = polar_jet(p, omega);
      const double sr = jet.rho * 0.01 / 3.0;
      const double sp = noise().eps_phi() / 3.0;
      j.row(2 * i) = jet.d_rho.transpose();
      j.row(2 * i + 1) = jet.d_phi.transpose();
      q(2 * i, 2 * i) = sr * sr;
      q(2 * i + 1, 2 * i + 1) = sp * sp;
      for (int k = 0; k < kNumParams; ++k) {
        dq[k](2 * i, 2 * i) = 2.0 * sr * sr * jet.d_rho(k) / jet.rho;
      }
    }
    const Eigen::MatrixXd qinv = q.inverse();
    ParamMatrix mono = j.transpose() * qinv * j;
    for (int k = 0; k < kNumParams; ++k) {
      for (int l = k; l < kNumParams; ++l) {
        const double t = 0.5 * (qinv * dq[k] * qinv * dq[l]).trace();
        mono(k, l) += t;
        if (l != k) mono(l, k) += t;
      }
    }
    ParamMatrix block = ParamMatrix::Zero();
    for (double omega : g.omegas) {
      block += fim_contribution(p, omega, noise(), Coordinates::polar);
    }
    out.require((block - mono).cwiseAbs().maxCoeff() <=
                    1e-10 * mono.cwiseAbs().maxCoeff(),
                "block sum != monolithic assembly");
  }

  // Zarc depressed-circle locus.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double r = std::exp(3.0 * (u(rng) - 0.5));
    const double q = std::exp(3.0 * (u(rng) - 0.5));
    const double phi = 0.3 + 0.7 * u(rng);
    const ZarcDescriptor d = zarc_descriptor(r, q, phi);
    const double omega = std::pow(10.0, logw(rng));
    const Complex z = z_zarc(r, q, phi, omega);
    const double dist =
        std::hypot(z.real() - d.center_re, -z.imag() - d.center_negim);
    out.require(std::abs(dist - d.radius) < 1e-9 * d.radius,
                "Zarc locus off the depressed circle");
  }

  // Warburg: the real and negated imaginary parts are bit-identical, so
  // the phase is -45 degrees to the accuracy of atan2 itself.
  for (double omega : {1e-4, 1e-1, 1.0, 1e3, 1e7}) {
    const Complex zw = z_warburg(2.0, omega);
    out.require(zw.real() == -zw.imag(), "Warburg real != -imag");
    out.require(std::abs(std::arg(zw) + kPi / 4.0) <= 2e-16,
                "Warburg phase not -pi/4");
  }

  // Noiseless end-to-end pipeline.
  {
    const ImpedanceSpectrum sp =
        measure_sweep(EcmParams::demo_cell(), grid61(), noise(), 1, false);
    const EcmParams theta0 = initialize_all(sp, noise()).theta0;
    double tv[kNumParams], iv[kNumParams];
    EcmParams::demo_cell().to_array(tv);
    theta0.to_array(iv);
    for (int i = 0; i < kNumParams; ++i) {
      const double dev = std::abs(iv[i] - tv[i]) / std::abs(tv[i]);
      out.require(dev <= 0.05, std::string("init ") + EcmParams::names()[i] +
                                   " off by " + pct(dev));
    }
    FitConfig fc;
    const FitResult fr = fit(sp, theta0, fc);
    out.require(fr.converged, "noiseless fit did not converge");
    double hv[kNumParams];
    fr.theta_hat.to_array(hv);
    double worst_fit = 0;
    for (int i = 0; i < kNumParams; ++i) {
      worst_fit = std::max(worst_fit,
                           std::abs(hv[i] - tv[i]) / std::abs(tv[i]));
    }
    out.require(worst_fit <= 1e-6,
                "fitted recovery " + std::to_string(worst_fit));
    out.detail << (out.detail.str().empty() ? "" : "; ")
               << "noiseless fitted recovery max rel dev " << worst_fit;
  }
  return out;
}

}  // namespace

int main() {
  std::printf("eisfit acceptance suite (version %s)\n", tool_version().c_str());
  int passed = 0, total = 0;
  const auto report = [&](int id, const char* name, const Outcome& out) {
    ++total;
    if (out.pass) ++passed;
    std::printf("[%s] %2d %s%s%s\n", out.pass ? "PASS" : "FAIL", id, name,
                out.detail.str().empty() ? "" : ": ",
                out.detail.str().c_str());
    std::fflush(stdout);
  };

  report(1, "CRLB reproduction", criterion1_crlb());

  // One shared 1000-run study feeds criteria 2-5.
  MonteCarloConfig mc_cfg;
  mc_cfg.runs = 1000;
  mc_cfg.seed = 42;
  mc_cfg.fit_both_coords = true;
  const auto t0 = std::chrono::steady_clock::now();
  const MonteCarloReport mc = run_montecarlo(mc_cfg);
  const double mc_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  {
    Outcome gate;
    gate.require(mc.failed_fraction <= 0.01,
                 "failed fraction " + pct(mc.failed_fraction));
    gate.require(mc_secs < 300.0, "runtime >= 5 min");
    gate.detail << (gate.detail.str().empty() ? "" : "; ") << mc.runs.size()
                << " runs, " << mc.failures << " failures, " << mc_secs
                << " s";
    Outcome c2 = criterion2_unbiasedness(mc);
    c2.pass = c2.pass && gate.pass;
    c2.detail << "; " << gate.detail.str();
    report(2, "estimator unbiasedness (1000 runs)", c2);
  }
  report(3, "estimator efficiency", criterion3_efficiency(mc));
  report(4, "initializer quality", criterion4_initializer(mc));
  report(5, "coordinate equivalence", criterion5_coordinate_equivalence(mc));
  report(6, "FIM contribution structure", criterion6_contributions());
  report(7, "E-optimal frequency design", criterion7_design());
  report(8, "covariance projection oracle", criterion8_covariance_oracle());
  report(9, "derivative correctness", criterion9_derivatives());
  report(10, "property suite", criterion10_properties());

  std::printf("RESULT: %d/%d criteria passed\n", passed, total);
  return passed == total ? 0 : 1;
}
