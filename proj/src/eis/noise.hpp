#pragma once

// EIS instrument accuracy model: piecewise accuracy-contour lookup for the
// relative magnitude error, a constant absolute phase error, and the
// polar -> Cartesian covariance projections in measured-value and
// true-value form.

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "eis/ecm.hpp"

namespace eis {

// Symmetric 2x2 covariance block: [[a, b], [b, c]].
struct CovBlock2x2 {
  double a = 0;
  double b = 0;
  double c = 0;

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << a, b, b, c;
    return m;
  }
  bool positive_definite() const {
    return a > 0 && c > 0 && a * c - b * b > 0;
  }
};

// One accuracy contour region: applies for (f, |Z|) inside the box.
struct NoiseRegion {
  double f_min_hz = 0;
  double f_max_hz = 0;
  double z_min_ohm = 0;
  double z_max_ohm = 0;
  double eps_rho = 0;  // relative magnitude error, as a fraction
};

class NoiseModel {
 public:
  NoiseModel(std::vector<NoiseRegion> regions, double eps_phi_rad);

  // Single contour covering all (f, |Z|) with the given accuracy.
  static NoiseModel single_region(double eps_rho_percent, double eps_phi_deg);

  // Plain-text config: "eps_phi_deg <v>" plus one
  // "region <f_min> <f_max> <z_min> <z_max> <eps_rho_percent>" row per
  // contour ("inf" accepted for open bounds, '#' starts a comment).
  static NoiseModel load(const std::string& path);
  void save(const std::string& path) const;

  // Relative magnitude error at (f, rho); throws UndefinedRegionError if the
  // point lies outside every contour.
  double eps_rho(double f_hz, double rho) const;
  double eps_phi() const { return eps_phi_; }

  // (sigma_rho, sigma_phi) = (rho * eps_rho / 3, eps_phi / 3).
  std::pair<double, double> sigma_polar(double f_hz, double rho) const;
  CovBlock2x2 cov_polar(double f_hz, double rho) const;

  const std::vector<NoiseRegion>& regions() const { return regions_; }
  std::string id() const;

 private:
  std::vector<NoiseRegion> regions_;
  double eps_phi_;  // radians
};

// Covariance of (Re Z, Im Z) given independent Gaussian polar noise, from
// the exact moments of (rho + d_rho) e^{j(phi + d_phi)}. Used with true
// model-implied (rho, phi) inside the Fisher information.
CovBlock2x2 polar_to_cartesian_cov_exact(double rho, double phi,
                                         double sigma_rho, double sigma_phi);

// Debiased consistent conversion evaluated at measured quantities; this is
// the weighting matrix attached to measured spectra.
CovBlock2x2 cov_cartesian_measured(double rho_meas, double phi_meas,
                                   double sigma_rho, double sigma_phi);

// True-value Cartesian covariance Q_i(θ) at (θ, ω) under the given model.
CovBlock2x2 cov_cartesian_true(const EcmParams& p, double omega,
                               const NoiseModel& model);

// Partial derivatives of the true-value covariance with respect to rho and
// phi (eps_rho treated as locally constant across the contour region).
struct CovBlockDerivs {
  CovBlock2x2 value;
  CovBlock2x2 d_rho;
  CovBlock2x2 d_phi;
};
CovBlockDerivs cov_cartesian_true_derivs(double rho, double phi,
                                         double eps_rho, double eps_phi);

}  // namespace eis
