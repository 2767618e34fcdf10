#pragma once

// Weighted complex nonlinear least squares in polar or Cartesian
// coordinates. Mismatches are weighted by the inverse of the measured
// covariance blocks, which stay fixed during the optimization; the
// minimizer is Levenberg-Marquardt with the analytic model Jacobian.

#include <string>
#include <vector>

#include "eis/ecm.hpp"
#include "eis/errors.hpp"
#include "eis/spectrum.hpp"

namespace eis {

enum class Coordinates { polar, cartesian };

const char* to_string(Coordinates c);
Coordinates coordinates_from_string(const std::string& s);

struct SingularWeightError : NumericError {
  explicit SingularWeightError(const std::string& w) : NumericError(w) {}
};

struct FitConfig {
  Coordinates coordinates = Coordinates::polar;
  int max_iters = 200;
  double gradient_tol = 1e-10;
  double step_tol = 1e-12;
  double cost_tol = 1e-12;
  double damping_init = 1e-3;
  double bound_nudge = 1e-6;
};

struct FitResult {
  EcmParams theta_hat;
  double cost = 0;  // weighted SSE at theta_hat
  int iterations = 0;
  bool converged = false;
  ParamMatrix accuracy_matrix;
  ParamVector param_variances;
  bool accuracy_pd = false;  // false: variances fall back to the GN part
  std::vector<double> cost_trace;  // cost after each accepted step
  std::string message;
  std::string to_json() const;
};

// Sum over points of eps_i^T Q_i^{-1} eps_i with eps the (rho, phi) or
// (R, X) mismatch; throws SingularWeightError if a covariance block fails
// its Cholesky factorization.
double objective(const EcmParams& theta, const ImpedanceSpectrum& sp,
                 Coordinates coords);

FitResult fit(const ImpedanceSpectrum& sp, const EcmParams& theta0,
              const FitConfig& config);

// Post-fit accuracy matrix: A_{kl} = J^T Q^{-1} J - eps^T Q^{-1} d2Z/dθkdθl,
// one half of the objective Hessian. Variances are diag(A^{-1}); if A is
// not positive definite they fall back to the Gauss-Newton part and pd is
// cleared.
void accuracy_matrix(const EcmParams& theta_hat, const ImpedanceSpectrum& sp,
                     Coordinates coords, ParamMatrix& a, ParamVector& var,
                     bool& pd);

}  // namespace eis
