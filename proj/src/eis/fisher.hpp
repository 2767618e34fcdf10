#pragma once

// General Gaussian Fisher information for the EIS measurement model, with
// the covariance treated as a function of the parameters. Per-frequency
// contributions sum to the full matrix; the report carries the CRLB vector,
// eigenvalues and the confidence-ellipsoid volume.

#include <string>
#include <vector>

#include "eis/cnls.hpp"
#include "eis/ecm.hpp"
#include "eis/noise.hpp"
#include "eis/spectrum.hpp"

namespace eis {

struct CrlbReport {
  ParamMatrix fim;
  ParamMatrix fim_inverse;
  ParamVector eigenvalues;  // ascending
  ParamVector crlb;         // diagonal of the inverse
  ParamVector crlb_gauss;   // same, with the 1/2 tr(...) term left out
  double ellipsoid_volume = 0;
  double log_ellipsoid_volume = 0;
  double condition = 0;
  bool singular = false;  // condition number beyond 1e14; pseudo-inverse used
  Coordinates coords = Coordinates::polar;
  EcmParams eval_point;
  std::string to_json() const;
};

// Contribution of a single frequency:
//   dz^T Q^{-1} dz + 1/2 tr(Q^{-1} dQ/dθk Q^{-1} dQ/dθl)
// with Q the true-value covariance at (θ, ω).
ParamMatrix fim_contribution(const EcmParams& theta, double omega,
                             const NoiseModel& model, Coordinates coords,
                             bool include_trace_term = true);

CrlbReport fim(const EcmParams& theta, const FrequencyGrid& grid,
               const NoiseModel& model, Coordinates coords);

// Volume of the M-dimensional confidence ellipsoid with semi-axes
// sqrt(1/lambda_i):  (2/M) pi^(M/2) / Gamma(M/2) * prod sqrt(1/lambda_i).
double ellipsoid_volume(const std::vector<double>& eigenvalues);
double log_ellipsoid_volume(const std::vector<double>& eigenvalues);

// Smallest FIM eigenvalue for a grid; the quantity maximized by the
// E-optimal design loop.
double fim_min_eigenvalue(const EcmParams& theta, const FrequencyGrid& grid,
                          const NoiseModel& model, Coordinates coords);

}  // namespace eis
