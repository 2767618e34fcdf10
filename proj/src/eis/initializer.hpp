#pragma once

// Initial guess for all ten ECM parameters from spectrum geometry: grown
// orthogonal line fits at the two spectrum ends, closed forms for the
// Warburg and HF branch, and peak extraction on the HF/LF-cleaned
// mid-frequency arc.

#include <string>
#include <vector>

#include "eis/ecm.hpp"
#include "eis/errors.hpp"
#include "eis/noise.hpp"
#include "eis/spectrum.hpp"

namespace eis {

struct InsufficientPointsError : NumericError {
  explicit InsufficientPointsError(const std::string& w) : NumericError(w) {}
};
struct DegenerateGeometryError : NumericError {
  explicit DegenerateGeometryError(const std::string& w) : NumericError(w) {}
};
struct PeakDetectionError : NumericError {
  explicit PeakDetectionError(const std::string& w) : NumericError(w) {}
};

enum class SpectrumEnd { low_freq, high_freq };

// Orthogonal-distance line fit in the (R, X) plane. For the low-frequency
// end the slope is pinned to -1; for the high-frequency end it is free but
// constrained to k >= 0 (vertical accepted as the phi_HF -> -1 limit).
struct LineFit {
  double k = 0;            // slope; +infinity when vertical
  double n = 0;            // intercept of X = k R + n (NaN when vertical)
  bool vertical = false;
  double r0 = 0;           // R position of a vertical line
  double ux = 1, uy = 0;   // unit direction
  double px = 0, py = 0;   // a point on the line
  int n_points = 0;

  struct PointError {
    double eps_rho = 0;        // measured |.| relative deviation from line
    double eps_phi = 0;        // measured angle deviation from line
    double eps_rho_bound = 0;  // instrument bound at this point
    double eps_phi_bound = 0;
  };
  std::vector<PointError> point_errors;

  Complex project(Complex z) const;
  bool within_bounds() const;
};

// Single orthogonal fit of the n end-most points (spectrum must be sorted by
// ascending omega). Exposed for tests and diagnostics.
LineFit asymptote_line_at(const ImpedanceSpectrum& sp, SpectrumEnd end,
                          const NoiseModel& model, int n_points);

// Grows the point count from 2 and returns the largest fit whose points all
// satisfy the instrument error bounds.
LineFit fit_asymptote_line(const ImpedanceSpectrum& sp, SpectrumEnd end,
                           const NoiseModel& model);

struct LfInit {
  double q_w0 = 0;
  double r_sigma = 0;  // horizontal-axis interception of the LF line
  std::vector<int> excluded;
};
LfInit init_lf(const ImpedanceSpectrum& sp, const LineFit& lf_line);

struct HfInit {
  double r_s0 = 0;
  double q_hf0 = 0;
  double phi_hf0 = 0;
  bool fallback = false;
  std::vector<std::string> notes;
};
HfInit init_hf(const ImpedanceSpectrum& sp, const LineFit& hf_line);

struct MfInit {
  double r_10 = 0, q_10 = 0, phi_10 = 0;
  double r_20 = 0, q_20 = 0, phi_20 = 0;
  double omega_c1 = 0;  // higher-frequency arc
  double omega_c2 = 0;
  bool fallback = false;
  std::vector<std::string> notes;
};
MfInit init_mf(const ImpedanceSpectrum& sp, const LfInit& lf,
               const HfInit& hf);

struct InitReport {
  EcmParams theta0;
  int n_lf = 0, n_hf = 0;
  double k_lf = -1, n_lf_intercept = 0;
  double k_hf = 0, n_hf_intercept = 0;
  double omega_c1 = 0, omega_c2 = 0;
  std::vector<std::string> notes;  // fallbacks, exclusions, nudges
  std::string to_json() const;
};

InitReport initialize_all(const ImpedanceSpectrum& sp,
                          const NoiseModel& model);

}  // namespace eis
