#pragma once

// Frequency grids and measured impedance spectra, including the CSV/JSON
// interchange format (round-trip exact at 17 significant digits).

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "eis/noise.hpp"

namespace eis {

struct FrequencyGrid {
  std::vector<double> omegas;  // rad/s, identity order (initially ascending)
  double f_min_hz = 0;
  double f_max_hz = 0;
  std::set<int> adjusted;  // indices already fixed by the design loop

  int size() const { return static_cast<int>(omegas.size()); }
  std::vector<int> free_indices() const;

  // Log-spaced grid with `points_per_decade` points per decade; holds
  // decades*ppd + 1 points with exact endpoints.
  static FrequencyGrid logspace(double f_min_hz, double f_max_hz,
                                int points_per_decade);
  // Log-spaced grid with an explicit total point count (n >= 2).
  static FrequencyGrid logspace_n(double f_min_hz, double f_max_hz, int n);
  static FrequencyGrid from_freqs_hz(const std::vector<double>& freqs_hz,
                                     double f_min_hz, double f_max_hz);
};

struct SpectrumPoint {
  double freq_hz = 0;  // canonical stored field; omega derives from it
  double re = 0;       // Ohm
  double im = 0;       // Ohm
  double rho = 0;      // Ohm
  double phi = 0;      // rad
  double sigma_rho = 0;
  double sigma_phi = 0;

  double omega() const;
  Complex z() const { return {re, im}; }
  CovBlock2x2 cov_polar() const {
    return {sigma_rho * sigma_rho, 0.0, sigma_phi * sigma_phi};
  }
  CovBlock2x2 cov_cartesian() const;
};

struct SpectrumMeta {
  std::uint64_t seed = 0;
  std::string noise_id;
  std::string truth_id;  // empty for non-synthetic data
  bool noisy = true;
  std::string config_hash;
};

struct ImpedanceSpectrum {
  std::vector<SpectrumPoint> points;
  SpectrumMeta meta;

  int size() const { return static_cast<int>(points.size()); }
  void sort_by_omega();

  // Writes the CSV and a <path>.meta.json sidecar.
  void save_csv(const std::string& path) const;
  static ImpedanceSpectrum load_csv(const std::string& path);
};

// FNV-1a of a canonical config string; used in output file headers.
std::string config_hash_hex(const std::string& canonical);

std::string tool_version();

}  // namespace eis
