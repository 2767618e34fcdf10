#include "eis/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eis/errors.hpp"

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr const char* kCsvHeader =
    "freq_hz,re_ohm,im_ohm,rho_ohm,phi_rad,sigma_rho,sigma_phi";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<int> FrequencyGrid::free_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (!adjusted.count(i)) out.push_back(i);
  }
  return out;
}

FrequencyGrid FrequencyGrid::logspace(double f_min_hz, double f_max_hz,
                                      int points_per_decade) {
  if (!(f_min_hz > 0) || !(f_min_hz < f_max_hz)) {
    throw ArgumentError("logspace needs 0 < f_min < f_max");
  }
  if (points_per_decade < 1) throw ArgumentError("points_per_decade >= 1");
  const double decades = std::log10(f_max_hz / f_min_hz);
  const int n = static_cast<int>(std::lround(decades * points_per_decade)) + 1;
  return logspace_n(f_min_hz, f_max_hz, n);
}

FrequencyGrid FrequencyGrid::logspace_n(double f_min_hz, double f_max_hz,
                                        int n) {
  if (!(f_min_hz > 0) || !(f_min_hz < f_max_hz)) {
    throw ArgumentError("logspace needs 0 < f_min < f_max");
  }
  if (n < 2) throw ArgumentError("logspace needs >= 2 points");
  FrequencyGrid g;
  g.f_min_hz = f_min_hz;
  g.f_max_hz = f_max_hz;
  g.omegas.resize(n);
  const double l0 = std::log10(f_min_hz);
  const double l1 = std::log10(f_max_hz);
  const double step = (l1 - l0) / (n - 1);
  for (int i = 0; i < n; ++i) {
    double f = std::pow(10.0, l0 + i * step);
    if (i == 0) f = f_min_hz;
    if (i == n - 1) f = f_max_hz;
    g.omegas[i] = 2.0 * kPi * f;
  }
  return g;
}

FrequencyGrid FrequencyGrid::from_freqs_hz(const std::vector<double>& freqs_hz,
                                           double f_min_hz, double f_max_hz) {
  if (freqs_hz.empty()) throw ArgumentError("empty frequency list");
  FrequencyGrid g;
  g.f_min_hz = f_min_hz;
  g.f_max_hz = f_max_hz;
  g.omegas.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    if (!(f > 0)) throw ArgumentError("frequencies must be > 0");
    g.omegas.push_back(2.0 * kPi * f);
  }
  return g;
}

double SpectrumPoint::omega() const { return 2.0 * kPi * freq_hz; }

CovBlock2x2 SpectrumPoint::cov_cartesian() const {
  return cov_cartesian_measured(rho, phi, sigma_rho, sigma_phi);
}

void ImpedanceSpectrum::sort_by_omega() {
  std::sort(points.begin(), points.end(),
            [](const SpectrumPoint& a, const SpectrumPoint& b) {
              return a.freq_hz < b.freq_hz;
            });
}

void ImpedanceSpectrum::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write spectrum file: " + path);
  out << "# eisfit spectrum v1\n";
  out << "# tool_version: " << tool_version() << "\n";
  out << "# seed: " << meta.seed << "\n";
  out << "# noise: " << meta.noise_id << "\n";
  out << "# truth: " << (meta.truth_id.empty() ? "none" : meta.truth_id)
      << "\n";
  out << "# noisy: " << (meta.noisy ? 1 : 0) << "\n";
  out << "# config_hash: " << meta.config_hash << "\n";
  out << kCsvHeader << "\n";
  for (const auto& p : points) {
    out << fmt17(p.freq_hz) << "," << fmt17(p.re) << "," << fmt17(p.im)
        << "," << fmt17(p.rho) << "," << fmt17(p.phi) << ","
        << fmt17(p.sigma_rho) << "," << fmt17(p.sigma_phi) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);

  nlohmann::json j;
  j["tool_version"] = tool_version();
  j["seed"] = meta.seed;
  j["noise"] = meta.noise_id;
  j["truth"] = meta.truth_id;
  j["noisy"] = meta.noisy;
  j["config_hash"] = meta.config_hash;
  j["points"] = points.size();
  std::ofstream side(path + ".meta.json");
  if (side) side << j.dump(2) << "\n";
}

ImpedanceSpectrum ImpedanceSpectrum::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectrum file: " + path);
  ImpedanceSpectrum sp;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("freq_hz", 0) != 0) {
        throw IoError(path + ": unexpected CSV header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    double v[7];
    for (int i = 0; i < 7; ++i) {
      if (!std::getline(ls, cell, ',')) {
        throw IoError(path + ":" + std::to_string(lineno) + ": short row");
      }
      v[i] = std::strtod(cell.c_str(), nullptr);
    }
    SpectrumPoint p;
    p.freq_hz = v[0];
    p.re = v[1];
    p.im = v[2];
    p.rho = v[3];
    p.phi = v[4];
    p.sigma_rho = v[5];
    p.sigma_phi = v[6];
    sp.points.push_back(p);
  }
  if (!header_seen) throw IoError(path + ": missing CSV header");

  std::ifstream side(path + ".meta.json");
  if (side) {
    try {
      nlohmann::json j;
      side >> j;
      sp.meta.seed = j.value("seed", std::uint64_t{0});
      sp.meta.noise_id = j.value("noise", std::string{});
      sp.meta.truth_id = j.value("truth", std::string{});
      sp.meta.noisy = j.value("noisy", true);
      sp.meta.config_hash = j.value("config_hash", std::string{});
    } catch (const std::exception&) {
      // Sidecar is advisory; a malformed one does not invalidate the data.
    }
  }
  return sp;
}

std::string config_hash_hex(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string tool_version() { return "0.1.0"; }

}  // namespace eis
