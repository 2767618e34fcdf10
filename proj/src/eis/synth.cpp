#include "eis/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "eis/errors.hpp"

namespace eis {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Full avalanche of one key component; chaining it per component keeps
// nearby (seed, substream, revision) triples statistically independent.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string params_id(const EcmParams& p) {
  std::ostringstream os;
  os.precision(17);
  double a[kNumParams];
  p.to_array(a);
  os << "theta=";
  for (int i = 0; i < kNumParams; ++i) os << (i ? "," : "") << a[i];
  return os.str();
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t substream,
                         std::uint64_t revision) {
  std::uint64_t x = mix64(seed + 0x9E3779B97F4A7C15ull);
  x = mix64(x ^ (substream + 0x6A09E667F3BCC909ull));
  x = mix64(x ^ (revision + 0xBB67AE8584CAA73Bull));
  state = x;
}

double NoiseStream::uniform() {
  // 53-bit mantissa in (0,1); offset keeps log() finite in Box-Muller.
  return (static_cast<double>(splitmix64(state) >> 11) + 0.5) * 0x1.0p-53;
}

void NoiseStream::normal_pair(double& z0, double& z1) {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(2.0 * kPi * u2);
  z1 = r * std::sin(2.0 * kPi * u2);
}

SpectrumPoint measure_point(const EcmParams& truth, double omega,
                            const NoiseModel& model, std::uint64_t seed,
                            std::uint64_t substream, std::uint64_t revision,
                            bool inject_noise) {
  const Complex z = z_eq(truth, omega);
  const double rho = std::abs(z);
  const double phi = std::arg(z);
  const double f_hz = omega / (2.0 * kPi);
  const auto [sr_true, sp] = model.sigma_polar(f_hz, rho);

  SpectrumPoint p;
  p.freq_hz = f_hz;
  double rho_m = rho;
  if (inject_noise) {
    NoiseStream rng(seed, substream, revision);
    double z0, z1;
    rng.normal_pair(z0, z1);
    rho_m = rho + sr_true * z0;
    const double phi_m = phi + sp * z1;
    if (!(rho_m > 0)) {
      throw NumericError("measured magnitude driven non-positive by noise");
    }
    p.rho = rho_m;
    p.phi = phi_m;
    p.re = rho_m * std::cos(phi_m);
    p.im = rho_m * std::sin(phi_m);
  } else {
    // Noiseless channel: the model impedance passes through untouched.
    p.rho = rho;
    p.phi = phi;
    p.re = z.real();
    p.im = z.imag();
  }
  // The instrument reports its accuracy from the measured magnitude.
  p.sigma_rho = rho_m * model.eps_rho(f_hz, rho_m) / 3.0;
  p.sigma_phi = sp;
  return p;
}

ImpedanceSpectrum measure_sweep(const EcmParams& truth,
                                const FrequencyGrid& grid,
                                const NoiseModel& model, std::uint64_t seed,
                                bool inject_noise) {
  const int n = grid.size();
  if (n == 0) throw ArgumentError("empty frequency grid");
  // Rank of each point in ascending-omega order keys its substream.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return grid.omegas[a] < grid.omegas[b];
  });
  std::vector<int> rank(n);
  for (int r = 0; r < n; ++r) rank[order[r]] = r;

  ImpedanceSpectrum sp;
  sp.points.resize(n);
  for (int i = 0; i < n; ++i) {
    sp.points[i] = measure_point(truth, grid.omegas[i], model, seed,
                                 static_cast<std::uint64_t>(rank[i]), 0,
                                 inject_noise);
  }
  sp.meta.seed = seed;
  sp.meta.noise_id = model.id();
  sp.meta.truth_id = params_id(truth);
  sp.meta.noisy = inject_noise;
  return sp;
}

VirtualInstrument::VirtualInstrument(const EcmParams& truth, NoiseModel model,
                                     std::uint64_t seed)
    : truth_(truth), model_(std::move(model)), seed_(seed) {}

ImpedanceSpectrum VirtualInstrument::sweep(const FrequencyGrid& grid) {
  revisions_.assign(grid.size(), 0);
  return measure_sweep(truth_, grid, model_, seed_, true);
}

SpectrumPoint VirtualInstrument::measure(int index, double omega) {
  if (index < 0 || index >= static_cast<int>(revisions_.size())) {
    throw ArgumentError("instrument point index out of range");
  }
  ++revisions_[index];
  return measure_point(truth_, omega, model_, seed_,
                       static_cast<std::uint64_t>(index), revisions_[index],
                       true);
}

}  // namespace eis
