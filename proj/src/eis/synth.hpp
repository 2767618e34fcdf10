#pragma once

// Virtual EIS instrument: draws Gaussian polar noise around the model
// impedance of a ground-truth cell. Each grid point gets its own counter
// substream so a single point can be re-measured without disturbing the
// noise of any other point.

#include <cstdint>

#include "eis/ecm.hpp"
#include "eis/noise.hpp"
#include "eis/spectrum.hpp"

namespace eis {

// Deterministic counter RNG (splitmix64 stream + Box-Muller); bit-exact
// across platforms, unlike the standard-library distributions.
struct NoiseStream {
  std::uint64_t state;
  NoiseStream(std::uint64_t seed, std::uint64_t substream,
              std::uint64_t revision);
  double uniform();                         // (0, 1)
  void normal_pair(double& z0, double& z1);  // independent N(0,1)
};

// One noisy measurement at `omega`. `substream` keys the per-point noise
// stream (the point's rank in the sweep), `revision` counts re-measurements
// of that point. With inject_noise=false the true impedance is returned and
// the instrument-reported sigmas are still attached.
SpectrumPoint measure_point(const EcmParams& truth, double omega,
                            const NoiseModel& model, std::uint64_t seed,
                            std::uint64_t substream = 0,
                            std::uint64_t revision = 0,
                            bool inject_noise = true);

// Full sweep over the grid; per-point substreams are keyed by each point's
// rank in ascending-omega order, so a permuted grid yields the same spectrum
// after sorting. Points are returned in the grid's own order.
ImpedanceSpectrum measure_sweep(const EcmParams& truth,
                                const FrequencyGrid& grid,
                                const NoiseModel& model, std::uint64_t seed,
                                bool inject_noise = true);

// Stateful instrument exposing exactly the two calls a physical EIS device
// offers: a sweep and a single-point measurement.
class VirtualInstrument {
 public:
  VirtualInstrument(const EcmParams& truth, NoiseModel model,
                    std::uint64_t seed);

  ImpedanceSpectrum sweep(const FrequencyGrid& grid);
  // Re-measures the point with identity `index` at (a possibly adjusted)
  // omega; every call yields a fresh draw for that index only.
  SpectrumPoint measure(int index, double omega);

  const NoiseModel& noise() const { return model_; }

 private:
  EcmParams truth_;
  NoiseModel model_;
  std::uint64_t seed_;
  std::vector<std::uint64_t> revisions_;
};

}  // namespace eis
