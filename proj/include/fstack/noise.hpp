// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"
#include "fstack/raw.hpp"

#include <cstdint>
#include <random>

namespace fstack {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to derive decorrelated per-stream engine seeds.
uint64_t splitmix64(uint64_t x);

// Same (seed, stream) always yields the same engine state; distinct streams
// (frame indices, stage ids) give independent sequences.
Rng make_rng(uint64_t seed, uint64_t stream = 0);

struct NoiseParams {
  double lambda_shot = 0.0;  // variance per unit intensity
  double lambda_read = 0.0;  // intensity-independent variance
};

// log(lambda_shot) ~ U(log 1e-4, log 0.012);
// log(lambda_read) | lambda_shot ~ N(2.18 log(lambda_shot) + 1.2, 0.26).
NoiseParams sample_noise_params(Rng& rng);

// y ~ N(mu = x, var = lambda_read + lambda_shot * x), clamped to [0,1].
// Pass clamp = false to study the pre-clip distribution.
PlaneF add_noise(const PlaneF& image, const NoiseParams& params, Rng& rng,
                 bool clamp = true);
RgbImage add_noise(const RgbImage& image, const NoiseParams& params, Rng& rng);
PlanarRaw add_noise(const PlanarRaw& image, const NoiseParams& params, Rng& rng);

}  // namespace fstack
