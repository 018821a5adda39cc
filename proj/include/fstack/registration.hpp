// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"
#include "fstack/warp.hpp"

#include <filesystem>
#include <vector>

namespace fstack {

struct EccConfig {
  int pyramid_levels = 4;
  int max_iterations = 200;  // per pyramid level
  double epsilon = 1e-6;     // stop when the parameter-update norm drops below
  double pre_blur_sigma = 1.0;
};

struct EccResult {
  AffineWarp warp;  // moving frame -> template frame
  double rho = 0.0;
  int iterations = 0;
};

// Enhanced-correlation-coefficient alignment (Evangelidis & Psarakis style),
// forward-additive iteration refined coarse-to-fine. Throws DivergenceError
// when the update becomes non-finite or the correlation denominator collapses.
EccResult ecc_align(const PlaneF& tmpl, const PlaneF& moving,
                    const AffineWarp& init = {}, const EccConfig& cfg = {});

struct RegistrationResult {
  std::vector<AffineWarp> pairwise;    // frame i -> frame i-1, identity at 0
  std::vector<AffineWarp> cumulative;  // frame i -> frame 0
  std::vector<double> rhos;            // NaN marks a diverged pair
};

// Aligns consecutive pairs (each seeded with identity, so pairs run in
// parallel) and composes toward frame 0. A diverged pair falls back to the
// identity warp with rho = NaN rather than aborting the burst.
RegistrationResult register_burst(const std::vector<PlaneF>& frames,
                                  const EccConfig& cfg = {}, int threads = 0);

void save_warps(const std::filesystem::path& path, const RegistrationResult& result);
RegistrationResult load_warps(const std::filesystem::path& path);

}  // namespace fstack
