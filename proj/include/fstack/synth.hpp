// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/fuse.hpp"
#include "fstack/image.hpp"
#include "fstack/warp.hpp"

#include <cstdint>

namespace fstack {

// Multi-octave value noise in [0,1], smooth in (x, y). Evaluable at arbitrary
// real coordinates, which lets tests build exactly warped image pairs without
// any resampling step.
double synth_texture(double x, double y, uint64_t seed, int octaves = 5,
                     double base_cell = 64.0);

// Samples the texture at warp(p) for every pixel p.
PlaneF render_texture(Index rows, Index cols, uint64_t seed,
                      const AffineWarp& warp = {});

// Correlated three-channel variant of the same texture.
RgbImage render_texture_rgb(Index rows, Index cols, uint64_t seed,
                            const AffineWarp& warp = {});

// Smooth low-frequency field in [0,1], used as a synthetic depth map.
PlaneF render_depth(Index rows, Index cols, uint64_t seed);

// Simulates a focus bracket: frame i is sharp where |depth - focus_i| is
// small and progressively blurred elsewhere, focus planes evenly spaced.
Burst synth_depth_blur_burst(const RgbImage& sharp, const PlaneF& depth,
                             int n_frames, double max_sigma = 6.0);

}  // namespace fstack
