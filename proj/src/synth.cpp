// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/synth.hpp"

#include "fstack/filters.hpp"
#include "fstack/noise.hpp"

#include <cmath>

namespace fstack {

namespace {

double lattice(uint64_t seed, int64_t ix, int64_t iy) {
  uint64_t h = splitmix64(seed ^ splitmix64(static_cast<uint64_t>(ix)));
  h = splitmix64(h ^ splitmix64(static_cast<uint64_t>(iy) * 0x9e3779b97f4a7c15ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep5(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

double value_noise(double x, double y, uint64_t seed) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int64_t ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy);
  const double tx = smoothstep5(x - fx), ty = smoothstep5(y - fy);
  const double v00 = lattice(seed, ix, iy), v01 = lattice(seed, ix + 1, iy);
  const double v10 = lattice(seed, ix, iy + 1), v11 = lattice(seed, ix + 1, iy + 1);
  const double top = v00 + tx * (v01 - v00);
  const double bot = v10 + tx * (v11 - v10);
  return top + ty * (bot - top);
}

}  // namespace

double synth_texture(double x, double y, uint64_t seed, int octaves,
                     double base_cell) {
  double value = 0, amplitude = 1, total = 0, cell = base_cell;
  for (int o = 0; o < octaves; ++o) {
    value += amplitude * value_noise(x / cell, y / cell, seed + o);
    total += amplitude;
    amplitude *= 0.5;
    cell *= 0.5;
  }
  return value / total;
}

PlaneF render_texture(Index rows, Index cols, uint64_t seed, const AffineWarp& warp) {
  PlaneF out(rows, cols);
  for (Index y = 0; y < rows; ++y)
    for (Index x = 0; x < cols; ++x) {
      const Eigen::Vector2d p = warp(Eigen::Vector2d(x, y));
      out(y, x) = static_cast<float>(synth_texture(p.x(), p.y(), seed));
    }
  return out;
}

RgbImage render_texture_rgb(Index rows, Index cols, uint64_t seed,
                            const AffineWarp& warp) {
  RgbImage out(rows, cols);
  for (Index y = 0; y < rows; ++y)
    for (Index x = 0; x < cols; ++x) {
      const Eigen::Vector2d p = warp(Eigen::Vector2d(x, y));
      const double base = synth_texture(p.x(), p.y(), seed);
      for (int c = 0; c < 3; ++c) {
        const double tint = synth_texture(p.x(), p.y(), seed + 101 * (c + 1), 3, 96.0);
        out.ch[c](y, x) = static_cast<float>(0.65 * base + 0.35 * tint);
      }
    }
  return out;
}

PlaneF render_depth(Index rows, Index cols, uint64_t seed) {
  PlaneF out(rows, cols);
  for (Index y = 0; y < rows; ++y)
    for (Index x = 0; x < cols; ++x)
      out(y, x) = static_cast<float>(synth_texture(x, y, seed ^ 0xdeb7ULL, 2, 256.0));
  return out;
}

Burst synth_depth_blur_burst(const RgbImage& sharp, const PlaneF& depth,
                             int n_frames, double max_sigma) {
  require(n_frames >= 1, "need at least one frame");
  require(depth.rows() == sharp.rows() && depth.cols() == sharp.cols(),
          "depth map dimensions differ");

  // Blur stack at evenly spaced sigmas; per-pixel blur is interpolated
  // between the two nearest stack entries.
  constexpr int kStack = 9;
  std::array<std::vector<PlaneF>, 3> stack;
  for (int c = 0; c < 3; ++c) {
    stack[c].resize(kStack);
    stack[c][0] = sharp.ch[c];
    for (int j = 1; j < kStack; ++j)
      stack[c][j] = gaussian_blur(sharp.ch[c], max_sigma * j / (kStack - 1));
  }
  const double step = max_sigma / (kStack - 1);

  Burst burst;
  for (int i = 0; i < n_frames; ++i) {
    const double focus = (i + 0.5) / n_frames;
    RgbImage frame(sharp.rows(), sharp.cols());
    for (Index y = 0; y < sharp.rows(); ++y)
      for (Index x = 0; x < sharp.cols(); ++x) {
        const double sigma = max_sigma * std::abs(depth(y, x) - focus);
        const double fj = std::min(sigma / step, double(kStack - 1));
        const int j0 = static_cast<int>(fj);
        const int j1 = std::min(j0 + 1, kStack - 1);
        const double t = fj - j0;
        for (int c = 0; c < 3; ++c)
          frame.ch[c](y, x) = static_cast<float>((1 - t) * stack[c][j0](y, x) +
                                                 t * stack[c][j1](y, x));
      }
    burst.frames.push_back(std::move(frame));
    burst.frame_indices.push_back(i);
  }
  return burst;
}

}  // namespace fstack
