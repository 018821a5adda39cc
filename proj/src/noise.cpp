// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/noise.hpp"

#include <cmath>

namespace fstack {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_rng(uint64_t seed, uint64_t stream) {
  uint64_t z = splitmix64(seed);
  z = splitmix64(z ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  return Rng(z);
}

NoiseParams sample_noise_params(Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(0.0001), std::log(0.012));
  const double log_shot = u(rng);
  std::normal_distribution<double> g(2.18 * log_shot + 1.2, 0.26);
  NoiseParams p;
  p.lambda_shot = std::exp(log_shot);
  p.lambda_read = std::exp(g(rng));
  return p;
}

PlaneF add_noise(const PlaneF& image, const NoiseParams& params, Rng& rng,
                 bool clamp) {
  require(params.lambda_shot >= 0 && params.lambda_read >= 0,
          "noise variances must be nonnegative");
  if (params.lambda_shot == 0 && params.lambda_read == 0) return image;
  std::normal_distribution<double> n01(0.0, 1.0);
  PlaneF out(image.rows(), image.cols());
  const float* src = image.data();
  float* dst = out.data();
  const size_t count = static_cast<size_t>(image.size());
  for (size_t i = 0; i < count; ++i) {
    const double x = src[i];
    double y = x + std::sqrt(params.lambda_read + params.lambda_shot * x) * n01(rng);
    if (clamp) y = y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
    dst[i] = static_cast<float>(y);
  }
  return out;
}

RgbImage add_noise(const RgbImage& image, const NoiseParams& params, Rng& rng) {
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.ch[c] = add_noise(image.ch[c], params, rng);
  return out;
}

PlanarRaw add_noise(const PlanarRaw& image, const NoiseParams& params, Rng& rng) {
  PlanarRaw out;
  out.pattern = image.pattern;
  for (int c = 0; c < 4; ++c) out.planes[c] = add_noise(image.planes[c], params, rng);
  return out;
}

}  // namespace fstack
