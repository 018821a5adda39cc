// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fstack {

struct Burst {
  std::vector<RgbImage> frames;
  std::string lens;
  int iso = 0;
  std::vector<int> frame_indices;

  size_t size() const { return frames.size(); }
};

enum class SharpnessMeasure { contrast, variance };
enum class FusionMethod { pixel_contrast, pixel_variance, laplacian, wavelet };

FusionMethod parse_fusion_method(const std::string& name);
std::string fusion_method_name(FusionMethod m);

struct FusionConfig {
  FusionMethod method = FusionMethod::laplacian;
  int pyramid_levels = 5;
  int variance_radius = 4;
  int decision_smooth_radius = 2;
  int wavelet_levels = 4;
};

// Per-pixel selected frame index.
using DecisionMap = PlaneI;

// contrast = |3x3 Laplacian|; variance = sample variance of the (2r+1)^2
// window. Both nonnegative.
PlaneF sharpness_map(const PlaneF& luma, SharpnessMeasure measure, int radius);

// Box majority vote over labels in [0, num_labels); ties go to the lower label.
DecisionMap majority_filter(const DecisionMap& decision, int radius, int num_labels);

std::pair<RgbImage, DecisionMap> fuse_pixelwise(const Burst& burst,
                                                SharpnessMeasure measure,
                                                int radius, int smooth_radius);

RgbImage fuse_laplacian(const Burst& burst, int levels, int decision_smooth_radius);

RgbImage fuse_wavelet(const Burst& burst, int wavelet_levels, int consistency_radius);

RgbImage fuse(const Burst& burst, const FusionConfig& cfg);

}  // namespace fstack
