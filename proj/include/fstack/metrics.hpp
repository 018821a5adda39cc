// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fstack {

// Pooled-RGB mean squared error in dB over the interior left after dropping
// ignore_border pixels on every side. Identical inputs give +infinity
// (serialized as the string "inf").
double psnr(const RgbImage& a, const RgbImage& b, double peak = 1.0,
            int ignore_border = 0);

// Single-scale SSIM, 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// dynamic range 1. Averaged over the three channels and over every position
// where the window fits inside the border-cropped interior.
double ssim(const RgbImage& a, const RgbImage& b, int ignore_border = 0);

struct QualityItem {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct QualityReport {
  int ignore_border = 4;
  std::vector<QualityItem> items;  // sorted by id
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

QualityReport evaluate(const std::vector<std::pair<std::string, RgbImage>>& outputs,
                       const std::vector<std::pair<std::string, RgbImage>>& ground_truths,
                       int ignore_border = 4);

void save_report(const std::filesystem::path& path, const QualityReport& report);
QualityReport load_report(const std::filesystem::path& path);

}  // namespace fstack
