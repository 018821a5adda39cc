// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/fuse.hpp"

#include "fstack/filters.hpp"
#include "fstack/pyramid.hpp"
#include "fstack/wavelet.hpp"

#include <algorithm>

namespace fstack {

namespace {

void check_burst(const Burst& burst) {
  require(!burst.frames.empty(), "empty burst");
  for (const auto& f : burst.frames)
    require(f.rows() == burst.frames[0].rows() && f.cols() == burst.frames[0].cols(),
            "burst frames differ in size");
}

// Argmax across score planes, ties toward the lower index.
DecisionMap argmax_decision(const std::vector<PlaneF>& scores) {
  const Index rows = scores[0].rows(), cols = scores[0].cols();
  DecisionMap dec = DecisionMap::Zero(rows, cols);
  PlaneF best = scores[0];
  for (size_t i = 1; i < scores.size(); ++i) {
    const PlaneF& s = scores[i];
    for (Index y = 0; y < rows; ++y)
      for (Index x = 0; x < cols; ++x)
        if (s(y, x) > best(y, x)) {
          best(y, x) = s(y, x);
          dec(y, x) = static_cast<int>(i);
        }
  }
  return dec;
}

template <typename Mat>
Mat gather(const std::vector<Mat>& sources, const DecisionMap& dec) {
  Mat out(dec.rows(), dec.cols());
  for (Index y = 0; y < dec.rows(); ++y)
    for (Index x = 0; x < dec.cols(); ++x) out(y, x) = sources[dec(y, x)](y, x);
  return out;
}

}  // namespace

FusionMethod parse_fusion_method(const std::string& name) {
  if (name == "pixel_contrast") return FusionMethod::pixel_contrast;
  if (name == "pixel_variance") return FusionMethod::pixel_variance;
  if (name == "laplacian") return FusionMethod::laplacian;
  if (name == "wavelet") return FusionMethod::wavelet;
  throw ConfigError("unknown fusion method: " + name);
}

std::string fusion_method_name(FusionMethod m) {
  switch (m) {
    case FusionMethod::pixel_contrast: return "pixel_contrast";
    case FusionMethod::pixel_variance: return "pixel_variance";
    case FusionMethod::laplacian: return "laplacian";
    case FusionMethod::wavelet: return "wavelet";
  }
  return "laplacian";
}

PlaneF sharpness_map(const PlaneF& luma, SharpnessMeasure measure, int radius) {
  if (measure == SharpnessMeasure::contrast) return laplacian3(luma).abs();
  require(radius >= 1, "variance radius must be >= 1");
  require(std::min(luma.rows(), luma.cols()) >= 2 * Index{radius} + 1,
          "image smaller than the variance window");
  PlaneF mean = box_mean(luma, radius);
  PlaneF mean_sq = box_mean(luma * luma, radius);
  return (mean_sq - mean * mean).max(PlaneF::Zero(luma.rows(), luma.cols()));
}

DecisionMap majority_filter(const DecisionMap& decision, int radius, int num_labels) {
  if (radius <= 0 || num_labels <= 1) return decision;
  const Index rows = decision.rows(), cols = decision.cols();
  DecisionMap out = DecisionMap::Zero(rows, cols);
  PlaneF best = PlaneF::Constant(rows, cols, -1.0f);
  for (int label = 0; label < num_labels; ++label) {
    PlaneF indicator = (decision == label).cast<float>();
    PlaneF count = box_sum(indicator, radius);
    for (Index y = 0; y < rows; ++y)
      for (Index x = 0; x < cols; ++x)
        if (count(y, x) > best(y, x)) {
          best(y, x) = count(y, x);
          out(y, x) = label;
        }
  }
  return out;
}

std::pair<RgbImage, DecisionMap> fuse_pixelwise(const Burst& burst,
                                                SharpnessMeasure measure,
                                                int radius, int smooth_radius) {
  check_burst(burst);
  const size_t n = burst.size();
  std::vector<PlaneF> scores(n);
  for (size_t i = 0; i < n; ++i)
    scores[i] = sharpness_map(luma(burst.frames[i]), measure, radius);
  DecisionMap dec = argmax_decision(scores);
  dec = majority_filter(dec, smooth_radius, static_cast<int>(n));

  RgbImage out(burst.frames[0].rows(), burst.frames[0].cols());
  for (Index y = 0; y < dec.rows(); ++y)
    for (Index x = 0; x < dec.cols(); ++x) {
      const RgbImage& f = burst.frames[dec(y, x)];
      out.ch[0](y, x) = f.ch[0](y, x);
      out.ch[1](y, x) = f.ch[1](y, x);
      out.ch[2](y, x) = f.ch[2](y, x);
    }
  return {std::move(out), std::move(dec)};
}

RgbImage fuse_laplacian(const Burst& burst, int levels, int decision_smooth_radius) {
  check_burst(burst);
  const size_t n = burst.size();
  const int nlab = static_cast<int>(n);

  std::vector<LaplacianPyramid> lumas(n);
  std::vector<std::array<LaplacianPyramid, 3>> chans(n);
  for (size_t i = 0; i < n; ++i) {
    lumas[i] = build_laplacian_pyramid(luma(burst.frames[i]), levels);
    for (int c = 0; c < 3; ++c)
      chans[i][c] = build_laplacian_pyramid(burst.frames[i].ch[c], levels);
  }

  std::array<LaplacianPyramid, 3> fused;
  for (int c = 0; c < 3; ++c) fused[c].resize(levels);

  std::vector<PlaneF> scores(n), band(n);
  for (int k = 0; k + 1 < levels; ++k) {
    for (size_t i = 0; i < n; ++i) scores[i] = lumas[i][k].abs();
    DecisionMap dec = argmax_decision(scores);
    dec = majority_filter(dec, decision_smooth_radius, nlab);
    for (int c = 0; c < 3; ++c) {
      for (size_t i = 0; i < n; ++i) band[i] = chans[i][c][k];
      fused[c][k] = gather(band, dec);
    }
  }
  for (int c = 0; c < 3; ++c) {
    PlaneF residual = chans[0][c][levels - 1];
    for (size_t i = 1; i < n; ++i) residual += chans[i][c][levels - 1];
    fused[c][levels - 1] = residual / static_cast<float>(n);
  }

  RgbImage out;
  for (int c = 0; c < 3; ++c)
    out.ch[c] = clamp01(collapse_laplacian_pyramid(fused[c]));
  return out;
}

RgbImage fuse_wavelet(const Burst& burst, int wavelet_levels, int consistency_radius) {
  check_burst(burst);
  const size_t n = burst.size();
  const int nlab = static_cast<int>(n);

  std::vector<CdwPyramid> lumas(n);
  std::vector<std::array<CdwPyramid, 3>> chans(n);
  for (size_t i = 0; i < n; ++i) {
    lumas[i] = cdw_forward(luma(burst.frames[i]), wavelet_levels);
    for (int c = 0; c < 3; ++c)
      chans[i][c] = cdw_forward(burst.frames[i].ch[c], wavelet_levels);
  }

  std::array<CdwPyramid, 3> fused;
  for (int c = 0; c < 3; ++c) {
    fused[c].levels.resize(wavelet_levels);
    fused[c].orig_rows = lumas[0].orig_rows;
    fused[c].orig_cols = lumas[0].orig_cols;
  }

  // One decision per level, from the pooled modulus of the three detail
  // bands. A shared decision keeps the selected coefficients coherent across
  // orientations, which limits the imaginary residue that coefficient mixing
  // leaves behind after the real-part projection.
  std::vector<PlaneF> scores(n);
  std::vector<ComplexMat> band_src(n);
  for (int l = 0; l < wavelet_levels; ++l) {
    for (size_t i = 0; i < n; ++i) {
      const CdwLevel& lv = lumas[i].levels[l];
      PlaneF s(lv.lh.rows(), lv.lh.cols());
      for (Index y = 0; y < s.rows(); ++y)
        for (Index x = 0; x < s.cols(); ++x)
          s(y, x) = static_cast<float>(std::norm(lv.lh(y, x)) + std::norm(lv.hl(y, x)) +
                                       std::norm(lv.hh(y, x)));
      scores[i] = std::move(s);
    }
    DecisionMap dec = argmax_decision(scores);
    dec = majority_filter(dec, consistency_radius, nlab);
    for (int c = 0; c < 3; ++c) {
      for (auto band : {&CdwLevel::lh, &CdwLevel::hl, &CdwLevel::hh}) {
        for (size_t i = 0; i < n; ++i) band_src[i] = chans[i][c].levels[l].*band;
        fused[c].levels[l].*band = gather(band_src, dec);
      }
    }
    // The approximation band still carries defocus at the 2^levels scale, so
    // averaging it would leak blur from the unfocused frames into the result.
    // It shares the coarsest level's shape and decision.
    if (l == wavelet_levels - 1) {
      for (int c = 0; c < 3; ++c) {
        for (size_t i = 0; i < n; ++i) band_src[i] = chans[i][c].approx;
        fused[c].approx = gather(band_src, dec);
      }
    }
  }

  RgbImage out;
  for (int c = 0; c < 3; ++c) out.ch[c] = clamp01(cdw_inverse(fused[c]));
  return out;
}

RgbImage fuse(const Burst& burst, const FusionConfig& cfg) {
  switch (cfg.method) {
    case FusionMethod::pixel_contrast:
      return fuse_pixelwise(burst, SharpnessMeasure::contrast, 1,
                            cfg.decision_smooth_radius)
          .first;
    case FusionMethod::pixel_variance:
      return fuse_pixelwise(burst, SharpnessMeasure::variance, cfg.variance_radius,
                            cfg.decision_smooth_radius)
          .first;
    case FusionMethod::laplacian:
      return fuse_laplacian(burst, cfg.pyramid_levels, cfg.decision_smooth_radius);
    case FusionMethod::wavelet:
      return fuse_wavelet(burst, cfg.wavelet_levels, cfg.decision_smooth_radius);
  }
  throw ConfigError("unknown fusion method");
}

}  // namespace fstack
