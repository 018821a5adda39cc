// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/raw.hpp"

#include "fstack/image_io.hpp"

#include <algorithm>
#include <cmath>

namespace fstack {

BayerPattern parse_pattern(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(), ::toupper);
  if (up == "RGGB") return BayerPattern::RGGB;
  if (up == "BGGR") return BayerPattern::BGGR;
  if (up == "GRBG") return BayerPattern::GRBG;
  if (up == "GBRG") return BayerPattern::GBRG;
  throw DataError("unknown Bayer pattern: " + name);
}

std::string pattern_name(BayerPattern p) {
  switch (p) {
    case BayerPattern::RGGB: return "RGGB";
    case BayerPattern::BGGR: return "BGGR";
    case BayerPattern::GRBG: return "GRBG";
    case BayerPattern::GBRG: return "GBRG";
  }
  return "RGGB";
}

std::array<std::pair<Index, Index>, 4> plane_offsets(BayerPattern p) {
  // (dx, dy) for R, G1 (R row), G2 (B row), B.
  switch (p) {
    case BayerPattern::RGGB: return {{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
    case BayerPattern::BGGR: return {{{1, 1}, {0, 1}, {1, 0}, {0, 0}}};
    case BayerPattern::GRBG: return {{{1, 0}, {0, 0}, {1, 1}, {0, 1}}};
    case BayerPattern::GBRG: return {{{0, 1}, {1, 1}, {0, 0}, {1, 0}}};
  }
  return {{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
}

void validate(const BayerFrame& frame) {
  if (frame.width <= 0 || frame.height <= 0)
    throw DataError("empty frame");
  if (frame.width % 2 != 0 || frame.height % 2 != 0)
    throw DataError("odd dimension: " + std::to_string(frame.width) + "x" +
                    std::to_string(frame.height));
  if (frame.black_level >= frame.white_level || frame.white_level > 65535 ||
      frame.black_level < 0)
    throw DataError("invalid levels: black " + std::to_string(frame.black_level) +
                    ", white " + std::to_string(frame.white_level));
  if (frame.samples.size() != static_cast<size_t>(frame.width) * frame.height)
    throw DataError("sample count does not match dimensions");
}

BayerFrame ingest_frame(const std::filesystem::path& path, const RawSidecar& sidecar) {
  Gray16 payload = read_gray16(path);
  if (payload.width != sidecar.width || payload.height != sidecar.height)
    throw DataError("dimension mismatch: payload " + std::to_string(payload.width) +
                    "x" + std::to_string(payload.height) + ", sidecar " +
                    std::to_string(sidecar.width) + "x" + std::to_string(sidecar.height));
  BayerFrame frame;
  frame.width = payload.width;
  frame.height = payload.height;
  frame.samples = std::move(payload.data);
  frame.pattern = sidecar.pattern;
  frame.black_level = sidecar.black_level;
  frame.white_level = sidecar.white_level;
  frame.frame_index = sidecar.frame_index;
  frame.iso = sidecar.iso;
  frame.lens = sidecar.lens;
  validate(frame);
  return frame;
}

PlaneF normalize_mosaic(const BayerFrame& frame) {
  validate(frame);
  PlaneF out(frame.height, frame.width);
  const float lo = static_cast<float>(frame.black_level);
  const float range = static_cast<float>(frame.white_level - frame.black_level);
  float* dst = out.data();
  for (size_t i = 0; i < frame.samples.size(); ++i) {
    float v = (frame.samples[i] - lo) / range;
    dst[i] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  }
  return out;
}

PlanarRaw pack_planes(const BayerFrame& frame) {
  PlaneF mosaic = normalize_mosaic(frame);
  PlanarRaw raw;
  raw.pattern = frame.pattern;
  const auto offs = plane_offsets(frame.pattern);
  const Index pr = frame.height / 2, pc = frame.width / 2;
  for (int c = 0; c < 4; ++c) {
    const auto [dx, dy] = offs[c];
    PlaneF plane(pr, pc);
    for (Index y = 0; y < pr; ++y)
      for (Index x = 0; x < pc; ++x) plane(y, x) = mosaic(2 * y + dy, 2 * x + dx);
    raw.planes[c] = std::move(plane);
  }
  return raw;
}

PlaneF unpack_planes(const PlanarRaw& raw) {
  const auto offs = plane_offsets(raw.pattern);
  const Index pr = raw.rows(), pc = raw.cols();
  PlaneF mosaic(2 * pr, 2 * pc);
  for (int c = 0; c < 4; ++c) {
    const auto [dx, dy] = offs[c];
    for (Index y = 0; y < pr; ++y)
      for (Index x = 0; x < pc; ++x) mosaic(2 * y + dy, 2 * x + dx) = raw.planes[c](y, x);
  }
  return mosaic;
}

namespace {

enum class Site { red, blue, green_in_red_row, green_in_blue_row };

inline Index clampi(Index v, Index lo, Index hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// Malvar-He-Cutler 5x5 kernels, all scaled by 1/8. Each evaluator reads the
// mosaic with edge replication.
struct MosaicView {
  const PlaneF& m;
  Index y, x;
  float operator()(Index dy, Index dx) const {
    return m(clampi(y + dy, 0, m.rows() - 1), clampi(x + dx, 0, m.cols() - 1));
  }
};

// Green at a red or blue site.
inline float green_at_rb(const MosaicView& p) {
  return (4.0f * p(0, 0) + 2.0f * (p(0, -1) + p(0, 1) + p(-1, 0) + p(1, 0)) -
          (p(0, -2) + p(0, 2) + p(-2, 0) + p(2, 0))) /
         8.0f;
}

// Red/blue at a green site whose same-color neighbors sit left and right.
inline float rb_at_g_horizontal(const MosaicView& p) {
  return (5.0f * p(0, 0) + 4.0f * (p(0, -1) + p(0, 1)) -
          (p(-1, -1) + p(-1, 1) + p(1, -1) + p(1, 1) + p(0, -2) + p(0, 2)) +
          0.5f * (p(-2, 0) + p(2, 0))) /
         8.0f;
}

// Same, neighbors above and below.
inline float rb_at_g_vertical(const MosaicView& p) {
  return (5.0f * p(0, 0) + 4.0f * (p(-1, 0) + p(1, 0)) -
          (p(-1, -1) + p(-1, 1) + p(1, -1) + p(1, 1) + p(-2, 0) + p(2, 0)) +
          0.5f * (p(0, -2) + p(0, 2))) /
         8.0f;
}

// Red at a blue site or blue at a red site (same-color diagonal neighbors).
inline float rb_at_opposite(const MosaicView& p) {
  return (6.0f * p(0, 0) + 2.0f * (p(-1, -1) + p(-1, 1) + p(1, -1) + p(1, 1)) -
          1.5f * (p(0, -2) + p(0, 2) + p(-2, 0) + p(2, 0))) /
         8.0f;
}

}  // namespace

RgbImage demosaic_mosaic(const PlaneF& mosaic, BayerPattern pattern) {
  const Index rows = mosaic.rows(), cols = mosaic.cols();
  if (rows % 2 != 0 || cols % 2 != 0) throw DataError("odd mosaic dimensions");
  const auto offs = plane_offsets(pattern);
  const auto [rx, ry] = offs[0];
  const auto [bx, by] = offs[3];

  Site site_of[2][2];
  site_of[ry][rx] = Site::red;
  site_of[by][bx] = Site::blue;
  site_of[ry][1 - rx] = Site::green_in_red_row;
  site_of[by][1 - bx] = Site::green_in_blue_row;

  RgbImage out(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      const MosaicView p{mosaic, y, x};
      float r, g, b;
      switch (site_of[y % 2][x % 2]) {
        case Site::red:
          r = p(0, 0);
          g = green_at_rb(p);
          b = rb_at_opposite(p);
          break;
        case Site::blue:
          b = p(0, 0);
          g = green_at_rb(p);
          r = rb_at_opposite(p);
          break;
        case Site::green_in_red_row:
          g = p(0, 0);
          r = rb_at_g_horizontal(p);
          b = rb_at_g_vertical(p);
          break;
        case Site::green_in_blue_row:
        default:
          g = p(0, 0);
          b = rb_at_g_horizontal(p);
          r = rb_at_g_vertical(p);
          break;
      }
      out.ch[0](y, x) = r;
      out.ch[1](y, x) = g;
      out.ch[2](y, x) = b;
    }
  }
  for (int c = 0; c < 3; ++c) out.ch[c] = clamp01(out.ch[c]);
  return out;
}

RgbImage demosaic(const BayerFrame& frame) {
  return demosaic_mosaic(normalize_mosaic(frame), frame.pattern);
}

BayerFrame denormalize_mosaic(const PlaneF& mosaic, const BayerFrame& like) {
  BayerFrame out = like;
  out.width = mosaic.cols();
  out.height = mosaic.rows();
  out.samples.resize(static_cast<size_t>(out.width) * out.height);
  const float lo = static_cast<float>(like.black_level);
  const float range = static_cast<float>(like.white_level - like.black_level);
  const float* src = mosaic.data();
  for (size_t i = 0; i < out.samples.size(); ++i) {
    float v = lo + src[i] * range;
    v = v < 0.0f ? 0.0f : (v > 65535.0f ? 65535.0f : v);
    out.samples[i] = static_cast<std::uint16_t>(std::lround(v));
  }
  return out;
}

PlaneF mosaic_from_rgb(const RgbImage& im, BayerPattern pattern) {
  const Index rows = im.rows(), cols = im.cols();
  if (rows % 2 != 0 || cols % 2 != 0) throw DataError("odd mosaic dimensions");
  const auto offs = plane_offsets(pattern);
  PlaneF mosaic(rows, cols);
  // channel feeding each 2x2 cell position: 0=R, 1=G, 2=B
  int ch_of[2][2];
  ch_of[offs[0].second][offs[0].first] = 0;
  ch_of[offs[1].second][offs[1].first] = 1;
  ch_of[offs[2].second][offs[2].first] = 1;
  ch_of[offs[3].second][offs[3].first] = 2;
  for (Index y = 0; y < rows; ++y)
    for (Index x = 0; x < cols; ++x) mosaic(y, x) = im.ch[ch_of[y % 2][x % 2]](y, x);
  return mosaic;
}

}  // namespace fstack
