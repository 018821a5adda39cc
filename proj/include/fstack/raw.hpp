// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fstack {

enum class BayerPattern { RGGB, BGGR, GRBG, GBRG };

BayerPattern parse_pattern(const std::string& name);
std::string pattern_name(BayerPattern p);

/// Metadata sidecar accompanying a raw mosaic payload.
struct RawSidecar {
  Index width = 0;
  Index height = 0;
  BayerPattern pattern = BayerPattern::RGGB;
  int black_level = 0;
  int white_level = 0;
  int frame_index = 0;
  int iso = 0;
  std::string lens;
};

/// One raw mosaic frame. Samples are stored untouched; normalization
/// happens when the frame is packed or demosaiced.
struct BayerFrame {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint16_t> samples;  // row-major, width*height
  BayerPattern pattern = BayerPattern::RGGB;
  int black_level = 0;
  int white_level = 0;
  int frame_index = 0;
  int iso = 0;
  std::string lens;

  std::uint16_t at(Index y, Index x) const { return samples[y * width + x]; }
};

/// Half-resolution 4-plane view of a mosaic, values normalized to [0, 1].
/// Plane order is fixed (R, G1, G2, B): G1 shares a row with R, G2 with B.
struct PlanarRaw {
  std::array<PlaneF, 4> planes;
  BayerPattern pattern = BayerPattern::RGGB;

  Index rows() const { return planes[0].rows(); }
  Index cols() const { return planes[0].cols(); }
};

/// (dx, dy) mosaic offset of each plane (R, G1, G2, B) within a 2x2 cell.
std::array<std::pair<Index, Index>, 4> plane_offsets(BayerPattern p);

/// Validates invariants: even dimensions, sample count, level ordering.
void validate(const BayerFrame& frame);

/// Reads a 16-bit PGM or PNG payload and binds it to its sidecar.
BayerFrame ingest_frame(const std::filesystem::path& path, const RawSidecar& sidecar);

/// Normalized full-resolution mosaic: (s - black) / (white - black), clamped.
PlaneF normalize_mosaic(const BayerFrame& frame);

PlanarRaw pack_planes(const BayerFrame& frame);

/// Inverse of pack_planes on normalized values.
PlaneF unpack_planes(const PlanarRaw& raw);

/// Malvar-He-Cutler 5x5 linear demosaic on a normalized mosaic.
/// Border handled by 2-pixel edge replication; output clamped to [0, 1].
RgbImage demosaic_mosaic(const PlaneF& mosaic, BayerPattern pattern);

RgbImage demosaic(const BayerFrame& frame);

/// Re-mosaics an RGB image under the given pattern (test fixtures and
/// synthetic bursts).
PlaneF mosaic_from_rgb(const RgbImage& im, BayerPattern pattern);

/// Maps normalized values back to sensor counts under `like`'s levels and
/// metadata, rounding to the nearest code.
BayerFrame denormalize_mosaic(const PlaneF& mosaic, const BayerFrame& like);

}  // namespace fstack
