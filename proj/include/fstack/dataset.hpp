// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/fuse.hpp"
#include "fstack/image.hpp"
#include "fstack/noise.hpp"
#include "fstack/raw.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fstack {

struct CropRect {
  Index x = 0, y = 0;  // top-left, full-resolution pixels, Bayer-cell aligned
  Index size = 128;
};

// Non-overlapping row-major grid anchored at (0,0); right/bottom remainders
// are dropped. A size larger than the image gives an empty list.
std::vector<CropRect> grid_crops(Index width, Index height, Index size);

// Rotation in counterclockwise quarter turns applied first, then an optional
// horizontal flip. The eight combinations enumerate the dihedral group.
struct AugmentOp {
  int rot90 = 0;  // 0..3
  bool hflip = false;
};

// c = compose(a, b) satisfies augment(x, c) == augment(augment(x, b), a).
AugmentOp compose(AugmentOp a, AugmentOp b);

PlaneF dihedral(const PlaneF& plane, AugmentOp op);
RgbImage augment(const RgbImage& crop, AugmentOp op);

// Plane contents are transformed and the planes permuted so that the result
// equals pack(dihedral(unpack(input))) under the input's own pattern tag.
PlanarRaw augment(const PlanarRaw& crop, AugmentOp op);

std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const void* data, size_t size);

struct SplitCounts {
  int train = 0;
  int test = 0;
};

// Seeded per-lens shuffle; the first `train` bursts of each lens go to train,
// the next `test` to test, any remainder is left unassigned.
std::map<std::string, std::string> split_manifest(
    const std::vector<std::pair<std::string, std::string>>& burst_id_lens,
    const std::map<std::string, SplitCounts>& counts, uint64_t seed);

struct CropRecord {
  CropRect rect;
  std::vector<std::string> frames;  // paths relative to the manifest
  std::string gt;
  std::vector<std::string> sha256;  // one per frame, ground truth last
};

struct BurstManifest {
  std::string id;
  std::string lens;
  std::string split = "train";
  std::vector<CropRecord> crops;
};

struct CropManifest {
  uint64_t seed = 0;
  Index crop_size = 128;
  std::vector<BurstManifest> bursts;
};

// Writes one 16-bit PNG per frame per rect plus a ground-truth crop, checksums
// every file, and returns the per-burst manifest block. Crops are byte-exact
// copies of the (quantized) source region.
BurstManifest build_crop_dataset(const Burst& burst, const RgbImage& ground_truth,
                                 const std::vector<CropRect>& rects,
                                 const std::filesystem::path& out_dir,
                                 const std::string& burst_id);

// Raw variant: a full-resolution rect (x, y, s) maps to the plane rect
// (x/2, y/2, s/2); the four plane crops are stacked vertically (R, G1, G2, B)
// in a single 16-bit grayscale PNG.
BurstManifest build_crop_dataset_raw(const std::vector<PlanarRaw>& frames,
                                     const RgbImage& ground_truth,
                                     const std::vector<CropRect>& rects,
                                     const std::filesystem::path& out_dir,
                                     const std::string& burst_id);

void save_manifest(const std::filesystem::path& path, const CropManifest& manifest);
CropManifest load_manifest(const std::filesystem::path& path);

}  // namespace fstack
