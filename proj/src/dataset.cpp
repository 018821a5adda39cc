// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/dataset.hpp"

#include "fstack/image_io.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>

namespace fstack {

std::vector<CropRect> grid_crops(Index width, Index height, Index size) {
  require(size > 0 && size % 2 == 0, "crop size must be positive and even");
  std::vector<CropRect> rects;
  if (size > width || size > height) return rects;
  const Index nx = width / size, ny = height / size;
  rects.reserve(nx * ny);
  for (Index gy = 0; gy < ny; ++gy)
    for (Index gx = 0; gx < nx; ++gx)
      rects.push_back({gx * size, gy * size, size});
  return rects;
}

AugmentOp compose(AugmentOp a, AugmentOp b) {
  AugmentOp c;
  c.hflip = a.hflip != b.hflip;
  const int ka = b.hflip ? (4 - a.rot90) % 4 : a.rot90;
  c.rot90 = (b.rot90 + ka) % 4;
  return c;
}

PlaneF dihedral(const PlaneF& plane, AugmentOp op) {
  const Index r = plane.rows(), c = plane.cols();
  PlaneF out;
  switch (op.rot90 & 3) {
    case 0: out = plane; break;
    case 1:
      out.resize(c, r);
      for (Index i = 0; i < c; ++i)
        for (Index j = 0; j < r; ++j) out(i, j) = plane(j, c - 1 - i);
      break;
    case 2:
      out.resize(r, c);
      for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) out(i, j) = plane(r - 1 - i, c - 1 - j);
      break;
    case 3:
      out.resize(c, r);
      for (Index i = 0; i < c; ++i)
        for (Index j = 0; j < r; ++j) out(i, j) = plane(r - 1 - j, i);
      break;
  }
  if (op.hflip) out = out.rowwise().reverse().eval();
  return out;
}

namespace {

void check_rotatable(Index rows, Index cols, AugmentOp op) {
  if (op.rot90 % 2 == 1 && rows != cols)
    throw DataError("quarter-turn rotation needs a square crop");
}

// Source-plane index (R, G1, G2, B order) for each of the eight ops on an
// RGGB planar, indexed rot90 + 4 * hflip. Asserted against the
// pack/unpack oracle in the tests.
constexpr int kRggbPlanePerm[8][4] = {
    {0, 1, 2, 3}, {1, 3, 0, 2}, {3, 2, 1, 0}, {2, 0, 3, 1},
    {1, 0, 3, 2}, {3, 1, 2, 0}, {2, 3, 0, 1}, {0, 2, 1, 3},
};

}  // namespace

RgbImage augment(const RgbImage& crop, AugmentOp op) {
  check_rotatable(crop.rows(), crop.cols(), op);
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.ch[c] = dihedral(crop.ch[c], op);
  return out;
}

PlanarRaw augment(const PlanarRaw& crop, AugmentOp op) {
  check_rotatable(crop.rows(), crop.cols(), op);
  if (crop.pattern == BayerPattern::RGGB) {
    const int* perm = kRggbPlanePerm[(op.rot90 & 3) + (op.hflip ? 4 : 0)];
    PlanarRaw out;
    out.pattern = crop.pattern;
    for (int i = 0; i < 4; ++i) out.planes[i] = dihedral(crop.planes[perm[i]], op);
    return out;
  }
  // Other patterns take the definitional route through the mosaic.
  PlaneF mosaic = dihedral(unpack_planes(crop), op);
  PlanarRaw out;
  out.pattern = crop.pattern;
  const auto offs = plane_offsets(crop.pattern);
  const Index pr = mosaic.rows() / 2, pc = mosaic.cols() / 2;
  for (int c = 0; c < 4; ++c) {
    const auto [dx, dy] = offs[c];
    PlaneF plane(pr, pc);
    for (Index y = 0; y < pr; ++y)
      for (Index x = 0; x < pc; ++x) plane(y, x) = mosaic(2 * y + dy, 2 * x + dx);
    out.planes[c] = std::move(plane);
  }
  return out;
}

std::string sha256_bytes(const void* data, size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr) != 1)
    throw DataError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return sha256_bytes(bytes.data(), bytes.size());
}

std::map<std::string, std::string> split_manifest(
    const std::vector<std::pair<std::string, std::string>>& burst_id_lens,
    const std::map<std::string, SplitCounts>& counts, uint64_t seed) {
  std::map<std::string, std::string> assignment;
  uint64_t lens_stream = 0;
  for (const auto& [lens, c] : counts) {
    std::vector<std::string> ids;
    for (const auto& [id, l] : burst_id_lens)
      if (l == lens) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    if (static_cast<size_t>(c.train) + c.test > ids.size())
      throw DataError("insufficient bursts for lens " + lens + ": need " +
                      std::to_string(c.train + c.test) + ", have " +
                      std::to_string(ids.size()));
    Rng rng = make_rng(seed, ++lens_stream);
    for (size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[rng() % i]);
    for (int i = 0; i < c.train; ++i) assignment[ids[i]] = "train";
    for (int i = 0; i < c.test; ++i) assignment[ids[c.train + i]] = "test";
  }
  return assignment;
}

namespace {

Rgb16 quantize_crop(const RgbImage& im, const CropRect& r) {
  Rgb16 out;
  out.width = r.size;
  out.height = r.size;
  out.data.resize(static_cast<size_t>(r.size) * r.size * 3);
  size_t i = 0;
  for (Index y = 0; y < r.size; ++y)
    for (Index x = 0; x < r.size; ++x)
      for (int c = 0; c < 3; ++c)
        out.data[i++] = quantize16(im.ch[c](r.y + y, r.x + x));
  return out;
}

void check_rects(const std::vector<CropRect>& rects, Index w, Index h) {
  for (const auto& r : rects) {
    require(r.x >= 0 && r.y >= 0 && r.x + r.size <= w && r.y + r.size <= h,
            "crop rect out of bounds");
    require(r.x % 2 == 0 && r.y % 2 == 0 && r.size % 2 == 0,
            "crop rect not Bayer-cell aligned");
  }
}

}  // namespace

BurstManifest build_crop_dataset(const Burst& burst, const RgbImage& ground_truth,
                                 const std::vector<CropRect>& rects,
                                 const std::filesystem::path& out_dir,
                                 const std::string& burst_id) {
  require(!burst.frames.empty(), "empty burst");
  require(ground_truth.rows() == burst.frames[0].rows() &&
              ground_truth.cols() == burst.frames[0].cols(),
          "ground truth dimensions differ from burst");
  check_rects(rects, ground_truth.cols(), ground_truth.rows());

  BurstManifest bm;
  bm.id = burst_id;
  bm.lens = burst.lens;
  for (const auto& rect : rects) {
    const std::string stem =
        burst_id + "/x" + std::to_string(rect.x) + "_y" + std::to_string(rect.y);
    std::filesystem::create_directories(out_dir / stem);
    CropRecord rec;
    rec.rect = rect;
    for (size_t f = 0; f < burst.frames.size(); ++f) {
      const std::string rel = stem + "/f" + std::to_string(f) + ".png";
      write_png16(out_dir / rel, quantize_crop(burst.frames[f], rect));
      rec.frames.push_back(rel);
      rec.sha256.push_back(sha256_file(out_dir / rel));
    }
    rec.gt = stem + "/gt.png";
    write_png16(out_dir / rec.gt, quantize_crop(ground_truth, rect));
    rec.sha256.push_back(sha256_file(out_dir / rec.gt));
    bm.crops.push_back(std::move(rec));
  }
  return bm;
}

BurstManifest build_crop_dataset_raw(const std::vector<PlanarRaw>& frames,
                                     const RgbImage& ground_truth,
                                     const std::vector<CropRect>& rects,
                                     const std::filesystem::path& out_dir,
                                     const std::string& burst_id) {
  require(!frames.empty(), "empty burst");
  require(ground_truth.rows() == 2 * frames[0].rows() &&
              ground_truth.cols() == 2 * frames[0].cols(),
          "ground truth dimensions differ from burst");
  check_rects(rects, ground_truth.cols(), ground_truth.rows());

  BurstManifest bm;
  bm.id = burst_id;
  for (const auto& rect : rects) {
    const std::string stem =
        burst_id + "/x" + std::to_string(rect.x) + "_y" + std::to_string(rect.y);
    std::filesystem::create_directories(out_dir / stem);
    CropRecord rec;
    rec.rect = rect;
    const Index half = rect.size / 2;
    for (size_t f = 0; f < frames.size(); ++f) {
      Gray16 stacked;
      stacked.width = half;
      stacked.height = 4 * half;
      stacked.data.resize(static_cast<size_t>(stacked.width) * stacked.height);
      size_t i = 0;
      for (int p = 0; p < 4; ++p)
        for (Index y = 0; y < half; ++y)
          for (Index x = 0; x < half; ++x)
            stacked.data[i++] =
                quantize16(frames[f].planes[p](rect.y / 2 + y, rect.x / 2 + x));
      const std::string rel = stem + "/f" + std::to_string(f) + "_raw.png";
      write_png16(out_dir / rel, stacked);
      rec.frames.push_back(rel);
      rec.sha256.push_back(sha256_file(out_dir / rel));
    }
    rec.gt = stem + "/gt.png";
    write_png16(out_dir / rec.gt, quantize_crop(ground_truth, rect));
    rec.sha256.push_back(sha256_file(out_dir / rec.gt));
    bm.crops.push_back(std::move(rec));
  }
  return bm;
}

void save_manifest(const std::filesystem::path& path, const CropManifest& manifest) {
  nlohmann::json root;
  root["seed"] = manifest.seed;
  root["crop_size"] = manifest.crop_size;
  auto& bursts = root["bursts"] = nlohmann::json::array();
  for (const auto& bm : manifest.bursts) {
    nlohmann::json b;
    b["id"] = bm.id;
    b["lens"] = bm.lens;
    b["split"] = bm.split;
    auto& crops = b["crops"] = nlohmann::json::array();
    for (const auto& rec : bm.crops) {
      crops.push_back({{"x", rec.rect.x},
                       {"y", rec.rect.y},
                       {"size", rec.rect.size},
                       {"frames", rec.frames},
                       {"gt", rec.gt},
                       {"sha256", rec.sha256}});
    }
    bursts.push_back(std::move(b));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << root.dump(2) << "\n";
}

CropManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json root;
  try {
    in >> root;
    CropManifest manifest;
    manifest.seed = root.at("seed").get<uint64_t>();
    manifest.crop_size = root.at("crop_size").get<Index>();
    for (const auto& b : root.at("bursts")) {
      BurstManifest bm;
      bm.id = b.at("id").get<std::string>();
      bm.lens = b.at("lens").get<std::string>();
      bm.split = b.at("split").get<std::string>();
      for (const auto& c : b.at("crops")) {
        CropRecord rec;
        rec.rect = {c.at("x").get<Index>(), c.at("y").get<Index>(),
                    c.at("size").get<Index>()};
        rec.frames = c.at("frames").get<std::vector<std::string>>();
        rec.gt = c.at("gt").get<std::string>();
        rec.sha256 = c.at("sha256").get<std::vector<std::string>>();
        bm.crops.push_back(std::move(rec));
      }
      manifest.bursts.push_back(std::move(bm));
    }
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace fstack
