// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/raw.hpp"

#include "fstack/image_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

using namespace fstack;
namespace fs = std::filesystem;

namespace {

BayerFrame random_frame(Index w, Index h, BayerPattern pat, uint64_t seed) {
  BayerFrame f;
  f.width = w;
  f.height = h;
  f.pattern = pat;
  f.black_level = 256;
  f.white_level = 4095;
  f.samples.resize(size_t(w) * h);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(f.black_level, f.white_level);
  for (auto& s : f.samples) s = uint16_t(u(rng));
  return f;
}

}  // namespace

TEST_CASE("pattern names round-trip") {
  for (auto pat : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG,
                   BayerPattern::GBRG})
    CHECK(parse_pattern(pattern_name(pat)) == pat);
  CHECK_THROWS_AS(parse_pattern("xyzw"), DataError);
}

TEST_CASE("plane offsets follow the fixed R, G1, G2, B order") {
  // G1 shares a row with R, G2 with B
  auto off = plane_offsets(BayerPattern::RGGB);
  CHECK(off[0] == std::pair<Index, Index>{0, 0});
  CHECK(off[1] == std::pair<Index, Index>{1, 0});
  CHECK(off[2] == std::pair<Index, Index>{0, 1});
  CHECK(off[3] == std::pair<Index, Index>{1, 1});
  off = plane_offsets(BayerPattern::BGGR);
  CHECK(off[0] == std::pair<Index, Index>{1, 1});
  CHECK(off[1] == std::pair<Index, Index>{0, 1});
  CHECK(off[2] == std::pair<Index, Index>{1, 0});
  CHECK(off[3] == std::pair<Index, Index>{0, 0});
  off = plane_offsets(BayerPattern::GRBG);
  CHECK(off[0] == std::pair<Index, Index>{1, 0});
  CHECK(off[1] == std::pair<Index, Index>{0, 0});
  CHECK(off[2] == std::pair<Index, Index>{1, 1});
  CHECK(off[3] == std::pair<Index, Index>{0, 1});
  off = plane_offsets(BayerPattern::GBRG);
  CHECK(off[0] == std::pair<Index, Index>{0, 1});
  CHECK(off[1] == std::pair<Index, Index>{1, 1});
  CHECK(off[2] == std::pair<Index, Index>{0, 0});
  CHECK(off[3] == std::pair<Index, Index>{1, 0});
}

TEST_CASE("validation rejects malformed frames") {
  BayerFrame f = random_frame(8, 6, BayerPattern::RGGB, 1);
  CHECK_NOTHROW(validate(f));

  BayerFrame odd = f;
  odd.width = 7;
  odd.samples.resize(7 * 6);
  CHECK_THROWS_AS(validate(odd), DataError);

  BayerFrame levels = f;
  levels.white_level = levels.black_level;
  CHECK_THROWS_AS(validate(levels), DataError);

  BayerFrame count = f;
  count.samples.pop_back();
  CHECK_THROWS_AS(validate(count), DataError);
}

TEST_CASE("normalization is exact over the black..white range") {
  const BayerFrame f = random_frame(16, 12, BayerPattern::RGGB, 2);
  const PlaneF m = normalize_mosaic(f);
  CHECK(m.minCoeff() >= 0.0f);
  CHECK(m.maxCoeff() <= 1.0f);
  const BayerFrame back = denormalize_mosaic(m, f);
  for (size_t i = 0; i < f.samples.size(); ++i) CHECK(back.samples[i] == f.samples[i]);
  CHECK(back.pattern == f.pattern);
  CHECK(back.black_level == f.black_level);

  // end points
  PlaneF ends(2, 2);
  ends << 0.0f, 1.0f, 0.5f, 0.25f;
  BayerFrame like = random_frame(2, 2, BayerPattern::RGGB, 3);
  const BayerFrame q = denormalize_mosaic(ends, like);
  CHECK(q.samples[0] == 256);
  CHECK(q.samples[1] == 4095);
}

TEST_CASE("pack and unpack planes round-trip on every pattern") {
  for (auto pat : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG,
                   BayerPattern::GBRG}) {
    const BayerFrame f = random_frame(10, 8, pat, 4);
    const PlanarRaw p = pack_planes(f);
    CHECK(p.planes[0].rows() == 4);
    CHECK(p.planes[0].cols() == 5);

    // each plane reads the mosaic at its (dx, dy) site
    const PlaneF m = normalize_mosaic(f);
    const auto off = plane_offsets(pat);
    for (int i = 0; i < 4; ++i)
      for (Index y = 0; y < 4; ++y)
        for (Index x = 0; x < 5; ++x)
          CHECK(p.planes[i](y, x) == m(2 * y + off[i].second, 2 * x + off[i].first));

    const PlaneF back = unpack_planes(p);
    CHECK((back == m).all());
  }
}

TEST_CASE("demosaic reproduces a linear ramp exactly in the interior") {
  // a scene whose three channels agree on one affine function is invariant
  // under every kernel in the interpolator
  const Index w = 32, h = 24;
  BayerFrame f;
  f.width = w;
  f.height = h;
  f.pattern = BayerPattern::GRBG;
  f.black_level = 0;
  f.white_level = 40960;  // headroom so the ramp stays in range
  f.samples.resize(size_t(w) * h);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      f.samples[y * w + x] = uint16_t(100 * x + 60 * y + 5000);

  const RgbImage rgb = demosaic(f);
  const double range = 40960.0;
  for (int c = 0; c < 3; ++c)
    for (Index y = 2; y < h - 2; ++y)
      for (Index x = 2; x < w - 2; ++x) {
        const double want = (100.0 * x + 60.0 * y + 5000.0) / range;
        CHECK(rgb.ch[c](y, x) == doctest::Approx(want).epsilon(1e-5));
      }
}

TEST_CASE("demosaic keeps each measured sample at its own site") {
  for (auto pat : {BayerPattern::RGGB, BayerPattern::BGGR}) {
    const BayerFrame f = random_frame(16, 16, pat, 5);
    const RgbImage rgb = demosaic(f);
    const PlaneF m = normalize_mosaic(f);
    const PlaneF back = mosaic_from_rgb(rgb, pat);
    CHECK(((back - m).abs() < 1e-6f).all());
  }
}

TEST_CASE("demosaic of a constant field is constant and stays in range") {
  BayerFrame f = random_frame(20, 16, BayerPattern::GBRG, 7);
  std::fill(f.samples.begin(), f.samples.end(), uint16_t(1500));
  const float want = float(1500 - f.black_level) / float(f.white_level - f.black_level);
  const RgbImage rgb = demosaic(f);
  for (int c = 0; c < 3; ++c) CHECK(((rgb.ch[c] - want).abs() < 1e-6f).all());

  // even on a noise mosaic, where interpolation overshoots get clamped
  const RgbImage noisy = demosaic(random_frame(20, 16, BayerPattern::RGGB, 8));
  for (int c = 0; c < 3; ++c) {
    CHECK(noisy.ch[c].minCoeff() >= 0.0f);
    CHECK(noisy.ch[c].maxCoeff() <= 1.0f);
  }
}

TEST_CASE("demosaic commutes with whole-cell translations") {
  // the same integer scene sampled twice, two rows apart; a 2-row shift
  // preserves the CFA phase, so interior outputs must match bit for bit
  const Index w = 28, h = 22;
  auto scene = [](Index y, Index x) {
    return uint16_t(500 + (x * x * 7 + y * 13 + x * y * 3) % 3000);
  };
  BayerFrame a = random_frame(w, h, BayerPattern::RGGB, 0);
  BayerFrame b = a;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      a.samples[size_t(y) * w + x] = scene(y, x);
      b.samples[size_t(y) * w + x] = scene(y + 2, x);
    }
  const RgbImage ra = demosaic(a), rb = demosaic(b);
  for (int c = 0; c < 3; ++c)
    for (Index y = 2; y + 4 < h; ++y)
      for (Index x = 2; x + 2 < w; ++x)
        CHECK(rb.ch[c](y, x) == ra.ch[c](y + 2, x));
}

TEST_CASE("ingest checks the payload against the sidecar") {
  const fs::path dir = fs::temp_directory_path() / "fstack_raw_test";
  fs::create_directories(dir);
  const BayerFrame f = random_frame(8, 6, BayerPattern::RGGB, 6);
  Gray16 payload{f.width, f.height, f.samples};
  write_pgm16(dir / "a.pgm", payload);

  RawSidecar sc{f.width, f.height, f.pattern, f.black_level, f.white_level, 0, 100, "L"};
  const BayerFrame in = ingest_frame(dir / "a.pgm", sc);
  CHECK(in.samples == f.samples);
  CHECK(in.lens == "L");

  sc.width = 10;  // contradicting the payload
  CHECK_THROWS_AS(ingest_frame(dir / "a.pgm", sc), DataError);
  fs::remove_all(dir);
}
