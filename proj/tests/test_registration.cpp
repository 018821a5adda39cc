// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/registration.hpp"

#include "fstack/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace fstack;
namespace fs = std::filesystem;

namespace {

// Mean displacement error of the estimated map against the truth, measured
// at the image corners (the worst case for the linear part).
double corner_epe(const AffineWarp& got, const AffineWarp& want, Index rows, Index cols) {
  const Eigen::Vector2d corners[4] = {{0, 0},
                                      {double(cols - 1), 0},
                                      {0, double(rows - 1)},
                                      {double(cols - 1), double(rows - 1)}};
  double sum = 0;
  for (const auto& c : corners) sum += (got(c) - want(c)).norm();
  return sum / 4;
}

// A pair (reference, moving) where moving(p) = texture(w(p)): both images
// are rendered from the same continuous texture, so the ground-truth warp
// carries no resampling error at all.
struct Pair {
  PlaneF ref, mov;
  AffineWarp truth;
};

Pair make_pair(Index rows, Index cols, uint64_t seed, const AffineWarp& w) {
  return {render_texture(rows, cols, seed), render_texture(rows, cols, seed, w), w};
}

}  // namespace

TEST_CASE("recovers a pure subpixel translation") {
  const AffineWarp w = translation_warp(3.5, -2.25);
  const Pair p = make_pair(192, 256, 41, w);
  const EccResult res = ecc_align(p.ref, p.mov);
  CHECK(res.rho > 0.99);
  CHECK(corner_epe(res.warp, w, 192, 256) < 0.1);
}

TEST_CASE("recovers rotation plus scale") {
  // 2 degrees and 1 percent scale about the center, plus a small shift
  AffineWarp w = rotation_warp(2.0 * M_PI / 180.0, 128, 96);
  w.a *= 1.01;
  const Eigen::Vector2d c(128, 96);
  w.t = c - w.a * c + Eigen::Vector2d(1.5, -0.75);
  const Pair p = make_pair(192, 256, 42, w);
  const EccResult res = ecc_align(p.ref, p.mov);
  CHECK(res.rho > 0.99);
  CHECK(corner_epe(res.warp, w, 192, 256) < 0.05);
}

TEST_CASE("estimate is invariant to affine photometric changes") {
  const AffineWarp w = translation_warp(-2.0, 1.25);
  const Pair p = make_pair(160, 160, 43, w);
  PlaneF bright = 0.6f * p.mov + 0.2f;
  const EccResult a = ecc_align(p.ref, p.mov);
  const EccResult b = ecc_align(p.ref, bright);
  CHECK(corner_epe(a.warp, b.warp, 160, 160) < 1e-3);
  CHECK(corner_epe(b.warp, w, 160, 160) < 0.1);
}

TEST_CASE("warm start converges from a coarse initial guess") {
  const AffineWarp w = translation_warp(6.0, 4.0);
  const Pair p = make_pair(192, 192, 44, w);
  const EccResult res = ecc_align(p.ref, p.mov, translation_warp(5.0, 3.0));
  CHECK(corner_epe(res.warp, w, 192, 192) < 0.1);
}

TEST_CASE("images below the pyramid floor are rejected") {
  // 4 levels need at least 8 << 3 = 64 pixels on the short side
  const PlaneF small = render_texture(63, 100, 45);
  CHECK_THROWS_AS(ecc_align(small, small), DataError);
  CHECK_NOTHROW(ecc_align(render_texture(64, 100, 45), render_texture(64, 100, 45)));
}

TEST_CASE("structureless input diverges instead of lying") {
  const PlaneF tex = render_texture(96, 96, 46);
  const PlaneF flat = PlaneF::Constant(96, 96, 0.5f);
  EccConfig cfg;
  cfg.pyramid_levels = 2;
  CHECK_THROWS_AS(ecc_align(tex, flat, {}, cfg), DivergenceError);
}

TEST_CASE("burst registration composes pairwise motion toward frame 0") {
  // cumulative truth: frame i sits at a translation of (1.6 i, -1.1 i)
  std::vector<PlaneF> frames;
  std::vector<AffineWarp> truth;
  for (int i = 0; i < 4; ++i) {
    const AffineWarp w = translation_warp(1.6 * i, -1.1 * i);
    truth.push_back(w);
    frames.push_back(render_texture(128, 160, 47, w));
  }
  const RegistrationResult reg = register_burst(frames);
  REQUIRE(reg.cumulative.size() == 4);
  REQUIRE(reg.rhos.size() == 4);
  CHECK(reg.rhos[0] == 1.0);
  CHECK(corner_epe(reg.cumulative[0], AffineWarp{}, 128, 160) == 0.0);
  for (int i = 1; i < 4; ++i) {
    CHECK(reg.rhos[i] > 0.99);
    CHECK(corner_epe(reg.cumulative[i], truth[i], 128, 160) < 0.2);
    CHECK(corner_epe(reg.pairwise[i], translation_warp(1.6, -1.1), 128, 160) < 0.2);
  }
}

TEST_CASE("reversing the burst inverts the recovered motion") {
  const int n = 4;
  std::vector<PlaneF> frames;
  for (int i = 0; i < n; ++i)
    frames.push_back(render_texture(128, 160, 49, translation_warp(1.3 * i, -0.9 * i)));
  std::vector<PlaneF> reversed(frames.rbegin(), frames.rend());

  const RegistrationResult fwd = register_burst(frames);
  const RegistrationResult rev = register_burst(reversed);
  for (int j = 1; j < n; ++j) {
    // reversed pair j relates the same two frames as forward pair n - j,
    // seen from the other side; per-step motion is constant, so the
    // reversed cumulative is the inverse of the forward one step for step
    CHECK(corner_epe(rev.pairwise[j], inverse(fwd.pairwise[n - j]), 128, 160) < 0.1);
    CHECK(corner_epe(rev.cumulative[j], inverse(fwd.cumulative[j]), 128, 160) < 0.2);
  }
}

TEST_CASE("a diverged pair degrades to identity with a NaN flag") {
  std::vector<PlaneF> frames = {render_texture(96, 96, 48),
                                render_texture(96, 96, 48, translation_warp(2, 1)),
                                PlaneF::Constant(96, 96, 0.5f)};
  EccConfig cfg;
  cfg.pyramid_levels = 2;
  const RegistrationResult reg = register_burst(frames, cfg);
  CHECK(reg.rhos[1] > 0.9);
  CHECK(std::isnan(reg.rhos[2]));
  // the broken pair contributes the identity, so cumulative stalls
  CHECK(corner_epe(reg.cumulative[2], reg.cumulative[1], 96, 96) == 0.0);
}

TEST_CASE("warps survive the JSON round trip, including NaN rho") {
  RegistrationResult reg;
  reg.pairwise = {AffineWarp{}, translation_warp(0.25, -0.5)};
  AffineWarp c1 = rotation_warp(0.01, 10, 20);
  reg.cumulative = {AffineWarp{}, c1};
  reg.rhos = {1.0, std::nan("")};

  const fs::path path = fs::temp_directory_path() / "fstack_warps_test.json";
  save_warps(path, reg);
  const RegistrationResult back = load_warps(path);
  REQUIRE(back.pairwise.size() == 2);
  CHECK(back.pairwise[1].coeffs() == reg.pairwise[1].coeffs());
  CHECK(back.cumulative[1].coeffs() == reg.cumulative[1].coeffs());
  CHECK(back.rhos[0] == 1.0);
  CHECK(std::isnan(back.rhos[1]));
  fs::remove(path);
}
