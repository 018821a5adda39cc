// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/registration.hpp"

#include "fstack/filters.hpp"
#include "fstack/parallel.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace fstack {

namespace {

PlaneF gradient_x(const PlaneF& im) {
  static const std::vector<float> k{-0.5f, 0.0f, 0.5f};
  return filter_rows(im, k);
}

PlaneF gradient_y(const PlaneF& im) {
  static const std::vector<float> k{-0.5f, 0.0f, 0.5f};
  return filter_cols(im, k);
}

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct EccAccum {
  Mat6 hessian = Mat6::Zero();
  Vec6 sum_j = Vec6::Zero();       // jacobian column sums
  Vec6 sum_j_img = Vec6::Zero();   // sum j * warped image
  Vec6 sum_j_tmpl = Vec6::Zero();  // sum j * template
  double sum_img = 0, sum_img2 = 0;
  double sum_tmpl = 0, sum_tmpl2 = 0;
  double sum_cross = 0;
  long count = 0;
};

// One forward-additive ECC pass over the template grid. The warp "m" maps
// template coordinates into the moving frame. Everything the update needs is
// accumulated in a single sweep; the zero-mean corrections are applied
// algebraically afterward.
EccAccum accumulate(const PlaneF& tmpl, const PlaneF& moving, const PlaneF& gx,
                    const PlaneF& gy, const AffineWarp& m) {
  const Index rows = tmpl.rows(), cols = tmpl.cols();
  const Index mrows = moving.rows(), mcols = moving.cols();
  const double a11 = m.a(0, 0), a12 = m.a(0, 1), tx = m.t(0);
  const double a21 = m.a(1, 0), a22 = m.a(1, 1), ty = m.t(1);

  EccAccum acc;
  double h[21] = {0};
  for (Index y = 0; y < rows; ++y) {
    double sx = a12 * y + tx;
    double sy = a22 * y + ty;
    for (Index x = 0; x < cols; ++x, sx += a11, sy += a21) {
      const Index x0 = static_cast<Index>(std::floor(sx));
      const Index y0 = static_cast<Index>(std::floor(sy));
      if (x0 < 0 || y0 < 0 || x0 > mcols - 2 || y0 > mrows - 2) continue;
      const double fx = sx - x0, fy = sy - y0;
      const double w00 = (1 - fx) * (1 - fy), w01 = fx * (1 - fy);
      const double w10 = (1 - fx) * fy, w11 = fx * fy;

      const double iw = w00 * moving(y0, x0) + w01 * moving(y0, x0 + 1) +
                        w10 * moving(y0 + 1, x0) + w11 * moving(y0 + 1, x0 + 1);
      const double ix = w00 * gx(y0, x0) + w01 * gx(y0, x0 + 1) +
                        w10 * gx(y0 + 1, x0) + w11 * gx(y0 + 1, x0 + 1);
      const double iy = w00 * gy(y0, x0) + w01 * gy(y0, x0 + 1) +
                        w10 * gy(y0 + 1, x0) + w11 * gy(y0 + 1, x0 + 1);
      const double t = tmpl(y, x);

      const double j[6] = {ix * x, iy * x, ix * y, iy * y, ix, iy};
      int k = 0;
      for (int r = 0; r < 6; ++r)
        for (int c = r; c < 6; ++c) h[k++] += j[r] * j[c];
      for (int r = 0; r < 6; ++r) {
        acc.sum_j(r) += j[r];
        acc.sum_j_img(r) += j[r] * iw;
        acc.sum_j_tmpl(r) += j[r] * t;
      }
      acc.sum_img += iw;
      acc.sum_img2 += iw * iw;
      acc.sum_tmpl += t;
      acc.sum_tmpl2 += t * t;
      acc.sum_cross += iw * t;
      ++acc.count;
    }
  }
  int k = 0;
  for (int r = 0; r < 6; ++r)
    for (int c = r; c < 6; ++c) {
      acc.hessian(r, c) = h[k];
      acc.hessian(c, r) = h[k];
      ++k;
    }
  return acc;
}

// Jacobian column order is [ix*x, iy*x, ix*y, iy*y, ix, iy], so the update
// vector maps onto (a11, a21, a12, a22, tx, ty).
void apply_update(AffineWarp& m, const Vec6& dp) {
  m.a(0, 0) += dp(0);
  m.a(1, 0) += dp(1);
  m.a(0, 1) += dp(2);
  m.a(1, 1) += dp(3);
  m.t(0) += dp(4);
  m.t(1) += dp(5);
}

// Runs the iteration at one pyramid level; m is updated in place.
void ecc_level(const PlaneF& tmpl, const PlaneF& moving, AffineWarp& m,
               const EccConfig& cfg, double& rho, int& iterations) {
  const PlaneF gx = gradient_x(moving);
  const PlaneF gy = gradient_y(moving);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    const EccAccum acc = accumulate(tmpl, moving, gx, gy, m);
    if (acc.count < 36) throw DivergenceError("warp left the image");
    const double n = static_cast<double>(acc.count);
    const double mean_img = acc.sum_img / n;
    const double mean_tmpl = acc.sum_tmpl / n;

    const Vec6 img_proj = acc.sum_j_img - mean_img * acc.sum_j;
    const Vec6 tmpl_proj = acc.sum_j_tmpl - mean_tmpl * acc.sum_j;
    const double img_norm2 = acc.sum_img2 - n * mean_img * mean_img;
    const double tmpl_norm2 = acc.sum_tmpl2 - n * mean_tmpl * mean_tmpl;
    const double correlation = acc.sum_cross - n * mean_img * mean_tmpl;

    Eigen::LDLT<Mat6> solver(acc.hessian);
    const Vec6 hinv_img = solver.solve(img_proj);

    rho = correlation / std::sqrt(std::max(img_norm2 * tmpl_norm2, 1e-300));
    const double lambda_n = img_norm2 - img_proj.dot(hinv_img);
    const double lambda_d = correlation - tmpl_proj.dot(hinv_img);
    if (!std::isfinite(lambda_n) || !std::isfinite(lambda_d) || lambda_d <= 0.0)
      throw DivergenceError("correlation denominator is not positive");
    const double lambda = lambda_n / lambda_d;

    // error = lambda * tmpl_zm - img_zm, projected through the jacobian
    const Vec6 err_proj = lambda * tmpl_proj - img_proj;
    const Vec6 dp = solver.solve(err_proj);
    if (!dp.allFinite()) throw DivergenceError("non-finite parameter update");

    apply_update(m, dp);
    ++iterations;
    if (dp.norm() < cfg.epsilon) break;
  }
}

}  // namespace

EccResult ecc_align(const PlaneF& tmpl, const PlaneF& moving,
                    const AffineWarp& init, const EccConfig& cfg) {
  require(tmpl.rows() == moving.rows() && tmpl.cols() == moving.cols(),
          "ecc_align: image dimensions differ");
  require(cfg.pyramid_levels >= 1 && cfg.max_iterations >= 1 && cfg.epsilon > 0,
          "ecc_align: bad config");
  const Index min_dim = std::min(tmpl.rows(), tmpl.cols());
  if (min_dim < (Index{8} << (cfg.pyramid_levels - 1)))
    throw DataError("image too small for pyramid depth " +
                    std::to_string(cfg.pyramid_levels));

  std::vector<PlaneF> tp(cfg.pyramid_levels), mp(cfg.pyramid_levels);
  tp[0] = cfg.pre_blur_sigma > 0 ? gaussian_blur(tmpl, cfg.pre_blur_sigma) : tmpl;
  mp[0] = cfg.pre_blur_sigma > 0 ? gaussian_blur(moving, cfg.pre_blur_sigma) : moving;
  for (int l = 1; l < cfg.pyramid_levels; ++l) {
    tp[l] = pyramid_down(tp[l - 1]);
    mp[l] = pyramid_down(mp[l - 1]);
  }

  // The iteration optimizes the template -> moving map, so start from the
  // inverse of the supplied moving -> reference warp, at coarse resolution.
  AffineWarp m = scale_warp(inverse(init), 1.0 / double(Index{1} << (cfg.pyramid_levels - 1)));

  EccResult result;
  for (int l = cfg.pyramid_levels - 1; l >= 0; --l) {
    ecc_level(tp[l], mp[l], m, cfg, result.rho, result.iterations);
    if (l > 0) m = scale_warp(m, 2.0);
  }
  result.warp = inverse(m);
  if (!result.warp.a.allFinite() || !result.warp.t.allFinite() ||
      !std::isfinite(result.rho))
    throw DivergenceError("non-finite alignment result");
  return result;
}

RegistrationResult register_burst(const std::vector<PlaneF>& frames,
                                  const EccConfig& cfg, int threads) {
  require(!frames.empty(), "register_burst: empty burst");
  for (const auto& f : frames)
    require(f.rows() == frames[0].rows() && f.cols() == frames[0].cols(),
            "register_burst: frame dimensions differ");

  const size_t n = frames.size();
  RegistrationResult result;
  result.pairwise.assign(n, AffineWarp{});
  result.cumulative.assign(n, AffineWarp{});
  result.rhos.assign(n, 1.0);

  parallel_for(
      static_cast<Index>(n) - 1,
      [&](Index k) {
        const size_t i = static_cast<size_t>(k) + 1;
        try {
          EccResult r = ecc_align(frames[i - 1], frames[i], AffineWarp{}, cfg);
          result.pairwise[i] = r.warp;
          result.rhos[i] = r.rho;
        } catch (const DivergenceError&) {
          result.pairwise[i] = AffineWarp{};
          result.rhos[i] = std::numeric_limits<double>::quiet_NaN();
        }
      },
      threads);

  for (size_t i = 1; i < n; ++i)
    result.cumulative[i] = compose(result.cumulative[i - 1], result.pairwise[i]);
  return result;
}

void save_warps(const std::filesystem::path& path, const RegistrationResult& result) {
  nlohmann::json root;
  root["reference"] = 0;
  auto& frames = root["frames"] = nlohmann::json::array();
  for (size_t i = 0; i < result.pairwise.size(); ++i) {
    nlohmann::json f;
    f["index"] = i;
    f["pairwise"] = result.pairwise[i].coeffs();
    f["cumulative"] = result.cumulative[i].coeffs();
    // JSON has no NaN literal; a diverged pair is stored as null.
    if (std::isnan(result.rhos[i]))
      f["rho"] = nullptr;
    else
      f["rho"] = result.rhos[i];
    frames.push_back(std::move(f));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << root.dump(2) << "\n";
}

RegistrationResult load_warps(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad warp file " + path.string() + ": " + e.what());
  }
  RegistrationResult result;
  try {
    for (const auto& f : root.at("frames")) {
      result.pairwise.push_back(
          AffineWarp::from_coeffs(f.at("pairwise").get<std::array<double, 6>>()));
      result.cumulative.push_back(
          AffineWarp::from_coeffs(f.at("cumulative").get<std::array<double, 6>>()));
      const auto& rho = f.at("rho");
      result.rhos.push_back(rho.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                          : rho.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad warp file " + path.string() + ": " + e.what());
  }
  return result;
}

}  // namespace fstack
