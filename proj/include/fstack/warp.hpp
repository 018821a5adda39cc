// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"

#include <Eigen/Dense>

#include <array>

namespace fstack {

// Affine map from the moving frame into the reference frame:
// p_ref = a * p_mov + t, points ordered (x, y).
struct AffineWarp {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
  Eigen::Vector2d t = Eigen::Vector2d::Zero();

  Eigen::Vector2d operator()(const Eigen::Vector2d& p) const { return a * p + t; }

  // Row-major [a11, a12, tx, a21, a22, ty], the order used on disk.
  std::array<double, 6> coeffs() const {
    return {a(0, 0), a(0, 1), t(0), a(1, 0), a(1, 1), t(1)};
  }
  static AffineWarp from_coeffs(const std::array<double, 6>& c) {
    AffineWarp w;
    w.a << c[0], c[1], c[3], c[4];
    w.t << c[2], c[5];
    return w;
  }
};

AffineWarp translation_warp(double tx, double ty);
AffineWarp rotation_warp(double radians, double cx, double cy);
AffineWarp inverse(const AffineWarp& w);

// compose(a, b) applies b first: x -> a(b(x)).
AffineWarp compose(const AffineWarp& a, const AffineWarp& b);

// Conjugate by a uniform coordinate scale: the same motion expressed at a
// resolution s times the one the warp was estimated at.
AffineWarp scale_warp(const AffineWarp& w, double s);

// Bilinear lookup with edge replication.
float sample_bilinear(const PlaneF& src, double x, double y);

// Resample into the reference frame: out(p) = src(inverse(warp)(p)).
PlaneF warp_image(const PlaneF& src, const AffineWarp& warp);
RgbImage warp_image(const RgbImage& src, const AffineWarp& warp);

}  // namespace fstack
