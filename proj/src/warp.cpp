// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/warp.hpp"

#include <cmath>

namespace fstack {

AffineWarp translation_warp(double tx, double ty) {
  AffineWarp w;
  w.t << tx, ty;
  return w;
}

AffineWarp rotation_warp(double radians, double cx, double cy) {
  AffineWarp w;
  const double c = std::cos(radians), s = std::sin(radians);
  w.a << c, -s, s, c;
  Eigen::Vector2d center(cx, cy);
  w.t = center - w.a * center;
  return w;
}

AffineWarp inverse(const AffineWarp& w) {
  AffineWarp inv;
  inv.a = w.a.inverse();
  inv.t = -inv.a * w.t;
  return inv;
}

AffineWarp compose(const AffineWarp& a, const AffineWarp& b) {
  AffineWarp out;
  out.a = a.a * b.a;
  out.t = a.a * b.t + a.t;
  return out;
}

AffineWarp scale_warp(const AffineWarp& w, double s) {
  AffineWarp out = w;
  out.t *= s;
  return out;
}

float sample_bilinear(const PlaneF& src, double x, double y) {
  const Index rows = src.rows(), cols = src.cols();
  if (x < 0.0) x = 0.0;
  if (y < 0.0) y = 0.0;
  if (x > cols - 1.0) x = cols - 1.0;
  if (y > rows - 1.0) y = rows - 1.0;
  const Index x0 = static_cast<Index>(x);
  const Index y0 = static_cast<Index>(y);
  const Index x1 = x0 + 1 < cols ? x0 + 1 : x0;
  const Index y1 = y0 + 1 < rows ? y0 + 1 : y0;
  const double fx = x - x0, fy = y - y0;
  const double top = src(y0, x0) + fx * (src(y0, x1) - src(y0, x0));
  const double bot = src(y1, x0) + fx * (src(y1, x1) - src(y1, x0));
  return static_cast<float>(top + fy * (bot - top));
}

PlaneF warp_image(const PlaneF& src, const AffineWarp& warp) {
  const AffineWarp inv = inverse(warp);
  const Index rows = src.rows(), cols = src.cols();
  PlaneF out(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    // inv maps (x, y) -> inv.a*(x,y)+inv.t; walk x incrementally per row.
    double sx = inv.a(0, 1) * y + inv.t(0);
    double sy = inv.a(1, 1) * y + inv.t(1);
    for (Index x = 0; x < cols; ++x) {
      out(y, x) = sample_bilinear(src, sx, sy);
      sx += inv.a(0, 0);
      sy += inv.a(1, 0);
    }
  }
  return out;
}

RgbImage warp_image(const RgbImage& src, const AffineWarp& warp) {
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.ch[c] = warp_image(src.ch[c], warp);
  return out;
}

}  // namespace fstack
