// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <string>

namespace fstack {

using Index = Eigen::Index;

/// Dense single-channel raster. Row-major so memory matches the usual
/// top-to-bottom scanline order; indexed as plane(y, x).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneF = Plane<float>;
using PlaneD = Plane<double>;
using PlaneI = Plane<int>;

// Error categories map onto CLI exit codes (config 2, data 3, divergence 4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct DivergenceError : Error {
  using Error::Error;
};

/// Linear RGB raster, values nominally in [0, 1].
struct RgbImage {
  std::array<PlaneF, 3> ch;

  RgbImage() = default;
  RgbImage(Index rows, Index cols) {
    for (auto& c : ch) c = PlaneF::Zero(rows, cols);
  }

  Index rows() const { return ch[0].rows(); }
  Index cols() const { return ch[0].cols(); }

  PlaneF& r() { return ch[0]; }
  PlaneF& g() { return ch[1]; }
  PlaneF& b() { return ch[2]; }
  const PlaneF& r() const { return ch[0]; }
  const PlaneF& g() const { return ch[1]; }
  const PlaneF& b() const { return ch[2]; }
};

/// Channel-mean luma. Permutation-invariant by construction, which keeps
/// sharpness decisions independent of channel order.
inline PlaneF luma(const RgbImage& im) {
  return (im.ch[0] + im.ch[1] + im.ch[2]) / 3.0f;
}

template <typename Scalar>
Plane<Scalar> clamp01(const Plane<Scalar>& p) {
  return p.min(Scalar(1)).max(Scalar(0));
}

inline RgbImage clamp01(const RgbImage& im) {
  RgbImage out;
  for (int c = 0; c < 3; ++c) out.ch[c] = clamp01(im.ch[c]);
  return out;
}

inline bool same_shape(const RgbImage& a, const RgbImage& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

}  // namespace fstack
