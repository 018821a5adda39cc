// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"

#include <vector>

namespace fstack {

/// Correlates rows (x direction) with an odd-length kernel, edge replication.
template <typename Scalar>
Plane<Scalar> filter_rows(const Plane<Scalar>& src, const std::vector<Scalar>& kernel);

/// Correlates columns (y direction) with an odd-length kernel, edge replication.
template <typename Scalar>
Plane<Scalar> filter_cols(const Plane<Scalar>& src, const std::vector<Scalar>& kernel);

template <typename Scalar>
Plane<Scalar> filter_separable(const Plane<Scalar>& src, const std::vector<Scalar>& kernel) {
  return filter_cols(filter_rows(src, kernel), kernel);
}

/// Normalized Gaussian taps with radius ceil(3*sigma). sigma <= 0 gives the
/// identity kernel.
std::vector<float> gaussian_kernel(double sigma);

PlaneF gaussian_blur(const PlaneF& src, double sigma);

/// Sum over the (2r+1)^2 window centered at each pixel, edge replication.
PlaneF box_sum(const PlaneF& src, int radius);

inline PlaneF box_mean(const PlaneF& src, int radius) {
  const float n = float(2 * radius + 1) * float(2 * radius + 1);
  return box_sum(src, radius) / n;
}

/// 4-neighbor 3x3 Laplacian, edge replication.
PlaneF laplacian3(const PlaneF& src);

/// Blur with [1 4 6 4 1]/16 and keep even samples. Output is ceil(n/2) per axis.
PlaneF pyramid_down(const PlaneF& src);

/// Adjoint-style expand back to an explicit (rows, cols) shape, the inverse
/// step size of pyramid_down.
PlaneF pyramid_up(const PlaneF& src, Index rows, Index cols);

}  // namespace fstack
