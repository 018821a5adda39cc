// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/filters.hpp"

#include <cmath>

namespace fstack {

namespace {

inline Index clampi(Index v, Index lo, Index hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace

template <typename Scalar>
Plane<Scalar> filter_rows(const Plane<Scalar>& src, const std::vector<Scalar>& kernel) {
  const Index rows = src.rows(), cols = src.cols();
  const Index r = static_cast<Index>(kernel.size()) / 2;
  Plane<Scalar> out(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    const Scalar* row = src.data() + y * cols;
    Scalar* orow = out.data() + y * cols;
    const Index lo = std::min(r, cols);
    const Index hi = std::max(lo, cols - r);
    for (Index x = 0; x < lo; ++x) {
      Scalar acc = 0;
      for (Index k = -r; k <= r; ++k) acc += kernel[k + r] * row[clampi(x + k, 0, cols - 1)];
      orow[x] = acc;
    }
    for (Index x = lo; x < hi; ++x) {
      Scalar acc = 0;
      for (Index k = -r; k <= r; ++k) acc += kernel[k + r] * row[x + k];
      orow[x] = acc;
    }
    for (Index x = hi; x < cols; ++x) {
      Scalar acc = 0;
      for (Index k = -r; k <= r; ++k) acc += kernel[k + r] * row[clampi(x + k, 0, cols - 1)];
      orow[x] = acc;
    }
  }
  return out;
}

template <typename Scalar>
Plane<Scalar> filter_cols(const Plane<Scalar>& src, const std::vector<Scalar>& kernel) {
  const Index rows = src.rows(), cols = src.cols();
  const Index r = static_cast<Index>(kernel.size()) / 2;
  Plane<Scalar> out(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    Scalar* orow = out.data() + y * cols;
    for (Index x = 0; x < cols; ++x) orow[x] = 0;
    for (Index k = -r; k <= r; ++k) {
      const Scalar w = kernel[k + r];
      const Scalar* srow = src.data() + clampi(y + k, 0, rows - 1) * cols;
      for (Index x = 0; x < cols; ++x) orow[x] += w * srow[x];
    }
  }
  return out;
}

template PlaneF filter_rows<float>(const PlaneF&, const std::vector<float>&);
template PlaneD filter_rows<double>(const PlaneD&, const std::vector<double>&);
template PlaneF filter_cols<float>(const PlaneF&, const std::vector<float>&);
template PlaneD filter_cols<double>(const PlaneD&, const std::vector<double>&);

std::vector<float> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0f};
  const Index r = static_cast<Index>(std::ceil(3.0 * sigma));
  std::vector<float> k(2 * r + 1);
  double sum = 0.0;
  for (Index i = -r; i <= r; ++i) {
    double v = std::exp(-0.5 * double(i) * double(i) / (sigma * sigma));
    k[i + r] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);
  return k;
}

PlaneF gaussian_blur(const PlaneF& src, double sigma) {
  if (sigma <= 0.0) return src;
  return filter_separable(src, gaussian_kernel(sigma));
}

PlaneF box_sum(const PlaneF& src, int radius) {
  if (radius <= 0) return src;
  const Index rows = src.rows(), cols = src.cols();
  const Index r = radius;
  // Sliding window along rows, then along columns, with edge replication.
  PlaneF tmp(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    const float* row = src.data() + y * cols;
    float* trow = tmp.data() + y * cols;
    double acc = 0.0;
    for (Index k = -r; k <= r; ++k) acc += row[clampi(k, 0, cols - 1)];
    trow[0] = static_cast<float>(acc);
    for (Index x = 1; x < cols; ++x) {
      acc += row[clampi(x + r, 0, cols - 1)] - row[clampi(x - r - 1, 0, cols - 1)];
      trow[x] = static_cast<float>(acc);
    }
  }
  PlaneF out(rows, cols);
  std::vector<double> acc(cols, 0.0);
  for (Index k = -r; k <= r; ++k) {
    const float* trow = tmp.data() + clampi(k, 0, rows - 1) * cols;
    for (Index x = 0; x < cols; ++x) acc[x] += trow[x];
  }
  for (Index x = 0; x < cols; ++x) out(0, x) = static_cast<float>(acc[x]);
  for (Index y = 1; y < rows; ++y) {
    const float* add = tmp.data() + clampi(y + r, 0, rows - 1) * cols;
    const float* sub = tmp.data() + clampi(y - r - 1, 0, rows - 1) * cols;
    float* orow = out.data() + y * cols;
    for (Index x = 0; x < cols; ++x) {
      acc[x] += double(add[x]) - double(sub[x]);
      orow[x] = static_cast<float>(acc[x]);
    }
  }
  return out;
}

PlaneF laplacian3(const PlaneF& src) {
  const Index rows = src.rows(), cols = src.cols();
  PlaneF out(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    const float* up = src.data() + clampi(y - 1, 0, rows - 1) * cols;
    const float* mid = src.data() + y * cols;
    const float* dn = src.data() + clampi(y + 1, 0, rows - 1) * cols;
    float* orow = out.data() + y * cols;
    for (Index x = 0; x < cols; ++x) {
      const float left = mid[clampi(x - 1, 0, cols - 1)];
      const float right = mid[clampi(x + 1, 0, cols - 1)];
      orow[x] = up[x] + dn[x] + left + right - 4.0f * mid[x];
    }
  }
  return out;
}

namespace {

// [1 4 6 4 1]/16 binomial taps.
constexpr float kPyr[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};

PlaneF down_rows(const PlaneF& src) {
  const Index rows = src.rows(), cols = src.cols();
  const Index ocols = (cols + 1) / 2;
  PlaneF out(rows, ocols);
  for (Index y = 0; y < rows; ++y) {
    const float* row = src.data() + y * cols;
    float* orow = out.data() + y * ocols;
    for (Index xo = 0; xo < ocols; ++xo) {
      float acc = 0.0f;
      for (Index k = -2; k <= 2; ++k) acc += kPyr[k + 2] * row[clampi(2 * xo + k, 0, cols - 1)];
      orow[xo] = acc;
    }
  }
  return out;
}

PlaneF down_cols(const PlaneF& src) {
  const Index rows = src.rows(), cols = src.cols();
  const Index orows = (rows + 1) / 2;
  PlaneF out(orows, cols);
  for (Index yo = 0; yo < orows; ++yo) {
    float* orow = out.data() + yo * cols;
    for (Index x = 0; x < cols; ++x) orow[x] = 0.0f;
    for (Index k = -2; k <= 2; ++k) {
      const float w = kPyr[k + 2];
      const float* srow = src.data() + clampi(2 * yo + k, 0, rows - 1) * cols;
      for (Index x = 0; x < cols; ++x) orow[x] += w * srow[x];
    }
  }
  return out;
}

// Zero-stuffed expansion along one axis, doubled taps so constants survive.
// Even outputs mix [1 6 1]/8, odd outputs [1 1]/2.
void up_axis_taps(Index x, Index n, Index* idx, float* w, int* count) {
  if (x % 2 == 0) {
    idx[0] = clampi(x / 2 - 1, 0, n - 1);
    idx[1] = clampi(x / 2, 0, n - 1);
    idx[2] = clampi(x / 2 + 1, 0, n - 1);
    w[0] = 1.0f / 8;
    w[1] = 6.0f / 8;
    w[2] = 1.0f / 8;
    *count = 3;
  } else {
    idx[0] = clampi((x - 1) / 2, 0, n - 1);
    idx[1] = clampi((x + 1) / 2, 0, n - 1);
    w[0] = 0.5f;
    w[1] = 0.5f;
    *count = 2;
  }
}

PlaneF up_rows(const PlaneF& src, Index ocols) {
  const Index rows = src.rows(), cols = src.cols();
  PlaneF out(rows, ocols);
  for (Index y = 0; y < rows; ++y) {
    const float* row = src.data() + y * cols;
    float* orow = out.data() + y * ocols;
    for (Index x = 0; x < ocols; ++x) {
      Index idx[3];
      float w[3];
      int count;
      up_axis_taps(x, cols, idx, w, &count);
      float acc = 0.0f;
      for (int k = 0; k < count; ++k) acc += w[k] * row[idx[k]];
      orow[x] = acc;
    }
  }
  return out;
}

PlaneF up_cols(const PlaneF& src, Index orows) {
  const Index rows = src.rows(), cols = src.cols();
  PlaneF out(orows, cols);
  for (Index y = 0; y < orows; ++y) {
    Index idx[3];
    float w[3];
    int count;
    up_axis_taps(y, rows, idx, w, &count);
    float* orow = out.data() + y * cols;
    for (Index x = 0; x < cols; ++x) orow[x] = 0.0f;
    for (int k = 0; k < count; ++k) {
      const float* srow = src.data() + idx[k] * cols;
      for (Index x = 0; x < cols; ++x) orow[x] += w[k] * srow[x];
    }
  }
  return out;
}

}  // namespace

PlaneF pyramid_down(const PlaneF& src) { return down_cols(down_rows(src)); }

PlaneF pyramid_up(const PlaneF& src, Index rows, Index cols) {
  return up_cols(up_rows(src, cols), rows);
}

}  // namespace fstack
