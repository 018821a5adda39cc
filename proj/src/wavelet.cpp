// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/wavelet.hpp"

#include <cmath>

namespace fstack {

namespace {

using cd = std::complex<double>;

// Closed-form coefficients of the length-6 symmetric complex Daubechies
// filter (the unique symmetric spectral factor of the order-3 Daubechies
// half-band polynomial). Sum is sqrt(2); the pair is orthonormal.
std::array<cd, 6> make_lowpass() {
  const double s2 = std::sqrt(2.0);
  const double s15 = std::sqrt(15.0);
  const cd h0 = -s2 / 64.0 * cd(3.0, s15);
  const cd h1 = s2 / 64.0 * cd(5.0, -s15);
  const cd h2 = s2 / 32.0 * cd(15.0, s15);
  return {h0, h1, h2, h2, h1, h0};
}

std::array<cd, 6> make_highpass() {
  const auto h = make_lowpass();
  std::array<cd, 6> g;
  for (int n = 0; n < 6; ++n) {
    g[n] = std::conj(h[5 - n]);
    if (n % 2 != 0) g[n] = -g[n];
  }
  return g;
}

const std::array<cd, 6> kLow = make_lowpass();
const std::array<cd, 6> kHigh = make_highpass();
const std::array<cd, 6> kLowConj = [] {
  auto a = kLow;
  for (auto& v : a) v = std::conj(v);
  return a;
}();
const std::array<cd, 6> kHighConj = [] {
  auto a = kHigh;
  for (auto& v : a) v = std::conj(v);
  return a;
}();

// Periodized analysis along each row: lo_k = sum_j conj(h_j) row[(2k+j) % n].
void analyze_rows(const ComplexMat& in, ComplexMat& lo, ComplexMat& hi) {
  const Index rows = in.rows(), n = in.cols(), half = n / 2;
  lo.resize(rows, half);
  hi.resize(rows, half);
  for (Index r = 0; r < rows; ++r) {
    const cd* src = in.data() + r * n;
    for (Index k = 0; k < half; ++k) {
      cd a{}, d{};
      for (int j = 0; j < 6; ++j) {
        Index m = 2 * k + j;
        if (m >= n) m -= n;  // filter is shorter than any valid row
        a += kLowConj[j] * src[m];
        d += kHighConj[j] * src[m];
      }
      lo(r, k) = a;
      hi(r, k) = d;
    }
  }
}

// Adjoint scatter: out[(2k+j) % n] += lo_k h_j + hi_k g_j.
ComplexMat synth_rows(const ComplexMat& lo, const ComplexMat& hi) {
  const Index rows = lo.rows(), half = lo.cols(), n = 2 * half;
  ComplexMat out = ComplexMat::Zero(rows, n);
  for (Index r = 0; r < rows; ++r) {
    cd* dst = out.data() + r * n;
    for (Index k = 0; k < half; ++k) {
      const cd a = lo(r, k), d = hi(r, k);
      for (int j = 0; j < 6; ++j) {
        Index m = 2 * k + j;
        if (m >= n) m -= n;
        dst[m] += a * kLow[j] + d * kHigh[j];
      }
    }
  }
  return out;
}

void analyze_cols(const ComplexMat& in, ComplexMat& lo, ComplexMat& hi) {
  ComplexMat lot, hit;
  analyze_rows(in.transpose(), lot, hit);
  lo = lot.transpose();
  hi = hit.transpose();
}

ComplexMat synth_cols(const ComplexMat& lo, const ComplexMat& hi) {
  return synth_rows(lo.transpose(), hi.transpose()).transpose();
}

Index padded_size(Index n, Index multiple) {
  return ((n + multiple - 1) / multiple) * multiple;
}

}  // namespace

std::array<std::complex<double>, 6> cdw_lowpass() { return make_lowpass(); }
std::array<std::complex<double>, 6> cdw_highpass() { return make_highpass(); }

CdwPyramid cdw_forward(const PlaneF& image, int levels) {
  require(levels >= 1, "wavelet levels must be >= 1");
  const Index block = Index{1} << levels;
  require(std::min(image.rows(), image.cols()) >= block,
          "image too small for wavelet depth " + std::to_string(levels));

  CdwPyramid pyr;
  pyr.orig_rows = image.rows();
  pyr.orig_cols = image.cols();
  const Index prows = padded_size(image.rows(), block);
  const Index pcols = padded_size(image.cols(), block);

  ComplexMat cur(prows, pcols);
  for (Index y = 0; y < prows; ++y) {
    const Index sy = y < image.rows() ? y : 2 * image.rows() - 1 - y;
    for (Index x = 0; x < pcols; ++x) {
      const Index sx = x < image.cols() ? x : 2 * image.cols() - 1 - x;
      cur(y, x) = cd(image(sy, sx), 0.0);
    }
  }

  pyr.levels.resize(levels);
  for (int l = 0; l < levels; ++l) {
    ComplexMat lo, hi, ll, lh, hl, hh;
    analyze_rows(cur, lo, hi);
    analyze_cols(lo, ll, lh);
    analyze_cols(hi, hl, hh);
    pyr.levels[l].lh = std::move(lh);
    pyr.levels[l].hl = std::move(hl);
    pyr.levels[l].hh = std::move(hh);
    cur = std::move(ll);
  }
  pyr.approx = std::move(cur);
  return pyr;
}

PlaneF cdw_inverse(const CdwPyramid& pyramid) {
  require(!pyramid.levels.empty(), "empty wavelet pyramid");
  ComplexMat cur = pyramid.approx;
  for (size_t l = pyramid.levels.size(); l-- > 0;) {
    const CdwLevel& lv = pyramid.levels[l];
    if (lv.lh.rows() != cur.rows() || lv.lh.cols() != cur.cols() ||
        lv.hl.rows() != cur.rows() || lv.hh.cols() != cur.cols())
      throw DataError("inconsistent wavelet subband shapes");
    ComplexMat lo = synth_cols(cur, lv.lh);
    ComplexMat hi = synth_cols(lv.hl, lv.hh);
    cur = synth_rows(lo, hi);
  }
  if (cur.rows() < pyramid.orig_rows || cur.cols() < pyramid.orig_cols)
    throw DataError("wavelet pyramid smaller than recorded size");
  PlaneF out(pyramid.orig_rows, pyramid.orig_cols);
  for (Index y = 0; y < out.rows(); ++y)
    for (Index x = 0; x < out.cols(); ++x)
      out(y, x) = static_cast<float>(cur(y, x).real());
  return out;
}

}  // namespace fstack
