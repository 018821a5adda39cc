// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace fstack {

using ComplexMat =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Symmetric complex Daubechies filter pair, length 6, 3 vanishing moments.
std::array<std::complex<double>, 6> cdw_lowpass();
std::array<std::complex<double>, 6> cdw_highpass();

struct CdwLevel {
  ComplexMat lh, hl, hh;
};

struct CdwPyramid {
  std::vector<CdwLevel> levels;  // fine to coarse
  ComplexMat approx;
  Index orig_rows = 0, orig_cols = 0;  // size before symmetric padding
};

// Separable periodized multilevel transform. Inputs whose dimensions are not
// divisible by 2^levels are padded by symmetric extension; the inverse strips
// the padding again.
CdwPyramid cdw_forward(const PlaneF& image, int levels);
PlaneF cdw_inverse(const CdwPyramid& pyramid);

}  // namespace fstack
