// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include "fstack/image.hpp"

#include <vector>

namespace fstack {

// Detail bands fine-to-coarse, then the low-pass residual as the last entry.
// "levels" counts every entry, so levels = 1 is the residual alone.
using LaplacianPyramid = std::vector<PlaneF>;

LaplacianPyramid build_laplacian_pyramid(const PlaneF& image, int levels);
PlaneF collapse_laplacian_pyramid(const LaplacianPyramid& pyramid);

}  // namespace fstack
