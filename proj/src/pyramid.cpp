// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/pyramid.hpp"

#include "fstack/filters.hpp"

namespace fstack {

LaplacianPyramid build_laplacian_pyramid(const PlaneF& image, int levels) {
  require(levels >= 1, "pyramid levels must be >= 1");
  if (std::min(image.rows(), image.cols()) < (Index{1} << (levels - 1)))
    throw DataError("image too small for " + std::to_string(levels) +
                    " pyramid levels");
  LaplacianPyramid pyr;
  pyr.reserve(levels);
  PlaneF g = image;
  for (int k = 0; k + 1 < levels; ++k) {
    PlaneF next = pyramid_down(g);
    pyr.push_back(g - pyramid_up(next, g.rows(), g.cols()));
    g = std::move(next);
  }
  pyr.push_back(std::move(g));
  return pyr;
}

PlaneF collapse_laplacian_pyramid(const LaplacianPyramid& pyramid) {
  require(!pyramid.empty(), "empty pyramid");
  PlaneF im = pyramid.back();
  for (size_t k = pyramid.size() - 1; k-- > 0;) {
    const PlaneF& detail = pyramid[k];
    if ((detail.rows() + 1) / 2 != pyramid[k + 1].rows() ||
        (detail.cols() + 1) / 2 != pyramid[k + 1].cols())
      throw DataError("inconsistent pyramid band shapes");
    im = detail + pyramid_up(im, detail.rows(), detail.cols());
  }
  return im;
}

}  // namespace fstack
