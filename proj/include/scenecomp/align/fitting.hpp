#pragma once

#include <stdexcept>

#include "scenecomp/core/image.hpp"
#include "scenecomp/core/render.hpp"

namespace scenecomp {

// Per-pixel cost weights for comparing a rendered model against observed
// depth over a proposal region.
struct FitWeights {
  double c_depth = 1.0;
  double c_missing = 0.9;
  double c_occ = 0.5;

  void validate() const {
    if (c_depth < 0 || c_missing < 0 || c_occ < 0)
      throw std::invalid_argument("fit weights must be nonnegative");
  }

  static FitWeights annotation() { return {1.0, 0.9, 0.5}; }
  static FitWeights retrieval() { return {1.0, 0.6, 0.9}; }
};

// Depth-fitting cost of a render against the observation:
//   c_depth  * sum_{region & rendered} |observed - rendered|
// + c_missing * |region & !rendered|
// + c_occ    * sum_{!region & rendered} max(rendered - observed, 0)
// Pixels with missing observed depth count only toward the second term
// (when unrendered) and contribute nothing otherwise.
inline double fitting_cost(const RenderResult& render, const DepthImage& observed,
                           const PixelMask& region, const FitWeights& w) {
  w.validate();
  const int width = observed.width(), height = observed.height();
  if (!render.depth.depth.same_size(width, height) || !region.same_size(width, height))
    throw std::invalid_argument("fitting_cost: image sizes differ");

  double depth_term = 0, occ_term = 0;
  long missing_count = 0;
  const size_t n = region.size();
  for (size_t i = 0; i < n; ++i) {
    const bool in_region = region.data[i] != 0;
    const bool rendered = render.mask.data[i] != 0;
    if (in_region && !rendered) {
      ++missing_count;
      continue;
    }
    if (!rendered) continue;
    const float obs = observed.depth.data[i];
    if (!DepthImage::is_valid(obs)) continue;
    const double d = double(render.depth.depth.data[i]) - double(obs);
    if (in_region)
      depth_term += std::abs(d);
    else if (d > 0)
      occ_term += d;
  }
  return w.c_depth * depth_term + w.c_missing * double(missing_count) + w.c_occ * occ_term;
}

}  // namespace scenecomp
