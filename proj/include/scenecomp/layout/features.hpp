#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "scenecomp/core/image.hpp"
#include "scenecomp/core/point_cloud.hpp"
#include "scenecomp/layout/plane.hpp"

namespace scenecomp {

enum class PixelLabel { Floor = 0, Wall = 1, Ceiling = 2, Object = 3 };
constexpr int kPixelLabels = 4;

// Per-pixel probabilities over {floor, wall, ceiling, object}; produced by
// an external classifier and consumed as data.
struct PixelLabelProbs {
  Grid<std::array<float, 4>> probs;

  PixelLabelProbs() = default;
  PixelLabelProbs(int w, int h) : probs(w, h, {0.25f, 0.25f, 0.25f, 0.25f}) {}

  void validate() const {
    for (const auto& p : probs.data) {
      const double s = double(p[0]) + p[1] + p[2] + p[3];
      if (std::abs(s - 1.0) > 1e-6)
        throw std::invalid_argument("pixel label probabilities must sum to 1");
    }
  }

  float at(int pixel_index, PixelLabel l) const {
    return probs.data[pixel_index][static_cast<int>(l)];
  }
};

// Piecewise-constant position prior per category, loaded as data.
struct PositionPrior {
  struct Table {
    double min_offset = 0;
    double bin_width = 0.1;
    std::vector<double> values;
  };
  std::array<Table, kLayoutCategories> tables;

  double lookup(LayoutCategory c, double offset) const {
    const Table& t = tables[static_cast<int>(c)];
    if (t.values.empty()) return 0.0;
    const int i = static_cast<int>(std::floor((offset - t.min_offset) / t.bin_width));
    return t.values[std::clamp(i, 0, int(t.values.size()) - 1)];
  }
};

constexpr double kDefaultSigmaP = 0.025;   // point-to-plane, meters
constexpr double kDefaultSigmaN = 0.0799;  // normal angle, radians

// Probability that a point with the given normal belongs to the plane:
// product of Gaussian falloffs in point-to-plane distance and angular
// normal distance, normalized so zero distance maps to 1.
inline double point_plane_probability(const Eigen::Vector3d& point, const Eigen::Vector3d& normal,
                                      const LayoutPlane& plane, double sigma_p = kDefaultSigmaP,
                                      double sigma_n = kDefaultSigmaN) {
  if (!(sigma_p > 0) || !(sigma_n > 0)) throw std::invalid_argument("sigmas must be positive");
  const double dist = std::abs(point[plane.axis] - plane.offset);
  const double cosang = std::clamp(normal.dot(plane.normal()), -1.0, 1.0);
  const double ang = std::acos(cosang);
  return std::exp(-0.5 * dist * dist / (sigma_p * sigma_p)) *
         std::exp(-0.5 * ang * ang / (sigma_n * sigma_n));
}

// f[0]  sum of point-plane probabilities
// f[1..4] the same sum weighted by the four label probabilities
// f[5]  count of points behind the plane by >= behind_frac of plane depth
// f[6..10] = f[0..4] / f[5], zero when f[5] is zero
// f[11] position prior for (category, offset)
struct PlaneFeatures {
  std::array<double, 12> f{};
};

inline PlaneFeatures plane_features(const LayoutPlane& plane, const PointCloud& cloud,
                                    const PixelLabelProbs& labels, const PositionPrior& prior,
                                    double sigma_p = kDefaultSigmaP, double sigma_n = kDefaultSigmaN,
                                    double behind_frac = 0.03) {
  PlaneFeatures out;
  double behind = 0;
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    if (cloud.has_normal(i)) {
      const double prob = point_plane_probability(p, cloud.normals[i], plane, sigma_p, sigma_n);
      out.f[0] += prob;
      for (int l = 0; l < kPixelLabels; ++l)
        out.f[1 + l] += prob * labels.at(cloud.pixel_index[i], PixelLabel(l));
    }
    // plane depth along this point's viewing ray
    const double pa = p[plane.axis];
    if (pa != 0.0) {
      const double plane_z = plane.offset * (p.z() / pa);
      if (plane_z > 0 && p.z() >= plane_z * (1.0 + behind_frac)) behind += 1;
    }
  }
  out.f[5] = behind;
  for (int k = 0; k < 5; ++k) out.f[6 + k] = behind > 0 ? out.f[k] / behind : 0.0;
  out.f[11] = prior.lookup(plane.category, plane.offset);
  return out;
}

}  // namespace scenecomp
