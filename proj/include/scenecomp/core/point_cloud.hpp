#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/image.hpp"

namespace scenecomp {

// One point per non-missing depth pixel, camera frame. Normals are unit
// vectors oriented toward the camera; NaN where a central-difference
// neighbor is missing.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  std::vector<int> pixel_index;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normal(size_t i) const { return std::isfinite(normals[i].x()); }
};

inline PointCloud backproject(const DepthImage& depth, const CameraIntrinsics& K) {
  K.validate();
  if (depth.width() != K.width || depth.height() != K.height)
    throw std::invalid_argument("backproject: depth dimensions do not match intrinsics");

  const auto nan3 = Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  PointCloud cloud;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const float d = depth.at(x, y);
      if (!DepthImage::is_valid(d)) continue;
      cloud.points.push_back(K.backproject_pixel(x, y, d));
      cloud.pixel_index.push_back(y * depth.width() + x);

      // Central differences over the four axis neighbors.
      Eigen::Vector3d n = nan3;
      if (x > 0 && x + 1 < depth.width() && y > 0 && y + 1 < depth.height() &&
          depth.valid_at(x - 1, y) && depth.valid_at(x + 1, y) && depth.valid_at(x, y - 1) &&
          depth.valid_at(x, y + 1)) {
        const Eigen::Vector3d dx = K.backproject_pixel(x + 1, y, depth.at(x + 1, y)) -
                                   K.backproject_pixel(x - 1, y, depth.at(x - 1, y));
        const Eigen::Vector3d dy = K.backproject_pixel(x, y + 1, depth.at(x, y + 1)) -
                                   K.backproject_pixel(x, y - 1, depth.at(x, y - 1));
        Eigen::Vector3d c = dx.cross(dy);
        const double len = c.norm();
        if (len > 1e-12) {
          c /= len;
          if (c.dot(cloud.points.back()) > 0) c = -c;  // face the camera
          n = c;
        }
      }
      cloud.normals.push_back(n);
    }
  }
  return cloud;
}

}  // namespace scenecomp
