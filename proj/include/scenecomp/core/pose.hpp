#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "scenecomp/core/mesh.hpp"

namespace scenecomp {

inline double normalize_yaw(double yaw) {
  const double two_pi = 2.0 * std::numbers::pi;
  yaw = std::fmod(yaw, two_pi);
  if (yaw <= -std::numbers::pi) yaw += two_pi;
  if (yaw > std::numbers::pi) yaw -= two_pi;
  return yaw;
}

// Similarity transform restricted to yaw about the vertical (y) axis:
// p' = R_yaw * (scale * p) + translation.
struct PoseTransform {
  double yaw = 0.0;
  double scale = 1.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  void validate() const {
    if (!(scale > 0)) throw std::invalid_argument("pose: scale must be positive");
    if (!std::isfinite(yaw)) throw std::invalid_argument("pose: yaw must be finite");
  }

  Eigen::Matrix3d rotation() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    Eigen::Matrix3d r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation() * (scale * p) + translation; }

  TriangleMesh apply(const TriangleMesh& mesh) const {
    TriangleMesh out;
    out.triangles = mesh.triangles;
    out.vertices.reserve(mesh.vertices.size());
    const Eigen::Matrix3d r = rotation();
    for (const auto& v : mesh.vertices) out.vertices.push_back(r * (scale * v) + translation);
    return out;
  }

  bool operator==(const PoseTransform&) const = default;
};

}  // namespace scenecomp
