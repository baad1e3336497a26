#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace scenecomp {

// Pinhole camera, x right / y down / z forward, depth = z.
// Integer pixel indices are the sample coordinates (pixel centers on the
// integer grid), so projection of a backprojected point lands exactly on
// its source pixel.
struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("camera: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera: image size must be positive");
    if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
      throw std::invalid_argument("camera: principal point outside image");
  }

  // Continuous pixel coordinates of a camera-frame point (z > 0).
  Eigen::Vector2d project(const Eigen::Vector3d& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }

  // Unit-depth ray direction through pixel (u, v); z component is 1, so the
  // ray parameter equals metric depth.
  Eigen::Vector3d ray(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }

  Eigen::Vector3d backproject_pixel(double u, double v, double z) const { return ray(u, v) * z; }

  bool operator==(const CameraIntrinsics&) const = default;
};

}  // namespace scenecomp
