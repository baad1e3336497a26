#pragma once

#include <Eigen/Core>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/image.hpp"
#include "scenecomp/core/render.hpp"

namespace scenecomp {

enum class LayoutCategory { Floor = 0, Ceiling = 1, LeftWall = 2, RightWall = 3, FrontWall = 4 };
constexpr int kLayoutCategories = 5;

inline const char* to_string(LayoutCategory c) {
  switch (c) {
    case LayoutCategory::Floor: return "floor";
    case LayoutCategory::Ceiling: return "ceiling";
    case LayoutCategory::LeftWall: return "left-wall";
    case LayoutCategory::RightWall: return "right-wall";
    case LayoutCategory::FrontWall: return "front-wall";
  }
  return "?";
}

inline LayoutCategory layout_category_from_string(const std::string& s) {
  for (int i = 0; i < kLayoutCategories; ++i)
    if (s == to_string(LayoutCategory(i))) return LayoutCategory(i);
  throw std::invalid_argument("unknown layout category: " + s);
}

struct HoleRect {
  Eigen::Vector2d lo, hi;  // plane coordinates
  bool operator==(const HoleRect&) const = default;
};

// Axis-aligned layout surface. The normal points into the room (toward the
// camera side); the y axis points down, so a floor normal is -e_y. Plane
// coordinates are the two remaining world axes in cyclic order
// ((axis+1)%3, (axis+2)%3).
struct LayoutPlane {
  LayoutCategory category = LayoutCategory::Floor;
  int axis = 1;
  double normal_sign = -1.0;
  double offset = 0.0;  // plane position along its axis, meters
  Eigen::Vector2d extent_lo{-std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()};
  Eigen::Vector2d extent_hi{std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()};
  std::vector<HoleRect> holes;
  double score = 0.0;

  int u_axis() const { return (axis + 1) % 3; }
  int v_axis() const { return (axis + 2) % 3; }

  Eigen::Vector3d normal() const {
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    n[axis] = normal_sign;
    return n;
  }

  static LayoutPlane from_category(LayoutCategory c, double offset) {
    LayoutPlane p;
    p.category = c;
    p.offset = offset;
    switch (c) {
      case LayoutCategory::Floor: p.axis = 1; p.normal_sign = -1; break;    // up
      case LayoutCategory::Ceiling: p.axis = 1; p.normal_sign = +1; break;  // down
      case LayoutCategory::LeftWall: p.axis = 0; p.normal_sign = +1; break;
      case LayoutCategory::RightWall: p.axis = 0; p.normal_sign = -1; break;
      case LayoutCategory::FrontWall: p.axis = 2; p.normal_sign = -1; break;
    }
    return p;
  }

  bool contains_plane_point(const Eigen::Vector2d& uv) const {
    if (uv.x() < extent_lo.x() || uv.x() > extent_hi.x() || uv.y() < extent_lo.y() ||
        uv.y() > extent_hi.y())
      return false;
    for (const auto& h : holes)
      if (uv.x() >= h.lo.x() && uv.x() <= h.hi.x() && uv.y() >= h.lo.y() && uv.y() <= h.hi.y())
        return false;
    return true;
  }
};

// Depth at which the infinite plane meets the ray of pixel (x, y);
// NaN when the ray never reaches it in front of the camera.
inline double layout_plane_ray_depth(const LayoutPlane& plane, const CameraIntrinsics& K, int x,
                                     int y) {
  const Eigen::Vector3d dir = K.ray(x, y);
  const double denom = dir[plane.axis];
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double t = plane.offset / denom;
  if (t < detail::kZNear) return std::numeric_limits<double>::quiet_NaN();
  return t;  // dir.z == 1, so the parameter is the depth
}

// Analytic render of the bounded surface (extent minus holes); near == far.
inline RenderRange render_layout(const LayoutPlane& plane, const CameraIntrinsics& K) {
  RenderRange out{DepthImage(K.width, K.height), DepthImage(K.width, K.height),
                  PixelMask(K.width, K.height, 0)};
  for (int y = 0; y < K.height; ++y)
    for (int x = 0; x < K.width; ++x) {
      const double t = layout_plane_ray_depth(plane, K, x, y);
      if (!std::isfinite(t)) continue;
      const Eigen::Vector3d p = K.ray(x, y) * t;
      if (!plane.contains_plane_point({p[plane.u_axis()], p[plane.v_axis()]})) continue;
      out.near_depth.set(x, y, float(t));
      out.far_depth.set(x, y, float(t));
      out.mask(x, y) = 1;
    }
  return out;
}

}  // namespace scenecomp
