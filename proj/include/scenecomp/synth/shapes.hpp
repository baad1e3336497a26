#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "scenecomp/core/mesh.hpp"

namespace scenecomp {

// Axis-aligned box spanning [lo, hi].
inline TriangleMesh make_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                            i & 4 ? hi.z() : lo.z());
  // two triangles per face, outward winding
  const int faces[6][4] = {{0, 2, 6, 4}, {1, 5, 7, 3}, {0, 4, 5, 1},
                           {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 6, 7, 5}};
  for (const auto& f : faces) {
    m.triangles.push_back({f[0], f[1], f[2]});
    m.triangles.push_back({f[0], f[2], f[3]});
  }
  return m;
}

inline TriangleMesh make_box_centered(const Eigen::Vector3d& center, const Eigen::Vector3d& size) {
  return make_box(center - size / 2, center + size / 2);
}

// Vertical-axis cylinder centered at origin spanning y in [-h/2, h/2].
inline TriangleMesh make_cylinder(double radius, double height, int segments = 16) {
  TriangleMesh m;
  const double h2 = height / 2;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    const double x = radius * std::cos(a), z = radius * std::sin(a);
    m.vertices.emplace_back(x, -h2, z);
    m.vertices.emplace_back(x, h2, z);
  }
  const int top = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0, -h2, 0);
  m.vertices.emplace_back(0, h2, 0);
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int a0 = 2 * i, a1 = 2 * i + 1, b0 = 2 * j, b1 = 2 * j + 1;
    m.triangles.push_back({a0, b0, a1});
    m.triangles.push_back({a1, b0, b1});
    m.triangles.push_back({top, a0, b0});      // bottom cap (y = -h/2)
    m.triangles.push_back({top + 1, b1, a1});  // top cap
  }
  return m;
}

inline void append_mesh(TriangleMesh& dst, const TriangleMesh& src) {
  const int base = static_cast<int>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& t : src.triangles)
    dst.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

// Yaw-asymmetric L-shaped compound of two boxes spanning
// [-height/2, height/2] vertically.
inline TriangleMesh make_lshape(double width, double height, double depth) {
  TriangleMesh m = make_box({-width / 2, 0, -depth / 2}, {width / 2, height / 2, depth / 2});
  append_mesh(m, make_box({-width / 2, -height / 2, -depth / 2},
                          {width / 2, 0.0, -depth / 2 + depth * 0.35}));
  return m;
}

}  // namespace scenecomp
