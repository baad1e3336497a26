#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/image.hpp"
#include "scenecomp/core/mesh.hpp"
#include "scenecomp/core/pose.hpp"

namespace scenecomp {

struct RenderResult {
  DepthImage depth;
  PixelMask mask;
};

struct RenderRange {
  DepthImage near_depth;
  DepthImage far_depth;
  PixelMask mask;
};

namespace detail {

constexpr double kZNear = 1e-6;

struct ScreenVert {
  double u, v, z;
};

// Coverage: pixel centers (integer coordinates) strictly inside, boundary
// pixels owned by top/left edges only so triangles sharing an edge never
// double-cover or leave seams.
inline bool edge_owns_boundary(double ex, double ey) { return ey != 0.0 ? ey < 0.0 : ex > 0.0; }

template <typename PixelFn>
void raster_screen_triangle(const ScreenVert& a, const ScreenVert& b, const ScreenVert& c, int width,
                            int height, PixelFn&& emit) {
  const ScreenVert* p0 = &a;
  const ScreenVert* p1 = &b;
  const ScreenVert* p2 = &c;
  double area2 = (p1->u - p0->u) * (p2->v - p0->v) - (p1->v - p0->v) * (p2->u - p0->u);
  if (area2 == 0.0) return;
  if (area2 < 0.0) {
    std::swap(p1, p2);
    area2 = -area2;
  }

  const int x0 = std::max(0, (int)std::ceil(std::min({p0->u, p1->u, p2->u})));
  const int x1 = std::min(width - 1, (int)std::floor(std::max({p0->u, p1->u, p2->u})));
  const int y0 = std::max(0, (int)std::ceil(std::min({p0->v, p1->v, p2->v})));
  const int y1 = std::min(height - 1, (int)std::floor(std::max({p0->v, p1->v, p2->v})));
  if (x0 > x1 || y0 > y1) return;

  const ScreenVert* e[3][2] = {{p0, p1}, {p1, p2}, {p2, p0}};
  bool owns[3];
  for (int k = 0; k < 3; ++k)
    owns[k] = edge_owns_boundary(e[k][1]->u - e[k][0]->u, e[k][1]->v - e[k][0]->v);

  const double iz0 = 1.0 / p0->z, iz1 = 1.0 / p1->z, iz2 = 1.0 / p2->z;
  const bool flat = (p0->z == p1->z) && (p1->z == p2->z);

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double w[3];
      bool inside = true;
      for (int k = 0; k < 3 && inside; ++k) {
        w[k] = (e[k][1]->u - e[k][0]->u) * (y - e[k][0]->v) -
               (e[k][1]->v - e[k][0]->v) * (x - e[k][0]->u);
        inside = w[k] > 0.0 || (w[k] == 0.0 && owns[k]);
      }
      if (!inside) continue;
      double z;
      if (flat) {
        z = p0->z;
      } else {
        // perspective-correct: 1/z is affine in screen space
        const double l0 = w[1] / area2, l1 = w[2] / area2, l2 = w[0] / area2;
        z = 1.0 / (l0 * iz0 + l1 * iz1 + l2 * iz2);
      }
      emit(x, y, z);
    }
  }
}

// Clips a camera-frame triangle against z >= kZNear, projects, rasterizes.
template <typename PixelFn>
void raster_camera_triangle(const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                            const Eigen::Vector3d& v2, const CameraIntrinsics& K, PixelFn&& emit) {
  std::array<Eigen::Vector3d, 4> poly;
  int n = 0;
  const Eigen::Vector3d in[3] = {v0, v1, v2};
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d& cur = in[i];
    const Eigen::Vector3d& nxt = in[(i + 1) % 3];
    const bool cin = cur.z() >= kZNear, nin = nxt.z() >= kZNear;
    if (cin) poly[n++] = cur;
    if (cin != nin) {
      const double t = (kZNear - cur.z()) / (nxt.z() - cur.z());
      poly[n++] = cur + t * (nxt - cur);
    }
  }
  if (n < 3) return;

  std::array<ScreenVert, 4> s;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d uv = K.project(poly[i]);
    s[i] = {uv.x(), uv.y(), poly[i].z()};
  }
  for (int i = 1; i + 1 < n; ++i)
    raster_screen_triangle(s[0], s[i], s[i + 1], K.width, K.height, emit);
}

}  // namespace detail

// Accumulates a posed mesh into shared near/far buffers; used for composite
// scene renders as well as single-object ones.
inline void rasterize_mesh(const TriangleMesh& mesh, const PoseTransform& pose,
                           const CameraIntrinsics& K, DepthImage& near_depth,
                           DepthImage* far_depth = nullptr) {
  const Eigen::Matrix3d r = pose.rotation();
  std::vector<Eigen::Vector3d> posed(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    posed[i] = r * (pose.scale * mesh.vertices[i]) + pose.translation;

  for (const auto& tri : mesh.triangles) {
    detail::raster_camera_triangle(posed[tri[0]], posed[tri[1]], posed[tri[2]], K,
                                   [&](int x, int y, double z) {
                                     const float zf = static_cast<float>(z);
                                     float& nd = near_depth.depth(x, y);
                                     if (!DepthImage::is_valid(nd) || zf < nd) nd = zf;
                                     if (far_depth) {
                                       float& fd = far_depth->depth(x, y);
                                       if (!DepthImage::is_valid(fd) || zf > fd) fd = zf;
                                     }
                                   });
  }
}

inline PixelMask mask_of(const DepthImage& depth) {
  PixelMask m(depth.width(), depth.height(), 0);
  for (size_t i = 0; i < depth.depth.size(); ++i)
    m.data[i] = DepthImage::is_valid(depth.depth.data[i]) ? 1 : 0;
  return m;
}

inline RenderRange render_depth_range(const TriangleMesh& mesh, const PoseTransform& pose,
                                      const CameraIntrinsics& K) {
  mesh.validate();
  pose.validate();
  K.validate();
  RenderRange out{DepthImage(K.width, K.height), DepthImage(K.width, K.height), {}};
  rasterize_mesh(mesh, pose, K, out.near_depth, &out.far_depth);
  out.mask = mask_of(out.near_depth);
  return out;
}

inline RenderResult render_depth(const TriangleMesh& mesh, const PoseTransform& pose,
                                 const CameraIntrinsics& K) {
  mesh.validate();
  pose.validate();
  K.validate();
  RenderResult out{DepthImage(K.width, K.height), {}};
  rasterize_mesh(mesh, pose, K, out.depth);
  out.mask = mask_of(out.depth);
  return out;
}

}  // namespace scenecomp
