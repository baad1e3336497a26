#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "scenecomp/compose/candidate.hpp"
#include "scenecomp/compose/selection.hpp"
#include "scenecomp/core/camera.hpp"
#include "scenecomp/layout/plane.hpp"

namespace scenecomp {

// Occupancy over a camera-frame lattice. Occupancy is meaningful only where
// in_scope is set (inside the evaluated layout volume and the view frustum).
struct VoxelGrid {
  double resolution = 0.03;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();  // min corner
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<uint8_t> occupancy;
  std::vector<uint8_t> in_scope;

  size_t cell_count() const { return size_t(dims.x()) * dims.y() * dims.z(); }
  size_t index(int ix, int iy, int iz) const {
    return (size_t(iz) * dims.y() + iy) * dims.x() + ix;
  }
  Eigen::Vector3d center(int ix, int iy, int iz) const {
    return origin + resolution * Eigen::Vector3d(ix + 0.5, iy + 0.5, iz + 0.5);
  }
  bool contains(const Eigen::Vector3i& c) const {
    return c.x() >= 0 && c.x() < dims.x() && c.y() >= 0 && c.y() < dims.y() && c.z() >= 0 &&
           c.z() < dims.z();
  }
  Eigen::Vector3i cell_of(const Eigen::Vector3d& p) const {
    return {int(std::floor((p.x() - origin.x()) / resolution)),
            int(std::floor((p.y() - origin.y()) / resolution)),
            int(std::floor((p.z() - origin.z()) / resolution))};
  }
  bool same_frame(const VoxelGrid& o) const {
    return resolution == o.resolution && origin == o.origin && dims == o.dims &&
           in_scope == o.in_scope;
  }
  size_t occupied_count() const {
    size_t n = 0;
    for (size_t i = 0; i < occupancy.size(); ++i) n += occupancy[i] && in_scope[i];
    return n;
  }
};

// Frame covering the box, scope = inside box and inside the view frustum.
inline VoxelGrid make_voxel_grid(const Eigen::AlignedBox3d& box, double resolution,
                                 const CameraIntrinsics& K) {
  if (!(resolution > 0)) throw std::invalid_argument("voxel grid: resolution must be positive");
  VoxelGrid g;
  g.resolution = resolution;
  g.origin = box.min();
  for (int k = 0; k < 3; ++k)
    g.dims[k] = std::max(1, int(std::ceil((box.max()[k] - box.min()[k]) / resolution)));
  g.occupancy.assign(g.cell_count(), 0);
  g.in_scope.assign(g.cell_count(), 0);
  for (int iz = 0; iz < g.dims.z(); ++iz)
    for (int iy = 0; iy < g.dims.y(); ++iy)
      for (int ix = 0; ix < g.dims.x(); ++ix) {
        const Eigen::Vector3d c = g.center(ix, iy, iz);
        if (c.z() < detail::kZNear) continue;
        const Eigen::Vector2d uv = K.project(c);
        if (uv.x() < -0.5 || uv.x() >= K.width - 0.5 || uv.y() < -0.5 || uv.y() >= K.height - 0.5)
          continue;
        g.in_scope[g.index(ix, iy, iz)] = 1;
      }
  return g;
}

// Axis-aligned volume spanned by the layout surfaces, starting at the camera
// plane; axes with no bounding plane fall back to the given box.
inline Eigen::AlignedBox3d layout_bounds(const std::vector<LayoutPlane>& layouts,
                                         const Eigen::AlignedBox3d& fallback) {
  Eigen::AlignedBox3d box = fallback;
  for (int axis = 0; axis < 3; ++axis) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : layouts)
      if (p.axis == axis) {
        lo = std::min(lo, p.offset);
        hi = std::max(hi, p.offset);
      }
    if (std::isfinite(lo)) {
      box.min()[axis] = axis == 2 ? 0.0 : lo;  // depth starts at the camera
      box.max()[axis] = hi;
    }
  }
  return box;
}

namespace detail {

template <typename MarkFn>
void fill_ray_spans(const RenderRange& range, const CameraIntrinsics& K, double step, double shrink,
                    MarkFn&& mark) {
  for (int y = 0; y < K.height; ++y)
    for (int x = 0; x < K.width; ++x) {
      if (!range.mask(x, y)) continue;
      double near = range.near_depth.at(x, y);
      double far = range.far_depth.at(x, y);
      // pull both ends in half a voxel so marked cells track voxel centers
      // instead of dilating the solid outward
      if (far - near > 2 * shrink) {
        near += shrink;
        far -= shrink;
      } else {
        near = far = (near + far) / 2;
      }
      const Eigen::Vector3d dir = K.ray(x, y);
      const int n = std::max(1, int(std::ceil((far - near) / step)));
      for (int s = 0; s <= n; ++s) mark(dir * (near + (far - near) * s / n));
    }
}

inline CameraIntrinsics supersampled(const CameraIntrinsics& K, int s) {
  CameraIntrinsics out = K;
  out.fx *= s;
  out.fy *= s;
  out.cx *= s;
  out.cy *= s;
  out.width *= s;
  out.height *= s;
  return out;
}

inline int supersample_for(double max_depth, const CameraIntrinsics& K, double resolution,
                           int cap = 8) {
  // at least two rays per voxel at the farthest depth
  const double footprint = max_depth / std::min(K.fx, K.fy);
  return std::clamp(int(std::ceil(2.0 * footprint / resolution)), 1, cap);
}

}  // namespace detail

// Renders each selected model separately (at a supersampled resolution so
// rays are denser than voxels) and fills every voxel between the near and
// far hit along each ray. Occupancy is the union over models and layouts.
inline VoxelGrid voxelize_scene(const std::vector<Candidate>& candidates,
                                const std::vector<uint8_t>& selected_candidates,
                                const std::vector<LayoutPlane>& layouts,
                                const std::vector<uint8_t>& selected_layouts,
                                const CameraIntrinsics& K, const VoxelGrid& frame) {
  if (selected_candidates.size() != candidates.size() || selected_layouts.size() != layouts.size())
    throw std::invalid_argument("voxelize_scene: selection sizes do not match");
  VoxelGrid grid = frame;
  std::fill(grid.occupancy.begin(), grid.occupancy.end(), 0);
  const double step = grid.resolution / 2;

  const auto mark = [&](const Eigen::Vector3d& p) {
    const Eigen::Vector3i c = grid.cell_of(p);
    if (!grid.contains(c)) return;
    const size_t i = grid.index(c.x(), c.y(), c.z());
    if (grid.in_scope[i]) grid.occupancy[i] = 1;
  };

  for (size_t i = 0; i < candidates.size(); ++i) {
    if (!selected_candidates[i]) continue;
    double max_depth = 0;
    for (float d : candidates[i].depth_range.far_depth.depth.data)
      if (DepthImage::is_valid(d)) max_depth = std::max(max_depth, double(d));
    if (max_depth == 0) continue;
    const auto Ks = detail::supersampled(K, detail::supersample_for(max_depth, K, grid.resolution));
    const auto range = render_depth_range(candidates[i].mesh, candidates[i].pose, Ks);
    detail::fill_ray_spans(range, Ks, step, grid.resolution / 2, mark);
  }
  for (size_t i = 0; i < layouts.size(); ++i) {
    if (!selected_layouts[i]) continue;
    const auto coarse = render_layout(layouts[i], K);
    double max_depth = 0;
    for (float d : coarse.far_depth.depth.data)
      if (DepthImage::is_valid(d)) max_depth = std::max(max_depth, double(d));
    if (max_depth == 0) continue;
    const auto Ks = detail::supersampled(K, detail::supersample_for(max_depth, K, grid.resolution));
    detail::fill_ray_spans(render_layout(layouts[i], Ks), Ks, step, grid.resolution / 2, mark);
  }
  return grid;
}

inline VoxelGrid voxelize_scene(const SceneHypothesis& hyp, const std::vector<Candidate>& candidates,
                                const std::vector<LayoutPlane>& layouts, const CameraIntrinsics& K,
                                const VoxelGrid& frame) {
  return voxelize_scene(candidates, hyp.selected_candidates, layouts, hyp.selected_layouts, K, frame);
}

}  // namespace scenecomp
