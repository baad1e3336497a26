#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/image.hpp"
#include "scenecomp/core/point_cloud.hpp"
#include "scenecomp/layout/plane.hpp"

namespace scenecomp {

struct ExtentParams {
  double hole_behind_frac = 0.05;  // observed depth beyond plane depth by this fraction opens a hole
  int min_hole_pixels = 50;        // smaller components are sensor speckle
};

// Bounds a detected plane: the extent starts from the orthogonal projection
// of all observed points, is cut back by every accepted perpendicular plane
// (each keeps its interior side), and rectangular holes are cut where
// connected pixel regions observe depth well behind the surface.
inline LayoutPlane plane_extent(LayoutPlane plane, const std::vector<LayoutPlane>& all_planes,
                                const DepthImage& depth, const CameraIntrinsics& K,
                                const ExtentParams& params = {}) {
  const int ua = plane.u_axis(), va = plane.v_axis();

  // extent from the projected observation
  plane.extent_lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  plane.extent_hi = -plane.extent_lo;
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid_at(x, y)) continue;
      const Eigen::Vector3d p = K.backproject_pixel(x, y, depth.at(x, y));
      plane.extent_lo = plane.extent_lo.cwiseMin(Eigen::Vector2d(p[ua], p[va]));
      plane.extent_hi = plane.extent_hi.cwiseMax(Eigen::Vector2d(p[ua], p[va]));
    }

  // perpendicular planes clip away everything on their outward side
  for (const auto& q : all_planes) {
    if (q.axis == plane.axis) continue;
    const int dim = q.axis == ua ? 0 : 1;
    if (q.normal_sign > 0)
      plane.extent_lo[dim] = std::max(plane.extent_lo[dim], q.offset);
    else
      plane.extent_hi[dim] = std::min(plane.extent_hi[dim], q.offset);
  }

  // pixels observing through the surface (inside the clipped extent),
  // grouped into 4-connected components
  const int W = depth.width(), H = depth.height();
  PixelMask behind(W, H, 0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      if (!depth.valid_at(x, y)) continue;
      const double pd = layout_plane_ray_depth(plane, K, x, y);
      if (!std::isfinite(pd)) continue;
      const Eigen::Vector3d p = K.ray(x, y) * pd;
      const Eigen::Vector2d uv(p[ua], p[va]);
      if (uv.x() < plane.extent_lo.x() || uv.x() > plane.extent_hi.x() ||
          uv.y() < plane.extent_lo.y() || uv.y() > plane.extent_hi.y())
        continue;
      if (double(depth.at(x, y)) >= pd * (1.0 + params.hole_behind_frac)) behind(x, y) = 1;
    }

  plane.holes.clear();
  Grid<uint8_t> visited(W, H, 0);
  for (int sy = 0; sy < H; ++sy)
    for (int sx = 0; sx < W; ++sx) {
      if (!behind(sx, sy) || visited(sx, sy)) continue;
      std::vector<std::pair<int, int>> component;
      std::deque<std::pair<int, int>> queue{{sx, sy}};
      visited(sx, sy) = 1;
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        component.emplace_back(x, y);
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k)
          if (behind.in_bounds(nx[k], ny[k]) && behind(nx[k], ny[k]) && !visited(nx[k], ny[k])) {
            visited(nx[k], ny[k]) = 1;
            queue.emplace_back(nx[k], ny[k]);
          }
      }
      if (int(component.size()) < params.min_hole_pixels) continue;

      HoleRect hole;
      hole.lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
      hole.hi = -hole.lo;
      for (const auto& [x, y] : component) {
        const double t = layout_plane_ray_depth(plane, K, x, y);
        const Eigen::Vector3d p = K.ray(x, y) * t;
        hole.lo = hole.lo.cwiseMin(Eigen::Vector2d(p[ua], p[va]));
        hole.hi = hole.hi.cwiseMax(Eigen::Vector2d(p[ua], p[va]));
      }
      hole.lo = hole.lo.cwiseMax(plane.extent_lo);
      hole.hi = hole.hi.cwiseMin(plane.extent_hi);
      if (hole.lo.x() < hole.hi.x() && hole.lo.y() < hole.hi.y()) plane.holes.push_back(hole);
    }
  return plane;
}

// Candidate support heights: histogram peaks of point height (-y) over
// horizontal surfaces, strongest first.
inline std::vector<double> support_height_candidates(const PointCloud& cloud, double bin = 0.03,
                                                     double vertical_dot = 0.95) {
  std::vector<double> heights;
  for (size_t i = 0; i < cloud.size(); ++i)
    if (cloud.has_normal(i) && std::abs(cloud.normals[i].y()) >= vertical_dot)
      heights.push_back(-cloud.points[i].y());
  if (heights.empty()) return {};

  const auto [lo_it, hi_it] = std::minmax_element(heights.begin(), heights.end());
  const double lo = *lo_it;
  const int bins = int(std::floor((*hi_it - lo) / bin)) + 1;
  std::vector<long> counts(bins, 0);
  for (double h : heights) ++counts[std::min(bins - 1, int((h - lo) / bin))];

  std::vector<std::pair<long, double>> peaks;  // (mass, height)
  for (int i = 0; i < bins; ++i) {
    const long prev = i > 0 ? counts[i - 1] : -1;
    const long next = i + 1 < bins ? counts[i + 1] : -1;
    if (counts[i] >= prev && counts[i] > next && counts[i] > 0)
      peaks.emplace_back(counts[i], lo + (i + 0.5) * bin);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<double> out;
  out.reserve(peaks.size());
  for (const auto& [mass, h] : peaks) out.push_back(h);
  return out;
}

}  // namespace scenecomp
