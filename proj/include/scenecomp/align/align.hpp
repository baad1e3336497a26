#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "scenecomp/align/fitting.hpp"
#include "scenecomp/align/icp.hpp"
#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/parallel.hpp"
#include "scenecomp/core/point_cloud.hpp"
#include "scenecomp/core/pose.hpp"
#include "scenecomp/core/render.hpp"

namespace scenecomp {

struct AlignParams {
  int yaw_steps = 16;                  // equally spaced over [-180, 180)
  std::vector<double> scales{1.0, 0.9};  // relative to the init pose
  IcpParams icp;
  int threads = 1;
};

struct AlignmentResult {
  PoseTransform pose;
  double cost = 0;  // fitting_cost of (mesh, pose) against the observation
  RenderResult render;
};

namespace detail {

inline Eigen::Vector3d region_mass_center(const DepthImage& observed, const PixelMask& region,
                                          const CameraIntrinsics& K, long& count) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  count = 0;
  for (int y = 0; y < observed.height(); ++y)
    for (int x = 0; x < observed.width(); ++x) {
      if (!region(x, y) || !observed.valid_at(x, y)) continue;
      c += K.backproject_pixel(x, y, observed.at(x, y));
      ++count;
    }
  if (count > 0) c /= double(count);
  return c;
}

// Mass center of the model's rendered depth points; falls back to the posed
// vertex centroid when the render is empty.
inline Eigen::Vector3d model_mass_center(const TriangleMesh& mesh, const PoseTransform& pose,
                                         const CameraIntrinsics& K) {
  const auto r = render_depth(mesh, pose, K);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  long n = 0;
  for (int y = 0; y < r.depth.height(); ++y)
    for (int x = 0; x < r.depth.width(); ++x) {
      if (!r.mask(x, y)) continue;
      c += K.backproject_pixel(x, y, r.depth.at(x, y));
      ++n;
    }
  if (n > 0) return c / double(n);
  return pose.apply(mesh).centroid();
}

}  // namespace detail

// Pose search: yaw grid x scale set relative to init, each branch seeded by
// the offset between the depth-point mass centers of the region and the
// rendered model, refined by translational ICP, scored by fitting_cost. The
// unmodified init pose is also evaluated so the result never scores worse
// than it. Ties resolve to the earliest branch in grid order (yaw ascending
// from -180, scales in the given order).
inline AlignmentResult align_model(const TriangleMesh& mesh, const PixelMask& region,
                                   const DepthImage& observed, const CameraIntrinsics& K,
                                   const FitWeights& w, const PoseTransform& init,
                                   const AlignParams& params = {}) {
  mesh.validate();
  init.validate();

  long region_points = 0;
  const Eigen::Vector3d region_center = detail::region_mass_center(observed, region, K, region_points);
  if (region_points == 0)
    throw std::invalid_argument("align_model: region has no usable observed depth");

  std::vector<Eigen::Vector3d> target_points;
  target_points.reserve(region_points);
  for (int y = 0; y < observed.height(); ++y)
    for (int x = 0; x < observed.width(); ++x)
      if (region(x, y) && observed.valid_at(x, y))
        target_points.push_back(K.backproject_pixel(x, y, observed.at(x, y)));
  const KdTree3 target(std::move(target_points));

  AlignmentResult best;
  best.pose = init;
  best.render = render_depth(mesh, init, K);
  best.cost = fitting_cost(best.render, observed, region, w);

  const int branches = params.yaw_steps * int(params.scales.size());
  std::vector<AlignmentResult> results(branches);
  parallel_for(
      branches,
      [&](int b) {
        const int yaw_index = b / int(params.scales.size());
        const int scale_index = b % int(params.scales.size());
        PoseTransform pose;
        pose.yaw = normalize_yaw(init.yaw - std::numbers::pi +
                                 2.0 * std::numbers::pi * yaw_index / params.yaw_steps);
        pose.scale = init.scale * params.scales[scale_index];
        pose.translation = init.translation;

        const Eigen::Vector3d model_center = detail::model_mass_center(mesh, pose, K);
        const Eigen::Vector3d seed = init.translation + (region_center - model_center);

        // visible-surface samples at the seeded pose; matching raw mesh
        // corners would let hidden vertices drag the translation
        std::vector<Eigen::Vector3d> model_points;
        PoseTransform seeded = pose;
        seeded.translation = seed;
        const auto seed_render = render_depth(mesh, seeded, K);
        for (int sy = 0; sy < K.height; ++sy)
          for (int sx = 0; sx < K.width; ++sx)
            if (seed_render.mask(sx, sy))
              model_points.push_back(K.backproject_pixel(sx, sy, seed_render.depth.at(sx, sy)) -
                                     seed);
        if (model_points.empty()) {
          const Eigen::Matrix3d r = pose.rotation();
          for (const auto& v : mesh.vertices) model_points.push_back(r * (pose.scale * v));
        }

        pose.translation = icp_translation(model_points, target, seed, params.icp);
        AlignmentResult out;
        out.pose = pose;
        out.render = render_depth(mesh, pose, K);
        out.cost = fitting_cost(out.render, observed, region, w);
        results[b] = std::move(out);
      },
      params.threads);

  for (auto& r : results)
    if (r.cost < best.cost) best = std::move(r);
  return best;
}

// Pre-ICP orientation cost used for batch pruning: best fitting_cost over
// the yaw grid at unit relative scale with the mass-center seed only.
inline double orientation_scan_cost(const TriangleMesh& mesh, const PixelMask& region,
                                    const DepthImage& observed, const CameraIntrinsics& K,
                                    const FitWeights& w, const PoseTransform& init,
                                    const AlignParams& params = {}) {
  long region_points = 0;
  const Eigen::Vector3d region_center = detail::region_mass_center(observed, region, K, region_points);
  if (region_points == 0)
    throw std::invalid_argument("orientation_scan_cost: region has no usable observed depth");
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < params.yaw_steps; ++k) {
    PoseTransform pose;
    pose.yaw = normalize_yaw(init.yaw - std::numbers::pi + 2.0 * std::numbers::pi * k / params.yaw_steps);
    pose.scale = init.scale;
    pose.translation = init.translation;
    const Eigen::Vector3d model_center = detail::model_mass_center(mesh, pose, K);
    pose.translation = init.translation + (region_center - model_center);
    const auto render = render_depth(mesh, pose, K);
    best = std::min(best, fitting_cost(render, observed, region, w));
  }
  return best;
}

// Aligns a set of candidate meshes for one region and returns the index and
// alignment of the best. With prune_top5, only the five best meshes by
// pre-ICP orientation cost receive the full search.
inline std::pair<int, AlignmentResult> align_best_model(const std::vector<TriangleMesh>& meshes,
                                                        const std::vector<PoseTransform>& inits,
                                                        const PixelMask& region,
                                                        const DepthImage& observed,
                                                        const CameraIntrinsics& K, const FitWeights& w,
                                                        bool prune_top5 = false,
                                                        const AlignParams& params = {}) {
  if (meshes.empty() || meshes.size() != inits.size())
    throw std::invalid_argument("align_best_model: bad model set");

  std::vector<int> order(meshes.size());
  std::iota(order.begin(), order.end(), 0);
  if (prune_top5 && meshes.size() > 5) {
    std::vector<double> scan(meshes.size());
    for (size_t i = 0; i < meshes.size(); ++i)
      scan[i] = orientation_scan_cost(meshes[i], region, observed, K, w, inits[i], params);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scan[a] < scan[b]; });
    order.resize(5);
  }

  int best_index = -1;
  AlignmentResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int i : order) {
    auto res = align_model(meshes[i], region, observed, K, w, inits[i], params);
    if (res.cost < best.cost || (res.cost == best.cost && i < best_index)) {
      best = std::move(res);
      best_index = i;
    }
  }
  return {best_index, std::move(best)};
}

}  // namespace scenecomp
