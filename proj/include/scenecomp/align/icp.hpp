#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "scenecomp/core/kdtree.hpp"
#include "scenecomp/core/point_cloud.hpp"

namespace scenecomp {

struct IcpParams {
  int max_iters = 30;
  double tol = 1e-4;           // meters; stop when the update is smaller
  double reject_radius = 0.25; // correspondence rejection distance
};

namespace detail {

struct IcpStep {
  Eigen::Vector3d mean_offset = Eigen::Vector3d::Zero();
  double mean_sq_dist = 0;
  long pairs = 0;
};

inline IcpStep icp_correspond(const std::vector<Eigen::Vector3d>& model, const KdTree3& target,
                              const Eigen::Vector3d& t, double reject_radius) {
  IcpStep step;
  const double r2 = reject_radius * reject_radius;
  for (const auto& p : model) {
    const Eigen::Vector3d q = p + t;
    const auto [idx, d2] = target.nearest(q);
    if (idx < 0 || d2 > r2) continue;
    step.mean_offset += target.point(idx) - q;
    step.mean_sq_dist += d2;
    ++step.pairs;
  }
  if (step.pairs > 0) {
    step.mean_offset /= double(step.pairs);
    step.mean_sq_dist /= double(step.pairs);
  }
  return step;
}

}  // namespace detail

// Translation-only ICP: nearest-neighbor correspondences, mean-offset
// update, correspondences farther than reject_radius dropped. An update
// that would increase the mean squared correspondence distance is
// rejected and iteration stops, so the error is non-increasing across
// accepted iterates.
inline Eigen::Vector3d icp_translation(const std::vector<Eigen::Vector3d>& model_points,
                                       const KdTree3& target, const Eigen::Vector3d& init_t,
                                       const IcpParams& params = {}) {
  if (model_points.empty() || target.size() == 0)
    throw std::invalid_argument("icp_translation: empty point cloud");

  Eigen::Vector3d t = init_t;
  auto step = detail::icp_correspond(model_points, target, t, params.reject_radius);
  for (int iter = 0; iter < params.max_iters; ++iter) {
    if (step.pairs == 0) break;
    if (step.mean_offset.norm() < params.tol) break;
    const Eigen::Vector3d t_next = t + step.mean_offset;
    const auto next = detail::icp_correspond(model_points, target, t_next, params.reject_radius);
    if (next.pairs == 0 || next.mean_sq_dist > step.mean_sq_dist) break;
    t = t_next;
    step = next;
  }
  return t;
}

inline Eigen::Vector3d icp_translation(const PointCloud& model, const PointCloud& target,
                                       const Eigen::Vector3d& init_t, const IcpParams& params = {}) {
  if (model.empty() || target.empty())
    throw std::invalid_argument("icp_translation: empty point cloud");
  return icp_translation(model.points, KdTree3(target.points), init_t, params);
}

}  // namespace scenecomp
