#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace scenecomp {

// 3D kd-tree over a copied point set. Median split on the widest-spread
// axis, leaf size 8.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
    index_.resize(points_.size());
    std::iota(index_.begin(), index_.end(), 0);
    nodes_.reserve(points_.size() / kLeafSize * 2 + 1);
    if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()));
  }

  size_t size() const { return points_.size(); }
  const Eigen::Vector3d& point(int i) const { return points_[i]; }

  // Index of the nearest point and its squared distance; (-1, inf) if empty.
  std::pair<int, double> nearest(const Eigen::Vector3d& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    if (root_ >= 0) search_nearest(root_, q, best, best_d2);
    return {best, best_d2};
  }

  // Indices of all points within radius (inclusive), unordered.
  std::vector<int> radius_search(const Eigen::Vector3d& q, double radius) const {
    std::vector<int> out;
    if (root_ >= 0) search_radius(root_, q, radius * radius, out);
    return out;
  }

  bool any_within(const Eigen::Vector3d& q, double radius) const {
    auto [i, d2] = nearest(q);
    return i >= 0 && d2 <= radius * radius;
  }

 private:
  static constexpr int kLeafSize = 8;

  struct Node {
    int axis = -1;        // -1 for leaf
    double split = 0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into index_
  };

  int build(int begin, int end) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    Eigen::Vector3d lo = points_[index_[begin]], hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[index_[i]]);
      hi = hi.cwiseMax(points_[index_[i]]);
    }
    int axis;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    node.axis = axis;
    node.split = points_[index_[mid]][axis];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  void search_nearest(int ni, const Eigen::Vector3d& q, int& best, double& best_d2) const {
    const Node& n = nodes_[ni];
    if (n.axis < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const double d2 = (points_[index_[i]] - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && index_[i] < best)) {
          best_d2 = d2;
          best = index_[i];
        }
      }
      return;
    }
    const double delta = q[n.axis] - n.split;
    const int first = delta < 0 ? n.left : n.right;
    const int second = delta < 0 ? n.right : n.left;
    search_nearest(first, q, best, best_d2);
    if (delta * delta <= best_d2) search_nearest(second, q, best, best_d2);
  }

  void search_radius(int ni, const Eigen::Vector3d& q, double r2, std::vector<int>& out) const {
    const Node& n = nodes_[ni];
    if (n.axis < 0) {
      for (int i = n.begin; i < n.end; ++i)
        if ((points_[index_[i]] - q).squaredNorm() <= r2) out.push_back(index_[i]);
      return;
    }
    const double delta = q[n.axis] - n.split;
    const int first = delta < 0 ? n.left : n.right;
    const int second = delta < 0 ? n.right : n.left;
    search_radius(first, q, r2, out);
    if (delta * delta <= r2) search_radius(second, q, r2, out);
  }

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace scenecomp
