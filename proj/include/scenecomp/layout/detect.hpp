#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "scenecomp/core/point_cloud.hpp"
#include "scenecomp/layout/features.hpp"
#include "scenecomp/layout/plane.hpp"

namespace scenecomp {

struct PlaneScorer {
  std::array<double, 12> weights{};
  double bias = 0;

  double score(const PlaneFeatures& f) const {
    double s = bias;
    for (int i = 0; i < 12; ++i) s += weights[i] * f.f[i];
    return s;
  }
};

// Hand-set default emphasizing plane support (f1), the category's own label
// weight, the object-label penalty, and the position prior. Trained weights
// can be supplied through the run configuration instead.
inline PlaneScorer default_plane_scorer(LayoutCategory c) {
  PlaneScorer s;
  s.weights[0] = 0.5;
  const PixelLabel own = c == LayoutCategory::Floor     ? PixelLabel::Floor
                         : c == LayoutCategory::Ceiling ? PixelLabel::Ceiling
                                                        : PixelLabel::Wall;
  s.weights[1 + static_cast<int>(own)] = 1.0;
  s.weights[1 + static_cast<int>(PixelLabel::Object)] = -1.0;
  s.weights[11] = 1.0;
  return s;
}

struct LayoutDetectParams {
  double sweep_step = 0.05;   // offset sampling along each axis, meters
  double nms_radius = 0.15;
  double sigma_p = kDefaultSigmaP;
  double sigma_n = kDefaultSigmaN;
  double behind_frac = 0.03;
  double score_threshold = 20.0;
  PositionPrior prior;
  std::array<PlaneScorer, kLayoutCategories> scorers{
      default_plane_scorer(LayoutCategory::Floor), default_plane_scorer(LayoutCategory::Ceiling),
      default_plane_scorer(LayoutCategory::LeftWall), default_plane_scorer(LayoutCategory::RightWall),
      default_plane_scorer(LayoutCategory::FrontWall)};
};

// Greedy suppression: keep the strongest plane, drop same-category planes
// within the radius, repeat. Ties resolve by (category, offset).
inline std::vector<LayoutPlane> nms_planes(std::vector<LayoutPlane> planes, double radius = 0.15) {
  std::stable_sort(planes.begin(), planes.end(), [](const LayoutPlane& a, const LayoutPlane& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.category != b.category) return a.category < b.category;
    return a.offset < b.offset;
  });
  std::vector<LayoutPlane> kept;
  for (const auto& p : planes) {
    bool suppressed = false;
    for (const auto& k : kept)
      if (k.category == p.category && std::abs(k.offset - p.offset) <= radius) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(p);
  }
  return kept;
}

namespace detail {

// Sub-step peak refinement. The support profile around a true plane is
// near-Gaussian, which is an exact parabola in log space, so fit there when
// all three samples are positive; fall back to the raw values otherwise.
inline double parabola_refine(double s_prev, double s0, double s_next) {
  double a = s_prev, b = s0, c = s_next;
  if (a > 0 && b > 0 && c > 0) {
    a = std::log(a);
    b = std::log(b);
    c = std::log(c);
  }
  const double denom = a - 2 * b + c;
  if (denom >= 0) return 0.0;  // not a proper maximum
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

}  // namespace detail

// Sweeps candidate offsets along each category's axis, scores each plane,
// keeps local maxima above threshold with a quadratic sub-step refinement,
// then suppresses near-duplicates.
inline std::vector<LayoutPlane> detect_planes(const PointCloud& cloud, const PixelLabelProbs& labels,
                                              const LayoutDetectParams& params = {}) {
  if (cloud.empty()) throw std::invalid_argument("detect_planes: empty point cloud");

  std::vector<LayoutPlane> detections;
  for (int c = 0; c < kLayoutCategories; ++c) {
    const auto category = LayoutCategory(c);
    const int axis = LayoutPlane::from_category(category, 0).axis;

    double lo = cloud.points[0][axis], hi = lo;
    for (const auto& p : cloud.points) {
      lo = std::min(lo, p[axis]);
      hi = std::max(hi, p[axis]);
    }
    // pad both ends so boundary planes keep neighbors for refinement
    lo -= params.sweep_step;
    const int steps = std::max(1, int(std::floor((hi - lo) / params.sweep_step)) + 3);
    std::vector<double> scores(steps);
    for (int i = 0; i < steps; ++i) {
      const auto plane = LayoutPlane::from_category(category, lo + i * params.sweep_step);
      scores[i] = params.scorers[c].score(plane_features(plane, cloud, labels, params.prior,
                                                         params.sigma_p, params.sigma_n,
                                                         params.behind_frac));
    }
    for (int i = 0; i < steps; ++i) {
      const double prev = i > 0 ? scores[i - 1] : -std::numeric_limits<double>::infinity();
      const double next = i + 1 < steps ? scores[i + 1] : -std::numeric_limits<double>::infinity();
      if (!(scores[i] >= prev && scores[i] > next)) continue;

      const auto score_at = [&](double off) {
        return params.scorers[c].score(plane_features(LayoutPlane::from_category(category, off),
                                                      cloud, labels, params.prior, params.sigma_p,
                                                      params.sigma_n, params.behind_frac));
      };
      double offset = lo + i * params.sweep_step;
      double score = scores[i];
      if (i > 0 && i + 1 < steps) {
        const double dx = detail::parabola_refine(scores[i - 1], scores[i], scores[i + 1]);
        if (dx != 0.0) {
          const double off = offset + dx * params.sweep_step;
          const double rs = score_at(off);
          if (rs >= score) {
            offset = off;
            score = rs;
          }
        }
        // fine pass around the coarse peak
        const double fine = params.sweep_step / 5;
        double best_off = offset, best_score = score;
        double tri[3] = {0, 0, 0};
        for (int k = -2; k <= 2; ++k) {
          const double off = offset + k * fine;
          const double sc = k == 0 ? score : score_at(off);
          if (sc > best_score) {
            best_score = sc;
            best_off = off;
          }
        }
        tri[0] = score_at(best_off - fine);
        tri[1] = best_score;
        tri[2] = score_at(best_off + fine);
        const double fx = detail::parabola_refine(tri[0], tri[1], tri[2]);
        if (fx != 0.0) {
          const double off = best_off + fx * fine;
          const double sc = score_at(off);
          if (sc >= best_score) {
            best_score = sc;
            best_off = off;
          }
        }
        offset = best_off;
        score = best_score;
      }
      if (score <= params.score_threshold) continue;
      auto plane = LayoutPlane::from_category(category, offset);
      plane.score = score;
      detections.push_back(plane);
    }
  }
  return nms_planes(std::move(detections), params.nms_radius);
}

inline std::vector<LayoutPlane> detect_planes(const DepthImage& depth, const CameraIntrinsics& K,
                                              const PixelLabelProbs& labels,
                                              const LayoutDetectParams& params = {}) {
  return detect_planes(backproject(depth, K), labels, params);
}

}  // namespace scenecomp
