#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "scenecomp/core/image.hpp"
#include "scenecomp/core/kdtree.hpp"
#include "scenecomp/eval/report.hpp"
#include "scenecomp/eval/voxel.hpp"
#include "scenecomp/layout/plane.hpp"

namespace scenecomp {

// Mean relative depth deviation over pixels where both images carry depth.
inline double relative_depth_error(const DepthImage& pred, const DepthImage& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw std::invalid_argument("relative_depth_error: size mismatch");
  double sum = 0;
  long n = 0;
  for (size_t i = 0; i < gt.depth.size(); ++i) {
    const float g = gt.depth.data[i], p = pred.depth.data[i];
    if (!DepthImage::is_valid(g) || !DepthImage::is_valid(p)) continue;
    sum += std::abs(double(g) - double(p)) / double(g);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("relative_depth_error: no valid pixels");
  return sum / double(n);
}

// Strict and depth-tolerant voxel precision/recall plus freespace rates.
// A predicted voxel within tolerance_factor * depth of any ground-truth
// voxel counts as correct and recalls that voxel.
inline MetricReport occupancy_metrics(const VoxelGrid& pred, const VoxelGrid& gt,
                                      double tolerance_factor = 0.05) {
  if (!pred.same_frame(gt)) throw std::invalid_argument("occupancy_metrics: grid frames differ");
  if (tolerance_factor < 0) throw std::invalid_argument("occupancy_metrics: negative tolerance");

  const auto rate = [](size_t num, size_t den) { return den == 0 ? 1.0 : double(num) / double(den); };

  size_t tp = 0, np = 0, ng = 0, free_tp = 0, free_np = 0, free_ng = 0;
  std::vector<Eigen::Vector3d> gt_centers;
  std::vector<size_t> gt_cell;
  for (int iz = 0; iz < gt.dims.z(); ++iz)
    for (int iy = 0; iy < gt.dims.y(); ++iy)
      for (int ix = 0; ix < gt.dims.x(); ++ix) {
        const size_t i = gt.index(ix, iy, iz);
        if (!gt.in_scope[i]) continue;
        const bool p = pred.occupancy[i], g = gt.occupancy[i];
        np += p;
        ng += g;
        tp += p && g;
        free_np += !p;
        free_ng += !g;
        free_tp += !p && !g;
        if (g) {
          gt_centers.push_back(gt.center(ix, iy, iz));
          gt_cell.push_back(i);
        }
      }

  MetricReport r;
  r.set("occupancy_precision", rate(tp, np));
  r.set("occupancy_recall", rate(tp, ng));
  r.set("freespace_precision", rate(free_tp, free_np));
  r.set("freespace_recall", rate(free_tp, free_ng));

  const KdTree3 gt_tree(gt_centers);
  std::vector<uint8_t> recalled(gt_centers.size(), 0);
  size_t correct = 0;
  for (int iz = 0; iz < pred.dims.z(); ++iz)
    for (int iy = 0; iy < pred.dims.y(); ++iy)
      for (int ix = 0; ix < pred.dims.x(); ++ix) {
        const size_t i = pred.index(ix, iy, iz);
        if (!pred.in_scope[i] || !pred.occupancy[i]) continue;
        const Eigen::Vector3d c = pred.center(ix, iy, iz);
        const double eps = tolerance_factor * c.z();
        const auto hits = gt_tree.radius_search(c, eps);
        if (!hits.empty()) ++correct;
        for (int h : hits) recalled[h] = 1;
      }
  size_t nrec = 0;
  for (uint8_t v : recalled) nrec += v;
  r.set("occupancy_precision_eps", rate(correct, np));
  r.set("occupancy_recall_eps", rate(nrec, ng));
  return r;
}

namespace detail {

struct LayoutComposite {
  DepthImage depth;
  Grid<int8_t> label;  // LayoutCategory value, -1 where nothing renders
};

inline LayoutComposite composite_layouts(const std::vector<LayoutPlane>& layouts,
                                         const CameraIntrinsics& K) {
  LayoutComposite out{DepthImage(K.width, K.height), Grid<int8_t>(K.width, K.height, -1)};
  for (const auto& plane : layouts) {
    const auto r = render_layout(plane, K);
    for (int y = 0; y < K.height; ++y)
      for (int x = 0; x < K.width; ++x) {
        if (!r.mask(x, y)) continue;
        const float d = r.near_depth.at(x, y);
        if (!out.depth.valid_at(x, y) || d < out.depth.at(x, y)) {
          out.depth.set(x, y, d);
          out.label(x, y) = int8_t(plane.category);
        }
      }
  }
  return out;
}

}  // namespace detail

// Five-way pixel labeling error of predicted layout surfaces against the
// annotated ones, split into visible and occluded pixels when observed
// depth is supplied (occluded = observation nearer than the annotated
// surface by more than occluded_frac of its depth).
inline MetricReport layout_pixel_error(const std::vector<LayoutPlane>& pred_layouts,
                                       const std::vector<LayoutPlane>& gt_layouts,
                                       const CameraIntrinsics& K,
                                       const DepthImage* observed = nullptr,
                                       double occluded_frac = 0.03) {
  const auto pred = detail::composite_layouts(pred_layouts, K);
  const auto gt = detail::composite_layouts(gt_layouts, K);

  long n = 0, wrong = 0, n_vis = 0, wrong_vis = 0, n_occ = 0, wrong_occ = 0;
  for (int y = 0; y < K.height; ++y)
    for (int x = 0; x < K.width; ++x) {
      if (gt.label(x, y) < 0) continue;
      const bool mis = pred.label(x, y) != gt.label(x, y);
      ++n;
      wrong += mis;
      if (observed) {
        const bool occluded = observed->valid_at(x, y) &&
                              double(observed->at(x, y)) <
                                  double(gt.depth.at(x, y)) * (1.0 - occluded_frac);
        (occluded ? n_occ : n_vis) += 1;
        (occluded ? wrong_occ : wrong_vis) += mis;
      }
    }

  MetricReport r;
  r.set("layout_pixel_error", n == 0 ? 0.0 : double(wrong) / double(n));
  if (observed) {
    r.set("layout_pixel_error_visible", n_vis == 0 ? 0.0 : double(wrong_vis) / double(n_vis));
    r.set("layout_pixel_error_occluded", n_occ == 0 ? 0.0 : double(wrong_occ) / double(n_occ));
  }
  return r;
}

// Mean absolute depth difference between two layout renders over pixels both
// cover, with the same visible/occluded split. The depth-image overload
// scores a raw sensor map against the annotation.
inline MetricReport layout_depth_error(const DepthImage& pred_depth,
                                       const std::vector<LayoutPlane>& gt_layouts,
                                       const CameraIntrinsics& K,
                                       const DepthImage* observed = nullptr,
                                       double occluded_frac = 0.03) {
  const auto gt = detail::composite_layouts(gt_layouts, K);
  double sum = 0, sum_vis = 0, sum_occ = 0;
  long n = 0, n_vis = 0, n_occ = 0;
  for (int y = 0; y < K.height; ++y)
    for (int x = 0; x < K.width; ++x) {
      if (gt.label(x, y) < 0 || !pred_depth.valid_at(x, y)) continue;
      const double err = std::abs(double(pred_depth.at(x, y)) - double(gt.depth.at(x, y)));
      sum += err;
      ++n;
      if (observed) {
        const bool occluded = observed->valid_at(x, y) &&
                              double(observed->at(x, y)) <
                                  double(gt.depth.at(x, y)) * (1.0 - occluded_frac);
        if (occluded) {
          sum_occ += err;
          ++n_occ;
        } else {
          sum_vis += err;
          ++n_vis;
        }
      }
    }
  MetricReport r;
  r.set("layout_depth_error", n == 0 ? 0.0 : sum / double(n));
  if (observed) {
    r.set("layout_depth_error_visible", n_vis == 0 ? 0.0 : sum_vis / double(n_vis));
    r.set("layout_depth_error_occluded", n_occ == 0 ? 0.0 : sum_occ / double(n_occ));
  }
  return r;
}

inline MetricReport layout_depth_error(const std::vector<LayoutPlane>& pred_layouts,
                                       const std::vector<LayoutPlane>& gt_layouts,
                                       const CameraIntrinsics& K,
                                       const DepthImage* observed = nullptr,
                                       double occluded_frac = 0.03) {
  return layout_depth_error(detail::composite_layouts(pred_layouts, K).depth, gt_layouts, K,
                            observed, occluded_frac);
}

// Per-pixel instance ids (-1 = none) with a class per instance.
struct InstanceMap {
  Grid<int> ids;
  std::vector<int> classes;

  InstanceMap() = default;
  InstanceMap(int w, int h) : ids(w, h, -1) {}

  int class_at(int x, int y) const {
    const int i = ids(x, y);
    return i < 0 ? -1 : classes[i];
  }
};

// Coverage of ground-truth instances by same-class predictions (best IoU,
// area-weighted and unweighted means) plus semantic accuracy averaged per
// class, per instance, and per pixel.
inline MetricReport coverage_metrics(const InstanceMap& pred, const InstanceMap& gt) {
  if (pred.ids.width != gt.ids.width || pred.ids.height != gt.ids.height)
    throw std::invalid_argument("coverage_metrics: size mismatch");
  const size_t n_pixels = gt.ids.size();

  std::vector<long> gt_area(gt.classes.size(), 0), pred_area(pred.classes.size(), 0);
  std::map<std::pair<int, int>, long> inter;  // (gt instance, pred instance)
  long sem_total = 0, sem_correct = 0;
  std::map<int, std::pair<long, long>> per_class;        // class -> (correct, total)
  std::vector<std::pair<long, long>> per_gt_instance(gt.classes.size(), {0, 0});

  for (size_t i = 0; i < n_pixels; ++i) {
    const int g = gt.ids.data[i], p = pred.ids.data[i];
    if (g >= 0) ++gt_area[g];
    if (p >= 0) ++pred_area[p];
    if (g >= 0 && p >= 0) ++inter[{g, p}];
    if (g >= 0) {
      const int gc = gt.classes[g];
      const int pc = p >= 0 ? pred.classes[p] : -1;
      const bool ok = pc == gc;
      ++sem_total;
      sem_correct += ok;
      auto& [c, t] = per_class[gc];
      ++t;
      c += ok;
      auto& [ci, ti] = per_gt_instance[g];
      ++ti;
      ci += ok;
    }
  }

  double cov_weighted_num = 0, cov_unweighted = 0;
  long total_gt_area = 0;
  long n_gt_instances = 0;
  for (size_t g = 0; g < gt.classes.size(); ++g) {
    if (gt_area[g] == 0) continue;
    ++n_gt_instances;
    total_gt_area += gt_area[g];
    double best = 0;
    for (size_t p = 0; p < pred.classes.size(); ++p) {
      if (pred.classes[p] != gt.classes[g] || pred_area[p] == 0) continue;
      const auto it = inter.find({int(g), int(p)});
      const long shared = it == inter.end() ? 0 : it->second;
      if (shared == 0) continue;
      best = std::max(best, double(shared) / double(gt_area[g] + pred_area[p] - shared));
    }
    cov_weighted_num += best * double(gt_area[g]);
    cov_unweighted += best;
  }

  MetricReport r;
  r.set("coverage_weighted", total_gt_area == 0 ? 0.0 : cov_weighted_num / double(total_gt_area));
  r.set("coverage_unweighted", n_gt_instances == 0 ? 0.0 : cov_unweighted / double(n_gt_instances));

  double class_acc = 0;
  for (const auto& [cls, ct] : per_class) class_acc += double(ct.first) / double(ct.second);
  r.set("semseg_avg_class", per_class.empty() ? 0.0 : class_acc / double(per_class.size()));

  double inst_acc = 0;
  for (const auto& [c, t] : per_gt_instance)
    if (t > 0) inst_acc += double(c) / double(t);
  r.set("semseg_avg_instance", n_gt_instances == 0 ? 0.0 : inst_acc / double(n_gt_instances));
  r.set("semseg_avg_pixel", sem_total == 0 ? 0.0 : double(sem_correct) / double(sem_total));
  return r;
}

}  // namespace scenecomp
