#pragma once

#include <fstream>
#include <string>

#include "scenecomp/align/align.hpp"
#include "scenecomp/compose/candidate.hpp"
#include "scenecomp/compose/selection.hpp"
#include "scenecomp/core/camera.hpp"
#include "scenecomp/io/json_util.hpp"
#include "scenecomp/layout/detect.hpp"
#include "scenecomp/layout/extent.hpp"

namespace scenecomp {

// Every tunable in one place; files override the shipped defaults field by
// field.
struct RunConfig {
  CameraIntrinsics camera{28.0, 28.0, 32.0, 24.0, 64, 48};  // for inputs without intrinsics
  FitWeights annotation = FitWeights::annotation();
  FitWeights retrieval = FitWeights::retrieval();
  AlignParams align;
  bool prune_top5 = false;
  SelectionWeights selection;
  LayoutDetectParams layout;
  ExtentParams extent;
  PruneParams prune;
  ComposeParams compose;
  double voxel_resolution = 0.03;
  double tolerance_factor = 0.05;
  double occluded_frac = 0.03;
  int threads = 1;

  FitWeights fit_weights(const std::string& profile) const {
    if (profile == "annotation") return annotation;
    if (profile == "retrieval") return retrieval;
    throw std::invalid_argument("unknown weight profile: " + profile);
  }
};

namespace detail {

inline Json fit_weights_json(const FitWeights& w) {
  return {{"c_depth", w.c_depth}, {"c_missing", w.c_missing}, {"c_occ", w.c_occ}};
}

inline FitWeights fit_weights_from(const Json& j, FitWeights base) {
  base.c_depth = j.value("c_depth", base.c_depth);
  base.c_missing = j.value("c_missing", base.c_missing);
  base.c_occ = j.value("c_occ", base.c_occ);
  return base;
}

}  // namespace detail

inline Json to_json(const RunConfig& c) {
  Json j;
  j["camera"] = {{"fx", c.camera.fx},   {"fy", c.camera.fy},       {"cx", c.camera.cx},
                 {"cy", c.camera.cy},   {"width", c.camera.width}, {"height", c.camera.height}};
  j["fit_weights"]["annotation"] = detail::fit_weights_json(c.annotation);
  j["fit_weights"]["retrieval"] = detail::fit_weights_json(c.retrieval);
  j["align"] = {{"yaw_steps", c.align.yaw_steps},
                {"scales", c.align.scales},
                {"icp_max_iters", c.align.icp.max_iters},
                {"icp_tol", c.align.icp.tol},
                {"icp_reject_radius", c.align.icp.reject_radius},
                {"prune_top5", c.prune_top5}};
  j["selection"] = {{"depth_clip_base", c.selection.depth_clip_base},
                    {"greedy_depth_factor", c.selection.greedy_depth_factor},
                    {"w_f", c.selection.w_f},
                    {"w_c", c.selection.w_c},
                    {"w_b", c.selection.w_b},
                    {"overlap_subsample", c.selection.overlap_subsample},
                    {"stage3_object_trials", c.compose.stage3_object_trials}};
  Json scorers = Json::object();
  Json priors = Json::object();
  for (int k = 0; k < kLayoutCategories; ++k) {
    const auto cat = LayoutCategory(k);
    scorers[to_string(cat)] = {{"weights", c.layout.scorers[k].weights},
                               {"bias", c.layout.scorers[k].bias}};
    const auto& t = c.layout.prior.tables[k];
    if (!t.values.empty())
      priors[to_string(cat)] = {{"min_offset", t.min_offset},
                                {"bin_width", t.bin_width},
                                {"values", t.values}};
  }
  j["layout"] = {{"sweep_step", c.layout.sweep_step},
                 {"nms_radius", c.layout.nms_radius},
                 {"sigma_p", c.layout.sigma_p},
                 {"sigma_n", c.layout.sigma_n},
                 {"behind_frac", c.layout.behind_frac},
                 {"score_threshold", c.layout.score_threshold},
                 {"hole_behind_frac", c.extent.hole_behind_frac},
                 {"min_hole_pixels", c.extent.min_hole_pixels},
                 {"scorers", scorers},
                 {"priors", priors}};
  j["prune"] = {{"target_count", c.prune.target_count},
                {"iou_threshold", c.prune.iou_threshold},
                {"top_classes", c.prune.top_classes},
                {"top_shapes", c.prune.top_shapes},
                {"keep_per_region", c.prune.keep_per_region}};
  j["eval"] = {{"voxel_resolution", c.voxel_resolution},
               {"tolerance_factor", c.tolerance_factor},
               {"occluded_frac", c.occluded_frac}};
  j["threads"] = c.threads;
  return j;
}

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  if (j.contains("camera")) {
    const auto& jc = j["camera"];
    c.camera.fx = jc.value("fx", c.camera.fx);
    c.camera.fy = jc.value("fy", c.camera.fy);
    c.camera.cx = jc.value("cx", c.camera.cx);
    c.camera.cy = jc.value("cy", c.camera.cy);
    c.camera.width = jc.value("width", c.camera.width);
    c.camera.height = jc.value("height", c.camera.height);
  }
  if (j.contains("fit_weights")) {
    const auto& jw = j["fit_weights"];
    if (jw.contains("annotation")) c.annotation = detail::fit_weights_from(jw["annotation"], c.annotation);
    if (jw.contains("retrieval")) c.retrieval = detail::fit_weights_from(jw["retrieval"], c.retrieval);
  }
  if (j.contains("align")) {
    const auto& ja = j["align"];
    c.align.yaw_steps = ja.value("yaw_steps", c.align.yaw_steps);
    if (ja.contains("scales")) c.align.scales = ja["scales"].get<std::vector<double>>();
    c.align.icp.max_iters = ja.value("icp_max_iters", c.align.icp.max_iters);
    c.align.icp.tol = ja.value("icp_tol", c.align.icp.tol);
    c.align.icp.reject_radius = ja.value("icp_reject_radius", c.align.icp.reject_radius);
    c.prune_top5 = ja.value("prune_top5", c.prune_top5);
  }
  if (j.contains("selection")) {
    const auto& js = j["selection"];
    c.selection.depth_clip_base = js.value("depth_clip_base", c.selection.depth_clip_base);
    c.selection.greedy_depth_factor = js.value("greedy_depth_factor", c.selection.greedy_depth_factor);
    c.selection.w_f = js.value("w_f", c.selection.w_f);
    c.selection.w_c = js.value("w_c", c.selection.w_c);
    c.selection.w_b = js.value("w_b", c.selection.w_b);
    c.selection.overlap_subsample = js.value("overlap_subsample", c.selection.overlap_subsample);
    c.compose.stage3_object_trials = js.value("stage3_object_trials", c.compose.stage3_object_trials);
  }
  if (j.contains("layout")) {
    const auto& jl = j["layout"];
    c.layout.sweep_step = jl.value("sweep_step", c.layout.sweep_step);
    c.layout.nms_radius = jl.value("nms_radius", c.layout.nms_radius);
    c.layout.sigma_p = jl.value("sigma_p", c.layout.sigma_p);
    c.layout.sigma_n = jl.value("sigma_n", c.layout.sigma_n);
    c.layout.behind_frac = jl.value("behind_frac", c.layout.behind_frac);
    c.layout.score_threshold = jl.value("score_threshold", c.layout.score_threshold);
    c.extent.hole_behind_frac = jl.value("hole_behind_frac", c.extent.hole_behind_frac);
    c.extent.min_hole_pixels = jl.value("min_hole_pixels", c.extent.min_hole_pixels);
    for (int k = 0; k < kLayoutCategories; ++k) {
      const std::string name = to_string(LayoutCategory(k));
      if (jl.contains("scorers") && jl["scorers"].contains(name)) {
        const auto& js = jl["scorers"][name];
        if (js.contains("weights")) {
          const auto w = js["weights"].get<std::vector<double>>();
          if (w.size() != 12) throw std::runtime_error("config: scorer weights need 12 entries");
          std::copy(w.begin(), w.end(), c.layout.scorers[k].weights.begin());
        }
        c.layout.scorers[k].bias = js.value("bias", c.layout.scorers[k].bias);
      }
      if (jl.contains("priors") && jl["priors"].contains(name)) {
        const auto& jp = jl["priors"][name];
        auto& t = c.layout.prior.tables[k];
        t.min_offset = jp.value("min_offset", 0.0);
        t.bin_width = jp.value("bin_width", 0.1);
        t.values = jp.value("values", std::vector<double>{});
      }
    }
  }
  if (j.contains("prune")) {
    const auto& jp = j["prune"];
    c.prune.target_count = jp.value("target_count", c.prune.target_count);
    c.prune.iou_threshold = jp.value("iou_threshold", c.prune.iou_threshold);
    c.prune.top_classes = jp.value("top_classes", c.prune.top_classes);
    c.prune.top_shapes = jp.value("top_shapes", c.prune.top_shapes);
    c.prune.keep_per_region = jp.value("keep_per_region", c.prune.keep_per_region);
  }
  if (j.contains("eval")) {
    const auto& je = j["eval"];
    c.voxel_resolution = je.value("voxel_resolution", c.voxel_resolution);
    c.tolerance_factor = je.value("tolerance_factor", c.tolerance_factor);
    c.occluded_frac = je.value("occluded_frac", c.occluded_frac);
  }
  c.threads = j.value("threads", c.threads);
  c.align.threads = c.threads;
  return c;
}

inline void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot open " + path + " for writing");
  out << to_json(c).dump(2) << "\n";
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace scenecomp
