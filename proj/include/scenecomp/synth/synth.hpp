#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "scenecomp/align/fitting.hpp"
#include "scenecomp/compose/candidate.hpp"
#include "scenecomp/core/rng.hpp"
#include "scenecomp/io/scene_file.hpp"
#include "scenecomp/layout/features.hpp"
#include "scenecomp/layout/plane.hpp"
#include "scenecomp/synth/shapes.hpp"

namespace scenecomp {

// Desk-scale scene generator: a Manhattan box room with a doorway and its
// backing wall, floor-standing objects, and a candidate pool of perturbed
// truths plus distractors.
struct SynthParams {
  uint64_t seed = 1;
  int image_width = 64;
  int image_height = 48;
  double focal = 28.0;

  Eigen::Vector2d room_width{2.4, 3.4};
  Eigen::Vector2d room_height{2.1, 2.6};
  Eigen::Vector2d room_depth{2.6, 3.8};      // camera to the doorway wall
  Eigen::Vector2d corridor_depth{0.7, 1.0};  // doorway wall to its backing wall
  Eigen::Vector2d camera_height{1.1, 1.5};

  Eigen::Vector2i object_count{1, 3};
  std::vector<int> shape_vocabulary{0, 1, 2};  // boxes, cylinders, L-shapes
  int distractor_count = 2;
  int occluder_count = 0;

  double yaw_perturb_deg = 10.0;       // candidate init pose noise
  double translation_perturb = 0.10;
  double scale_perturb_fraction = 0.0; // candidates whose init scale is truth / 0.9

  double missing_fraction = 0.0;
  int max_placement_retries = 120;

  double true_class_prob_lo = 0.5, true_class_prob_hi = 0.95;
  double pobject_clamp_lo = 0.05, pobject_clamp_hi = 0.95;
};

struct SynthScene {
  SceneFile gt;
  DepthImage depth;  // rendered truth with optional missing pixels
  Grid<float> p_object;
  PixelLabelProbs labels;
  std::vector<Candidate> candidates;
  int gt_candidate_count = 0;  // candidates[i] perturbs gt.objects[i] for i < count
};

namespace detail {

// stable class ids for the synthetic vocabulary
constexpr int kBoxClass = 8;
constexpr int kCylinderClass = 23;
constexpr int kLShapeClass = 45;
constexpr int kOccluderClass = 60;

struct ShapeDraw {
  TriangleMesh mesh;  // resting frame: base at y = 0, body toward -y
  int class_id;
  Eigen::Vector3d size;
};

inline TriangleMesh resting_cylinder(double radius, double height, int segments = 14) {
  TriangleMesh m = make_cylinder(radius, height, segments);
  for (auto& v : m.vertices) v.y() -= height / 2;
  return m;
}

inline TriangleMesh resting_lshape(double w, double h, double d) {
  TriangleMesh m = make_box({-w / 2, -h * 0.45, -d / 2}, {w / 2, 0.0, d / 2});  // seat
  append_mesh(m, make_box({-w / 2, -h, -d / 2}, {w / 2, -h * 0.45, -d / 2 + d * 0.35}));  // back
  return m;
}

inline ShapeDraw draw_shape(Rng& rng, const std::vector<int>& vocabulary) {
  ShapeDraw s;
  switch (vocabulary[rng.uniform_int(0, int(vocabulary.size()) - 1)]) {
    case 0: {
      const double w = rng.uniform(0.35, 0.9), h = rng.uniform(0.35, 0.9), d = rng.uniform(0.35, 0.9);
      s.mesh = make_box({-w / 2, -h, -d / 2}, {w / 2, 0, d / 2});
      s.class_id = kBoxClass;
      s.size = {w, h, d};
      break;
    }
    case 1: {
      const double r = rng.uniform(0.15, 0.35), h = rng.uniform(0.4, 0.9);
      s.mesh = resting_cylinder(r, h);
      s.class_id = kCylinderClass;
      s.size = {2 * r, h, 2 * r};
      break;
    }
    default: {
      const double w = rng.uniform(0.5, 0.85), h = rng.uniform(0.5, 0.9), d = rng.uniform(0.5, 0.85);
      s.mesh = resting_lshape(w, h, d);
      s.class_id = kLShapeClass;
      s.size = {w, h, d};
      break;
    }
  }
  return s;
}

inline Eigen::AlignedBox3d posed_bounds(const TriangleMesh& mesh, const PoseTransform& pose) {
  Eigen::AlignedBox3d box;
  for (const auto& v : mesh.vertices) box.extend(pose.apply(v));
  return box;
}

inline Eigen::AlignedBox2d projected_bounds(const TriangleMesh& mesh, const PoseTransform& pose,
                                            const CameraIntrinsics& K) {
  Eigen::AlignedBox2d box;
  for (const auto& v : mesh.vertices) {
    const Eigen::Vector3d p = pose.apply(v);
    if (p.z() > 0.05) box.extend(K.project(p));
  }
  return box;
}

inline std::vector<double> confusion_probs(Rng& rng, int true_class, double lo, double hi) {
  std::vector<double> probs(kObjectClasses, 0.0);
  const double p = rng.uniform(lo, hi);
  for (auto& v : probs) v = (1.0 - p) / (kObjectClasses - 1);
  probs[true_class] = p;
  return probs;
}

}  // namespace detail

inline SynthScene synth_scene(const SynthParams& params,
                              const FitWeights& energy_weights = FitWeights::retrieval()) {
  Rng rng(params.seed);
  SynthScene out;

  CameraIntrinsics K;
  K.fx = K.fy = params.focal;
  K.cx = params.image_width / 2;
  K.cy = params.image_height / 2;
  K.width = params.image_width;
  K.height = params.image_height;
  K.validate();
  out.gt.camera = K;

  // room box around the camera (y down, camera at the origin)
  const double width = rng.uniform(params.room_width.x(), params.room_width.y());
  const double height = rng.uniform(params.room_height.x(), params.room_height.y());
  const double depth = rng.uniform(params.room_depth.x(), params.room_depth.y());
  const double corridor = rng.uniform(params.corridor_depth.x(), params.corridor_depth.y());
  const double cam_h = rng.uniform(params.camera_height.x(), params.camera_height.y());
  const double split = rng.uniform(0.38, 0.62);

  const double floor_y = cam_h;
  const double ceil_y = cam_h - height;
  const double left_x = -split * width;
  const double right_x = left_x + width;
  const double wall_z = depth;
  const double back_z = depth + corridor;

  const double door_w = rng.uniform(0.9, 1.15);
  const double door_h = std::min(rng.uniform(1.8, 2.1), height - 0.2);
  const double door_x0 = rng.uniform(left_x + 0.2, right_x - 0.2 - door_w);

  {
    auto floor = LayoutPlane::from_category(LayoutCategory::Floor, floor_y);
    floor.extent_lo = {0.0, left_x};  // (z, x)
    floor.extent_hi = {back_z, right_x};
    auto ceiling = LayoutPlane::from_category(LayoutCategory::Ceiling, ceil_y);
    ceiling.extent_lo = {0.0, left_x};
    ceiling.extent_hi = {back_z, right_x};
    auto left = LayoutPlane::from_category(LayoutCategory::LeftWall, left_x);
    left.extent_lo = {ceil_y, 0.0};  // (y, z)
    left.extent_hi = {floor_y, back_z};
    auto right = LayoutPlane::from_category(LayoutCategory::RightWall, right_x);
    right.extent_lo = {ceil_y, 0.0};
    right.extent_hi = {floor_y, back_z};
    auto front = LayoutPlane::from_category(LayoutCategory::FrontWall, wall_z);
    front.extent_lo = {left_x, ceil_y};  // (x, y)
    front.extent_hi = {right_x, floor_y};
    front.holes.push_back({{door_x0, floor_y - door_h}, {door_x0 + door_w, floor_y}});
    auto back = LayoutPlane::from_category(LayoutCategory::FrontWall, back_z);
    back.extent_lo = {left_x, ceil_y};
    back.extent_hi = {right_x, floor_y};
    out.gt.layouts = {floor, ceiling, left, right, front, back};
  }

  // floor-standing objects with non-intersecting bounds
  const int n_objects = rng.uniform_int(params.object_count.x(), params.object_count.y());
  std::vector<Eigen::AlignedBox3d> placed;
  std::vector<Eigen::AlignedBox2d> projected;
  int next_id = 0;
  const auto try_place = [&](int occluder_index) -> bool {
    const bool occluder = occluder_index >= 0;
    for (int attempt = 0; attempt < params.max_placement_retries; ++attempt) {
      detail::ShapeDraw shape;
      if (occluder) {
        const double w = rng.uniform(0.35, 0.55) * width / std::max(1, params.occluder_count);
        const double h = rng.uniform(0.45, 0.65) * height;
        const double d = 0.15;
        shape.mesh = make_box({-w / 2, -h, -d / 2}, {w / 2, 0, d / 2});
        shape.class_id = detail::kOccluderClass;
        shape.size = {w, h, d};
      } else {
        shape = detail::draw_shape(rng, params.shape_vocabulary);
      }

      PoseTransform pose;
      pose.yaw = occluder ? 0.0 : rng.uniform(-std::numbers::pi, std::numbers::pi);
      pose.translation.y() = floor_y;
      if (occluder) {
        // slab a fixed gap in front of the doorway wall
        pose.translation.x() = rng.uniform(left_x + shape.size.x() / 2 + 0.1,
                                           right_x - shape.size.x() / 2 - 0.1);
        pose.translation.z() = wall_z - 0.3 - 0.45 * occluder_index - shape.size.z() / 2;
      } else {
        // footprint circumradius bounds the rotated extent
        const double margin = std::hypot(shape.size.x(), shape.size.z()) / 2 + 0.08;
        const double zmin = std::max(1.2, margin);
        const double zmax = wall_z - 0.25 - margin;
        if (zmin >= zmax || left_x + margin >= right_x - margin) continue;
        pose.translation.x() = rng.uniform(left_x + margin, right_x - margin);
        pose.translation.z() = rng.uniform(zmin, zmax);
      }
      auto bounds = detail::posed_bounds(shape.mesh, pose);
      bounds.min() -= Eigen::Vector3d::Constant(0.05);
      bounds.max() += Eigen::Vector3d::Constant(0.05);
      bool clear = true;
      for (const auto& b : placed)
        if (bounds.intersects(b)) {
          clear = false;
          break;
        }
      if (clear && !occluder) {
        // objects also keep disjoint image footprints, so every object stays
        // fully visible and region proposals never overlap
        const auto box2d = detail::projected_bounds(shape.mesh, pose, K);
        for (const auto& b : projected)
          if (box2d.intersects(b)) {
            clear = false;
            break;
          }
        if (clear) projected.push_back(box2d);
      }
      if (!clear) continue;

      placed.push_back(bounds);
      SceneObject obj;
      obj.id = next_id++;
      obj.mesh = shape.mesh;
      obj.pose = pose;
      obj.class_id = shape.class_id;
      obj.support_height = -floor_y;
      out.gt.objects.push_back(std::move(obj));
      return true;
    }
    return false;
  };
  for (int i = 0; i < n_objects; ++i) {
    if (!try_place(-1)) {
      // a crowded draw may not fit; settle for fewer objects as long as the
      // requested minimum is met
      if (i >= params.object_count.x()) break;
      throw std::runtime_error("synth_scene: object placement infeasible");
    }
  }
  for (int i = 0; i < params.occluder_count; ++i)
    if (!try_place(i)) throw std::runtime_error("synth_scene: occluder placement infeasible");

  // render the truth; track the frontmost element kind per pixel
  out.depth = DepthImage(K.width, K.height);
  Grid<int> front_kind(K.width, K.height, -1);  // -1 none, 0.. object index, 1000+ layout index
  std::vector<RenderResult> object_renders;
  for (size_t i = 0; i < out.gt.objects.size(); ++i) {
    const auto r = render_depth(out.gt.objects[i].mesh, out.gt.objects[i].pose, K);
    object_renders.push_back(r);
    for (int p = 0; p < K.width * K.height; ++p) {
      if (!r.mask.data[p]) continue;
      if (!DepthImage::is_valid(out.depth.depth.data[p]) ||
          r.depth.depth.data[p] < out.depth.depth.data[p]) {
        out.depth.depth.data[p] = r.depth.depth.data[p];
        front_kind.data[p] = int(i);
      }
    }
  }
  for (size_t i = 0; i < out.gt.layouts.size(); ++i) {
    const auto r = render_layout(out.gt.layouts[i], K);
    for (int p = 0; p < K.width * K.height; ++p) {
      if (!r.mask(p % K.width, p / K.width)) continue;
      const float d = r.near_depth.depth.data[p];
      if (!DepthImage::is_valid(out.depth.depth.data[p]) || d < out.depth.depth.data[p]) {
        out.depth.depth.data[p] = d;
        front_kind.data[p] = 1000 + int(i);
      }
    }
  }

  // label probabilities: frontmost truth with a constant confusion floor
  out.labels = PixelLabelProbs(K.width, K.height);
  for (int p = 0; p < K.width * K.height; ++p) {
    const int kind = front_kind.data[p];
    PixelLabel own = PixelLabel::Object;
    if (kind >= 1000) {
      switch (out.gt.layouts[kind - 1000].category) {
        case LayoutCategory::Floor: own = PixelLabel::Floor; break;
        case LayoutCategory::Ceiling: own = PixelLabel::Ceiling; break;
        default: own = PixelLabel::Wall; break;
      }
    } else if (kind < 0) {
      out.labels.probs.data[p] = {0.25f, 0.25f, 0.25f, 0.25f};
      continue;
    }
    std::array<float, 4> probs{0.05f, 0.05f, 0.05f, 0.05f};
    probs[int(own)] = 0.85f;
    out.labels.probs.data[p] = probs;
  }

  // object-probability map: blurred object mask
  out.p_object = Grid<float>(K.width, K.height, 0.f);
  {
    Grid<float> hard(K.width, K.height, 0.f);
    for (int p = 0; p < K.width * K.height; ++p)
      hard.data[p] = (front_kind.data[p] >= 0 && front_kind.data[p] < 1000) ? 1.f : 0.f;
    for (int y = 0; y < K.height; ++y)
      for (int x = 0; x < K.width; ++x) {
        float sum = 0;
        int n = 0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            if (!hard.in_bounds(x + dx, y + dy)) continue;
            sum += hard(x + dx, y + dy);
            ++n;
          }
        out.p_object(x, y) = std::clamp(sum / float(n), float(params.pobject_clamp_lo),
                                        float(params.pobject_clamp_hi));
      }
  }

  // observation noise
  if (params.missing_fraction > 0)
    for (auto& d : out.depth.depth.data)
      if (rng.chance(params.missing_fraction)) d = DepthImage::missing_value();

  // candidate pool: perturbed truths first, then distractors
  const double yaw_amp = params.yaw_perturb_deg * std::numbers::pi / 180.0;
  for (size_t i = 0; i < out.gt.objects.size(); ++i) {
    const auto& obj = out.gt.objects[i];
    Candidate c;
    c.id = int(i);
    c.region_id = int(i);
    c.mesh = obj.mesh;
    c.pose = obj.pose;
    c.pose.yaw = normalize_yaw(c.pose.yaw + rng.uniform(-yaw_amp, yaw_amp));
    c.pose.translation += Eigen::Vector3d(rng.uniform(-params.translation_perturb, params.translation_perturb),
                                          rng.uniform(-params.translation_perturb, params.translation_perturb),
                                          rng.uniform(-params.translation_perturb, params.translation_perturb));
    if (rng.chance(params.scale_perturb_fraction)) c.pose.scale = obj.pose.scale / 0.9;
    c.region = PixelMask(K.width, K.height, 0);
    for (int p = 0; p < K.width * K.height; ++p)
      if (front_kind.data[p] == int(i)) c.region.data[p] = 1;
    c.class_id = obj.class_id;
    c.shape_rank = 0;
    c.class_probs = detail::confusion_probs(rng, obj.class_id, params.true_class_prob_lo,
                                            params.true_class_prob_hi);
    c.non_object_prob = rng.uniform(0.02, 0.15);
    c.support_height = obj.support_height;
    prepare_candidate(c, K);
    c.fitting_energy = fitting_cost(c.render, out.depth, c.region, energy_weights);
    out.candidates.push_back(std::move(c));
  }
  out.gt_candidate_count = int(out.candidates.size());

  for (int d = 0; d < params.distractor_count; ++d) {
    Candidate c;
    c.id = out.gt_candidate_count + d;
    c.region_id = c.id;
    for (int attempt = 0; attempt < params.max_placement_retries; ++attempt) {
      const auto shape = detail::draw_shape(rng, params.shape_vocabulary);
      PoseTransform pose;
      pose.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
      pose.translation = {rng.uniform(left_x + 0.3, right_x - 0.3),
                          floor_y - rng.uniform(0.1, 0.5),  // hovering: deliberately inconsistent
                          rng.uniform(1.4, wall_z - 0.3)};
      c.mesh = shape.mesh;
      c.pose = pose;
      c.class_id = shape.class_id;
      prepare_candidate(c, K);
      if (count_set(c.render.mask) > 20) break;
    }
    if (count_set(c.render.mask) == 0)
      throw std::runtime_error("synth_scene: distractor placement infeasible");
    c.region = c.render.mask;
    c.shape_rank = 1;
    c.class_probs =
        detail::confusion_probs(rng, rng.uniform_int(0, kObjectClasses - 1), 0.3, 0.6);
    c.non_object_prob = rng.uniform(0.3, 0.8);
    c.fitting_energy = fitting_cost(c.render, out.depth, c.region, energy_weights);
    out.candidates.push_back(std::move(c));
  }

  return out;
}

}  // namespace scenecomp
