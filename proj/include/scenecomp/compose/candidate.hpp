#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/image.hpp"
#include "scenecomp/core/mesh.hpp"
#include "scenecomp/core/pose.hpp"
#include "scenecomp/core/render.hpp"

namespace scenecomp {

constexpr int kObjectClasses = 81;

// A hypothesized object: shape, alignment, supporting 2D region, and the
// upstream classifier/retrieval outputs. Renders are cached per pose.
struct Candidate {
  int id = 0;
  TriangleMesh mesh;
  PoseTransform pose;
  PixelMask region;
  std::vector<double> class_probs;  // kObjectClasses entries summing to 1
  double non_object_prob = 0.0;
  double fitting_energy = 0.0;
  std::optional<double> support_height;
  RenderResult render;
  RenderRange depth_range;

  // retrieval metadata: grouping key, retrieved class, similarity rank
  int region_id = 0;
  int class_id = 0;
  int shape_rank = 0;

  void validate() const {
    if (class_probs.size() != kObjectClasses)
      throw std::invalid_argument("candidate: class_probs must have 81 entries");
    double sum = 0;
    for (double p : class_probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("candidate: class_probs must sum to 1");
    if (non_object_prob < 0 || non_object_prob > 1)
      throw std::invalid_argument("candidate: non_object_prob out of range");
  }
};

// Renders the candidate at its current pose and refreshes the caches.
inline void prepare_candidate(Candidate& c, const CameraIntrinsics& K) {
  c.depth_range = render_depth_range(c.mesh, c.pose, K);
  c.render = RenderResult{c.depth_range.near_depth, c.depth_range.mask};
}

struct SelectionWeights {
  double depth_clip_base = std::log2(1.03);  // ratio slack treated as sensor noise
  double greedy_depth_factor = 10.0;
  double w_f = 1.0;
  double w_c = -1500.0;
  double w_b = 1300.0;
  int overlap_subsample = 4;  // 3D-overlap term stride; 1 = exact

  void validate() const {
    if (greedy_depth_factor < 1) throw std::invalid_argument("greedy_depth_factor must be >= 1");
    if (overlap_subsample < 1) throw std::invalid_argument("overlap_subsample must be >= 1");
  }
};

// Per-candidate energy: fitting cost plus class-confidence and
// non-object-probability log terms.
inline double candidate_energy(const Candidate& c, const SelectionWeights& w) {
  const double max_class = c.class_probs.empty()
                               ? 0.0
                               : *std::max_element(c.class_probs.begin(), c.class_probs.end());
  const auto safe_log = [](double p) { return std::log(std::max(p, 1e-6)); };
  return w.w_f * c.fitting_energy + w.w_c * safe_log(max_class) + w.w_b * safe_log(c.non_object_prob);
}

inline double mask_iou(const PixelMask& a, const PixelMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("mask_iou: size mismatch");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const bool pa = a.data[i] != 0, pb = b.data[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

struct PruneParams {
  int target_count = 190;     // region proposals surviving the threshold
  double iou_threshold = 0.9; // regions overlapping a stronger one more than this are dropped
  int top_classes = 2;
  int top_shapes = 5;
  int keep_per_region = 2;    // final per-region keep by candidate_energy
};

// Region-level suppression and thresholding followed by per-region
// shortlisting: top classes by probability, top shapes by similarity rank,
// then the lowest-energy few.
inline std::vector<Candidate> prune_proposals(const std::vector<Candidate>& candidates,
                                              const SelectionWeights& w,
                                              const PruneParams& params = {}) {
  struct RegionGroup {
    int region_id;
    double non_object_prob;
    const PixelMask* region;
    std::vector<const Candidate*> members;
  };
  std::map<int, RegionGroup> by_region;
  for (const auto& c : candidates) {
    auto [it, inserted] = by_region.try_emplace(c.region_id);
    auto& g = it->second;
    if (inserted) {
      g.region_id = c.region_id;
      g.non_object_prob = c.non_object_prob;
      g.region = &c.region;
    }
    g.members.push_back(&c);
  }

  std::vector<const RegionGroup*> order;
  order.reserve(by_region.size());
  for (const auto& [id, g] : by_region) order.push_back(&g);
  std::stable_sort(order.begin(), order.end(), [](const RegionGroup* a, const RegionGroup* b) {
    if (a->non_object_prob != b->non_object_prob) return a->non_object_prob < b->non_object_prob;
    return a->region_id < b->region_id;
  });

  // non-maximal suppression over region overlap
  std::vector<const RegionGroup*> kept;
  for (const auto* g : order) {
    bool suppressed = false;
    for (const auto* k : kept)
      if (mask_iou(*g->region, *k->region) > params.iou_threshold) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(g);
  }
  // threshold on non_object_prob, tuned to pass ~target_count regions
  if (int(kept.size()) > params.target_count) kept.resize(params.target_count);

  std::vector<Candidate> out;
  for (const auto* g : kept) {
    // rank classes by the region's probability vector
    const auto& probs = g->members.front()->class_probs;
    std::vector<int> classes(probs.size());
    std::iota(classes.begin(), classes.end(), 0);
    std::stable_sort(classes.begin(), classes.end(), [&](int a, int b) {
      if (probs[a] != probs[b]) return probs[a] > probs[b];
      return a < b;
    });
    classes.resize(std::min<size_t>(params.top_classes, classes.size()));

    std::vector<const Candidate*> shortlist;
    for (int cls : classes) {
      std::vector<const Candidate*> of_class;
      for (const auto* m : g->members)
        if (m->class_id == cls) of_class.push_back(m);
      std::stable_sort(of_class.begin(), of_class.end(), [](const Candidate* a, const Candidate* b) {
        if (a->shape_rank != b->shape_rank) return a->shape_rank < b->shape_rank;
        return a->id < b->id;
      });
      for (size_t i = 0; i < of_class.size() && int(i) < params.top_shapes; ++i)
        shortlist.push_back(of_class[i]);
    }

    std::stable_sort(shortlist.begin(), shortlist.end(), [&](const Candidate* a, const Candidate* b) {
      const double ea = candidate_energy(*a, w), eb = candidate_energy(*b, w);
      if (ea != eb) return ea < eb;
      return a->id < b->id;
    });
    for (size_t i = 0; i < shortlist.size() && int(i) < params.keep_per_region; ++i)
      out.push_back(*shortlist[i]);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  return out;
}

}  // namespace scenecomp
