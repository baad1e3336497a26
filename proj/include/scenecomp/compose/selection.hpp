#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scenecomp/compose/candidate.hpp"
#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/image.hpp"
#include "scenecomp/layout/plane.hpp"

namespace scenecomp {

// A selection over the candidate pool and layout proposals plus the scene it
// renders.
struct SceneHypothesis {
  std::vector<uint8_t> selected_candidates;
  std::vector<uint8_t> selected_layouts;
  DepthImage composite_render;
  double cost = 0;
};

struct SelectionTerms {
  double depth = 0;           // clipped log-ratio depth error, unrendered pixels score 1
  double pobject = 0;         // |isObject - P_object| over all pixels
  double region_overlap = 0;  // pixels claimed by more than one selected region
  double overlap3d = 0;       // pairwise overlapping depth-interval length
  double total(double depth_weight = 1.0) const {
    return depth_weight * depth + pobject + region_overlap + overlap3d;
  }
};

// Caches per-element sparse renders and the pairwise 3D-overlap matrix so a
// search can evaluate many selections over one scene. Elements are the
// candidates (in order) followed by the layout planes.
class SelectionContext {
 public:
  SelectionContext(const std::vector<Candidate>& candidates, const std::vector<LayoutPlane>& layouts,
                   const DepthImage& observed, const Grid<float>& p_object,
                   const CameraIntrinsics& K, const SelectionWeights& weights)
      : num_candidates_(int(candidates.size())),
        num_layouts_(int(layouts.size())),
        width_(observed.width()),
        height_(observed.height()),
        weights_(weights) {
    weights_.validate();
    if (!p_object.same_size(width_, height_))
      throw std::invalid_argument("selection: p_object dimensions do not match observation");
    if (K.width != width_ || K.height != height_)
      throw std::invalid_argument("selection: camera dimensions do not match observation");

    const size_t n_pixels = observed.depth.size();
    obs_valid_.resize(n_pixels);
    obs_value_.resize(n_pixels, 0.f);
    n_valid_obs_ = 0;
    for (size_t i = 0; i < n_pixels; ++i) {
      const float d = observed.depth.data[i];
      obs_valid_[i] = DepthImage::is_valid(d);
      if (obs_valid_[i]) {
        obs_value_[i] = d;
        ++n_valid_obs_;
      }
    }
    pobj_ = p_object;
    total_pobj_ = 0;
    for (float p : pobj_.data) {
      if (p < 0.f || p > 1.f) throw std::invalid_argument("selection: p_object outside [0,1]");
      total_pobj_ += p;
    }

    const int ne = num_elements();
    pix_.resize(ne);
    region_pix_.resize(ne);
    energies_.resize(ne, 0.0);
    for (int e = 0; e < ne; ++e) {
      if (e < num_candidates_) {
        const Candidate& c = candidates[e];
        if (!c.render.depth.depth.same_size(width_, height_) ||
            !c.depth_range.near_depth.depth.same_size(width_, height_))
          throw std::invalid_argument("selection: candidate render dimensions do not match");
        build_entries(c.render.depth, c.depth_range.near_depth, c.depth_range.far_depth, pix_[e]);
        if (!c.region.same_size(width_, height_))
          throw std::invalid_argument("selection: candidate region dimensions do not match");
        for (size_t i = 0; i < c.region.size(); ++i)
          if (c.region.data[i]) region_pix_[e].push_back(int(i));
        energies_[e] = candidate_energy(c, weights_);
      } else {
        const auto r = render_layout(layouts[e - num_candidates_], K);
        build_entries(r.near_depth, r.near_depth, r.far_depth, pix_[e]);
      }
    }

    // pairwise 3D overlap, subsampled by stride and rescaled
    overlap3d_.assign(size_t(ne) * ne, 0.0);
    const int ss = weights_.overlap_subsample;
    const double scale = double(ss) * ss;
    for (int i = 0; i < ne; ++i)
      for (int k = i + 1; k < ne; ++k) {
        double sum = 0;
        size_t a = 0, b = 0;
        const auto& pa = pix_[i];
        const auto& pb = pix_[k];
        while (a < pa.size() && b < pb.size()) {
          if (pa[a].idx < pb[b].idx)
            ++a;
          else if (pa[a].idx > pb[b].idx)
            ++b;
          else {
            const int idx = pa[a].idx;
            if (ss == 1 || ((idx % width_) % ss == 0 && (idx / width_) % ss == 0)) {
              const double lo = std::max(pa[a].near_d, pb[b].near_d);
              const double hi = std::min(pa[a].far_d, pb[b].far_d);
              if (hi > lo) sum += hi - lo;
            }
            ++a;
            ++b;
          }
        }
        overlap3d_[size_t(i) * ne + k] = sum * scale;
      }

    gen_.assign(n_pixels, 0);
    rgen_.assign(n_pixels, 0);
    front_depth_.assign(n_pixels, 0.f);
    front_aval_.assign(n_pixels, 0.0);
    front_obj_.assign(n_pixels, 0);
    touched_.reserve(n_pixels);
  }

  int num_elements() const { return num_candidates_ + num_layouts_; }
  int num_candidates() const { return num_candidates_; }
  int num_layouts() const { return num_layouts_; }
  bool is_object(int e) const { return e < num_candidates_; }
  double element_energy(int e) const { return energies_[e]; }
  const SelectionWeights& weights() const { return weights_; }

  // Renders of two elements share at least one pixel.
  bool renders_overlap(int i, int k) const {
    size_t a = 0, b = 0;
    const auto& pa = pix_[i];
    const auto& pb = pix_[k];
    while (a < pa.size() && b < pb.size()) {
      if (pa[a].idx < pb[b].idx)
        ++a;
      else if (pa[a].idx > pb[b].idx)
        ++b;
      else
        return true;
    }
    return false;
  }

  SelectionTerms eval_terms(const std::vector<uint8_t>& y) {
    if (int(y.size()) != num_elements())
      throw std::invalid_argument("selection: y size does not match element count");
    SelectionTerms terms;
    ++cur_gen_;
    touched_.clear();

    for (int e = 0; e < num_elements(); ++e) {
      if (!y[e]) continue;
      const uint8_t obj = is_object(e) ? 1 : 0;
      for (const auto& entry : pix_[e]) {
        if (gen_[entry.idx] != cur_gen_) {
          gen_[entry.idx] = cur_gen_;
          front_depth_[entry.idx] = entry.depth;
          front_aval_[entry.idx] = entry.aval;
          front_obj_[entry.idx] = obj;
          touched_.push_back(entry.idx);
        } else if (entry.depth < front_depth_[entry.idx]) {
          front_depth_[entry.idx] = entry.depth;
          front_aval_[entry.idx] = entry.aval;
          front_obj_[entry.idx] = obj;
        }
      }
      if (obj) {
        for (int idx : region_pix_[e]) {
          if (rgen_[idx] != cur_gen_)
            rgen_[idx] = cur_gen_;
          else
            terms.region_overlap += 1.0;  // every cover beyond the first
        }
      }
    }

    long valid_touched = 0;
    double pobj_touched = 0, pobj_dev = 0;
    for (int idx : touched_) {
      if (obs_valid_[idx]) {
        terms.depth += front_aval_[idx];
        ++valid_touched;
      }
      const double p = pobj_.data[idx];
      pobj_touched += p;
      pobj_dev += front_obj_[idx] ? 1.0 - p : p;
    }
    terms.depth += double(n_valid_obs_ - valid_touched);  // unexplained pixels take the clip max
    terms.pobject = total_pobj_ - pobj_touched + pobj_dev;

    for (int i = 0; i < num_elements(); ++i) {
      if (!y[i]) continue;
      for (int k = i + 1; k < num_elements(); ++k)
        if (y[k]) terms.overlap3d += overlap3d_[size_t(i) * num_elements() + k];
    }
    return terms;
  }

  double eval(const std::vector<uint8_t>& y, double depth_weight = 1.0) {
    return eval_terms(y).total(depth_weight);
  }

  // Composite z-buffer of the selected elements (same front rule as eval).
  DepthImage composite(const std::vector<uint8_t>& y) const {
    DepthImage out(width_, height_);
    for (int e = 0; e < num_elements(); ++e) {
      if (!y[e]) continue;
      for (const auto& entry : pix_[e]) {
        float& d = out.depth.data[entry.idx];
        if (!DepthImage::is_valid(d) || entry.depth < d) d = entry.depth;
      }
    }
    return out;
  }

 private:
  struct PixEntry {
    int idx;
    float depth;
    float near_d, far_d;
    double aval;  // clipped depth-term value if this element is frontmost; 0 where obs missing
  };

  void build_entries(const DepthImage& depth, const DepthImage& near_d, const DepthImage& far_d,
                     std::vector<PixEntry>& out) {
    for (size_t i = 0; i < depth.depth.size(); ++i) {
      const float d = depth.depth.data[i];
      if (!DepthImage::is_valid(d)) continue;
      PixEntry e;
      e.idx = int(i);
      e.depth = d;
      e.near_d = near_d.depth.data[i];
      e.far_d = far_d.depth.data[i];
      e.aval = 0.0;
      if (obs_valid_[i]) {
        const double dev = std::abs(std::log2(double(d) / double(obs_value_[i])));
        e.aval = std::clamp(dev - weights_.depth_clip_base, 0.0, 1.0);
      }
      out.push_back(e);
    }
  }

  int num_candidates_, num_layouts_;
  int width_, height_;
  SelectionWeights weights_;

  std::vector<std::vector<PixEntry>> pix_;
  std::vector<std::vector<int>> region_pix_;
  std::vector<double> energies_;
  std::vector<double> overlap3d_;
  std::vector<uint8_t> obs_valid_;
  std::vector<float> obs_value_;
  Grid<float> pobj_;
  double total_pobj_ = 0;
  long n_valid_obs_ = 0;

  // per-eval scratch, generation-stamped
  uint32_t cur_gen_ = 0;
  std::vector<uint32_t> gen_, rgen_;
  std::vector<float> front_depth_;
  std::vector<double> front_aval_;
  std::vector<uint8_t> front_obj_;
  std::vector<int> touched_;
};

// Scene-level objective for one selection; y covers the candidates followed
// by the layouts.
inline double selection_cost(const std::vector<uint8_t>& y, const std::vector<Candidate>& candidates,
                             const std::vector<LayoutPlane>& layouts, const DepthImage& observed,
                             const Grid<float>& p_object, const CameraIntrinsics& K,
                             const SelectionWeights& w) {
  SelectionContext ctx(candidates, layouts, observed, p_object, K, w);
  return ctx.eval(y);
}

struct ComposeParams {
  int stage3_object_trials = 30;  // strongest unselected candidates revisited in the swap stage
};

struct ComposeTrace {
  double stage1_cost = 0, stage2_cost = 0, stage3_cost = 0;
};

namespace detail {

inline SceneHypothesis finish_hypothesis(SelectionContext& ctx, const std::vector<uint8_t>& y) {
  SceneHypothesis hyp;
  hyp.selected_candidates.assign(y.begin(), y.begin() + ctx.num_candidates());
  hyp.selected_layouts.assign(y.begin() + ctx.num_candidates(), y.end());
  hyp.composite_render = ctx.composite(y);
  hyp.cost = ctx.eval(y);
  return hyp;
}

}  // namespace detail

// Three-stage search: greedy addition with the depth term upweighted, then
// single-flip hill climbing, then a swap pass that tries each strong unused
// proposal while evicting whatever its render overlaps. Ties always resolve
// to the lowest element index.
inline SceneHypothesis compose_scene_ctx(SelectionContext& ctx, const ComposeParams& params = {},
                                         ComposeTrace* trace = nullptr) {
  const int ne = ctx.num_elements();
  std::vector<uint8_t> y(ne, 0);

  // stage 1: greedy growth under the depth-weighted objective
  const double factor = ctx.weights().greedy_depth_factor;
  double current = ctx.eval(y, factor);
  while (true) {
    int best = -1;
    double best_cost = current;
    for (int e = 0; e < ne; ++e) {
      if (y[e]) continue;
      y[e] = 1;
      const double c = ctx.eval(y, factor);
      y[e] = 0;
      if (c < best_cost) {
        best_cost = c;
        best = e;
      }
    }
    if (best < 0) break;
    y[best] = 1;
    current = best_cost;
  }
  if (trace) trace->stage1_cost = ctx.eval(y);

  // stage 2: hill climbing on the unweighted cost, best single flip
  current = ctx.eval(y);
  while (true) {
    int best = -1;
    double best_cost = current;
    for (int e = 0; e < ne; ++e) {
      y[e] ^= 1;
      const double c = ctx.eval(y);
      y[e] ^= 1;
      if (c < best_cost) {
        best_cost = c;
        best = e;
      }
    }
    if (best < 0) break;
    y[best] ^= 1;
    current = best_cost;
  }
  if (trace) trace->stage2_cost = current;

  // stage 3: swap in unused layouts and the strongest unused objects,
  // evicting everything their renders overlap
  std::vector<int> trials;
  for (int e = ctx.num_candidates(); e < ne; ++e)
    if (!y[e]) trials.push_back(e);
  {
    std::vector<int> unused_objects;
    for (int e = 0; e < ctx.num_candidates(); ++e)
      if (!y[e]) unused_objects.push_back(e);
    std::stable_sort(unused_objects.begin(), unused_objects.end(), [&](int a, int b) {
      if (ctx.element_energy(a) != ctx.element_energy(b))
        return ctx.element_energy(a) < ctx.element_energy(b);
      return a < b;
    });
    if (int(unused_objects.size()) > params.stage3_object_trials)
      unused_objects.resize(params.stage3_object_trials);
    trials.insert(trials.end(), unused_objects.begin(), unused_objects.end());
  }
  std::sort(trials.begin(), trials.end());

  for (int e : trials) {
    if (y[e]) continue;  // may have been swapped in by an earlier trial
    std::vector<uint8_t> y_try = y;
    y_try[e] = 1;
    for (int s = 0; s < ne; ++s)
      if (s != e && y_try[s] && ctx.renders_overlap(e, s)) y_try[s] = 0;
    const double c = ctx.eval(y_try);
    if (c < current) {
      y = std::move(y_try);
      current = c;
    }
  }
  if (trace) trace->stage3_cost = current;

  return detail::finish_hypothesis(ctx, y);
}

inline SceneHypothesis compose_scene(const std::vector<Candidate>& candidates,
                                     const std::vector<LayoutPlane>& layouts,
                                     const DepthImage& observed, const Grid<float>& p_object,
                                     const CameraIntrinsics& K, const SelectionWeights& w,
                                     const ComposeParams& params = {}, ComposeTrace* trace = nullptr) {
  SelectionContext ctx(candidates, layouts, observed, p_object, K, w);
  return compose_scene_ctx(ctx, params, trace);
}

// Exact minimizer by exhaustive enumeration over every candidate and layout
// flag; ties go to the lexicographically smallest selection. Testing oracle
// for the staged search.
inline SceneHypothesis brute_force_compose_ctx(SelectionContext& ctx) {
  if (ctx.num_candidates() > 20)
    throw std::invalid_argument("brute_force_compose: candidate pool too large");
  const int ne = ctx.num_elements();
  std::vector<uint8_t> y(ne, 0), best_y(ne, 0);
  double best = std::numeric_limits<double>::infinity();

  const std::function<void(int)> visit = [&](int e) {
    if (e == ne) {
      const double c = ctx.eval(y);
      if (c < best) {
        best = c;
        best_y = y;
      }
      return;
    }
    y[e] = 0;
    visit(e + 1);
    y[e] = 1;
    visit(e + 1);
    y[e] = 0;
  };
  visit(0);
  return detail::finish_hypothesis(ctx, best_y);
}

inline SceneHypothesis brute_force_compose(const std::vector<Candidate>& candidates,
                                           const std::vector<LayoutPlane>& layouts,
                                           const DepthImage& observed, const Grid<float>& p_object,
                                           const CameraIntrinsics& K, const SelectionWeights& w) {
  SelectionContext ctx(candidates, layouts, observed, p_object, K, w);
  return brute_force_compose_ctx(ctx);
}

}  // namespace scenecomp
