#include <catch2/catch_amalgamated.hpp>

#include "cost_oracles.hpp"
#include "scenecomp/compose/selection.hpp"
#include "scenecomp/core/rng.hpp"

using namespace scenecomp;
using namespace testutil;
using oracle::selection_cost_oracle;
using Catch::Approx;



TEST_CASE("candidate_energy closed form") {
  Candidate c = fake_candidate(0, 2, 2);
  c.fitting_energy = 0;
  c.class_probs = peaked_probs(3, 1.0 - 80e-9);  // max class prob effectively 1
  c.non_object_prob = 1e-6;
  const SelectionWeights w;
  REQUIRE(candidate_energy(c, w) == Approx(1300.0 * std::log(1e-6)).epsilon(1e-6));
  REQUIRE(candidate_energy(c, w) == Approx(-17960.2).epsilon(1e-4));
}

TEST_CASE("candidate_energy orders by fitting energy when all else is equal") {
  Candidate a = fake_candidate(0, 2, 2), b = fake_candidate(1, 2, 2);
  a.class_probs = b.class_probs = peaked_probs(5, 0.7);
  a.non_object_prob = b.non_object_prob = 0.2;
  a.fitting_energy = 10;
  b.fitting_energy = 30;
  const SelectionWeights w;
  REQUIRE(candidate_energy(a, w) < candidate_energy(b, w));
}

TEST_CASE("candidate_energy matches the formula on random candidates") {
  Rng rng(71);
  const SelectionWeights w;
  for (int i = 0; i < 100; ++i) {
    Candidate c = fake_candidate(i, 2, 2);
    c.fitting_energy = rng.uniform(0, 1000);
    c.class_probs = peaked_probs(rng.uniform_int(0, 80), rng.uniform(0.3, 0.99));
    c.non_object_prob = rng.uniform(0, 1);
    const double max_p = *std::max_element(c.class_probs.begin(), c.class_probs.end());
    const double want = w.w_f * c.fitting_energy + w.w_c * std::log(std::max(max_p, 1e-6)) +
                        w.w_b * std::log(std::max(c.non_object_prob, 1e-6));
    REQUIRE(candidate_energy(c, w) == Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("prune keeps one region out of identical overlaps") {
  std::vector<Candidate> pool;
  for (int i = 0; i < 6; ++i) {
    Candidate c = fake_candidate(i, 8, 8);
    c.region_id = i;
    for (int y = 2; y < 6; ++y)
      for (int x = 2; x < 6; ++x) c.region(x, y) = 1;  // identical regions
    c.non_object_prob = 0.1 + 0.1 * i;
    pool.push_back(std::move(c));
  }
  const auto kept = prune_proposals(pool, SelectionWeights{});
  REQUIRE(kept.size() == 1);
  REQUIRE(kept[0].id == 0);  // lowest non-object probability wins
}

TEST_CASE("prune passes small pools through the threshold untouched") {
  std::vector<Candidate> pool;
  for (int i = 0; i < 5; ++i) {
    Candidate c = fake_candidate(i, 8, 8);
    c.region_id = i;
    c.region(i, i) = 1;  // disjoint
    c.non_object_prob = 0.2;
    pool.push_back(std::move(c));
  }
  REQUIRE(prune_proposals(pool, SelectionWeights{}).size() == 5);
}

TEST_CASE("prune shortlists per region like a direct sort") {
  // one region, three classes, several shapes per class
  std::vector<Candidate> pool;
  Rng rng(81);
  int id = 0;
  std::vector<double> probs(kObjectClasses, 0.2 / (kObjectClasses - 2));
  probs[9] = 0.5;  // strongest class
  probs[4] = 0.3;  // runner-up
  for (int cls : {4, 9, 17})
    for (int rank = 0; rank < 7; ++rank) {
      Candidate c = fake_candidate(id++, 8, 8);
      c.region_id = 0;
      c.region(3, 3) = 1;
      c.class_probs = probs;
      c.class_id = cls;
      c.shape_rank = rank;
      c.non_object_prob = 0.1;
      c.fitting_energy = rng.uniform(0, 100);
      pool.push_back(std::move(c));
    }

  const SelectionWeights w;
  PruneParams params;
  const auto kept = prune_proposals(pool, w, params);
  REQUIRE(kept.size() == size_t(params.keep_per_region));

  // oracle: classes 9 and 4 (probability then index), ranks 0..4, best two by energy
  std::vector<const Candidate*> shortlist;
  for (const auto& c : pool)
    if ((c.class_id == 9 || c.class_id == 4) && c.shape_rank < 5) shortlist.push_back(&c);
  std::sort(shortlist.begin(), shortlist.end(), [&](const Candidate* a, const Candidate* b) {
    return candidate_energy(*a, w) < candidate_energy(*b, w);
  });
  REQUIRE(kept[0].id == std::min(shortlist[0]->id, shortlist[1]->id));
  REQUIRE(kept[1].id == std::max(shortlist[0]->id, shortlist[1]->id));
}

TEST_CASE("selection depth term boundary values") {
  const int w = 4, h = 4;
  const auto K = small_camera(w, h);
  DepthImage obs(w, h);
  Grid<float> pobj(w, h, 0.f);
  for (auto& v : obs.depth.data) v = 2.0f;

  auto c = fake_candidate(0, w, h);
  // pixel at exactly the noise-floor ratio and one at double depth
  set_pixel(c, 0, 0, 2.0f * 1.03f, 2.0f * 1.03f);
  set_pixel(c, 1, 0, 4.0f, 4.0f);

  SelectionWeights weights;
  SelectionContext ctx({c}, {}, obs, pobj, K, weights);
  const auto terms = ctx.eval_terms({1});

  const double ratio_exact = std::clamp(std::abs(std::log2(double(2.0f * 1.03f) / 2.0)) -
                                            weights.depth_clip_base,
                                        0.0, 1.0);
  const double expect_double = 1.0 - std::log2(1.03);
  // 14 uncovered valid pixels contribute 1 each
  REQUIRE(terms.depth == Approx(14.0 + ratio_exact + expect_double).margin(1e-7));
  REQUIRE(ratio_exact <= 1e-7);  // ratio 1.03 sits exactly on the clip floor
  REQUIRE(expect_double == Approx(0.9573556625915).margin(1e-9));
}

TEST_CASE("selection region term counts double-claimed pixels") {
  const int w = 8, h = 8;
  const auto K = small_camera(w, h);
  DepthImage obs(w, h);
  for (auto& v : obs.depth.data) v = 3.0f;
  Grid<float> pobj(w, h, 0.5f);

  auto a = fake_candidate(0, w, h);
  auto b = fake_candidate(1, w, h);
  for (int y = 1; y < 4; ++y)
    for (int x = 1; x < 4; ++x) {
      a.region(x, y) = 1;
      b.region(x, y) = 1;
      set_pixel(a, x, y, 3.0f, 3.2f);
      set_pixel(b, x, y, 5.0f, 5.1f);  // behind a, no 3d overlap
    }

  SelectionWeights weights;
  SelectionContext ctx({a, b}, {}, obs, pobj, K, weights);
  REQUIRE(ctx.eval_terms({1, 1}).region_overlap == Approx(9.0));
  REQUIRE(ctx.eval_terms({1, 0}).region_overlap == 0.0);
  REQUIRE(ctx.eval_terms({1, 1}).overlap3d == 0.0);
}

TEST_CASE("selection cost matches the naive oracle on random scenes") {
  Rng rng(91);
  SelectionWeights weights;
  weights.overlap_subsample = 1;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scene(rng, 6);
    SelectionContext ctx(s.candidates, s.layouts, s.observed, s.pobj, s.K, weights);
    for (int k = 0; k < 4; ++k) {
      const auto y = random_selection(rng, s.candidates.size() + s.layouts.size());
      const double got = ctx.eval(y);
      const double want =
          selection_cost_oracle(y, s.candidates, s.layouts, s.observed, s.pobj, s.K, weights);
      if (want == 0.0)
        REQUIRE(got == 0.0);
      else
        REQUIRE(got == Approx(want).epsilon(1e-9));

      const auto terms = ctx.eval_terms(y);
      REQUIRE(terms.depth >= 0);
      REQUIRE(terms.pobject >= 0);
      REQUIRE(terms.region_overlap >= 0);
      REQUIRE(terms.overlap3d >= 0);
      REQUIRE(terms.depth <= double(s.observed.valid_count()));

      // weighted evaluation matches the oracle with the same weight
      const double gw = ctx.eval(y, weights.greedy_depth_factor);
      const double ww = selection_cost_oracle(y, s.candidates, s.layouts, s.observed, s.pobj, s.K,
                                              weights, weights.greedy_depth_factor);
      REQUIRE(gw == Approx(ww).epsilon(1e-9));
    }
  }
}

TEST_CASE("selection_cost validates dimensions") {
  const auto K = small_camera(8, 8);
  DepthImage obs(8, 8);
  Grid<float> pobj(4, 4, 0.f);
  REQUIRE_THROWS_AS(selection_cost({}, {}, {}, obs, pobj, K, SelectionWeights{}),
                    std::invalid_argument);
}

TEST_CASE("compose recovers the ground truth among noisy distractors") {
  const int w = 24, h = 18;
  const auto K = small_camera(w, h);
  DepthImage obs(w, h);
  Grid<float> pobj(w, h, 0.05f);

  // three true objects tiling distinct areas; observation equals their render
  std::vector<Candidate> pool;
  for (int i = 0; i < 3; ++i) {
    auto c = fake_candidate(i, w, h);
    c.non_object_prob = 0.05;
    c.fitting_energy = 0.0;
    for (int y = 2; y < 8; ++y)
      for (int x = 2 + 7 * i; x < 7 + 7 * i; ++x) {
        const float d = 2.0f + 0.1f * i;
        set_pixel(c, x, y, d, d + 0.3f);
        c.region(x, y) = 1;
        obs.set(x, y, d);
        pobj(x, y) = 0.9f;
      }
    pool.push_back(std::move(c));
  }
  // distractors: same areas, badly wrong depth
  for (int i = 0; i < 3; ++i) {
    auto c = fake_candidate(3 + i, w, h);
    c.region_id = 3 + i;
    c.non_object_prob = 0.6;
    c.fitting_energy = 500.0;
    for (int y = 2; y < 8; ++y)
      for (int x = 2 + 7 * i; x < 7 + 7 * i; ++x) {
        set_pixel(c, x, y, 4.5f, 4.9f);
        c.region(x, y) = 1;
      }
    pool.push_back(std::move(c));
  }

  SelectionWeights weights;
  weights.overlap_subsample = 1;
  const auto hyp = compose_scene(pool, {}, obs, pobj, K, weights);
  REQUIRE(hyp.selected_candidates == std::vector<uint8_t>{1, 1, 1, 0, 0, 0});
}

TEST_CASE("compose with an empty pool returns the layout-only hypothesis") {
  const int w = 16, h = 12;
  const auto K = small_camera(w, h);
  DepthImage obs(w, h);
  for (auto& v : obs.depth.data) v = 2.0f;
  Grid<float> pobj(w, h, 0.1f);
  auto floor = LayoutPlane::from_category(LayoutCategory::Floor, 1.2);

  SelectionWeights weights;
  weights.overlap_subsample = 1;
  const auto hyp = compose_scene({}, {floor}, obs, pobj, K, weights);
  REQUIRE(hyp.selected_candidates.empty());
  REQUIRE(hyp.selected_layouts.size() == 1);
  const double direct = selection_cost({hyp.selected_layouts[0]}, {}, {floor}, obs, pobj, K, weights);
  REQUIRE(hyp.cost == Approx(direct).epsilon(1e-12));
}

TEST_CASE("compose stage costs never increase and runs are deterministic") {
  Rng rng(101);
  SelectionWeights weights;
  weights.overlap_subsample = 1;
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_scene(rng, 8);
    ComposeTrace t1, t2;
    const auto h1 = compose_scene(s.candidates, s.layouts, s.observed, s.pobj, s.K, weights, {}, &t1);
    const auto h2 = compose_scene(s.candidates, s.layouts, s.observed, s.pobj, s.K, weights, {}, &t2);
    REQUIRE(t1.stage2_cost <= t1.stage1_cost + 1e-12);
    REQUIRE(t1.stage3_cost <= t1.stage2_cost + 1e-12);
    REQUIRE(h1.selected_candidates == h2.selected_candidates);
    REQUIRE(h1.selected_layouts == h2.selected_layouts);
    REQUIRE(h1.cost == h2.cost);

    // stored cost equals a from-scratch evaluation
    std::vector<uint8_t> y(h1.selected_candidates);
    y.insert(y.end(), h1.selected_layouts.begin(), h1.selected_layouts.end());
    const double direct =
        selection_cost(y, s.candidates, s.layouts, s.observed, s.pobj, s.K, weights);
    REQUIRE(h1.cost == Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("brute force on one candidate picks the cheaper option") {
  const int w = 8, h = 8;
  const auto K = small_camera(w, h);
  DepthImage obs(w, h);
  for (auto& v : obs.depth.data) v = 2.0f;
  Grid<float> pobj(w, h, 0.1f);

  auto good = fake_candidate(0, w, h);
  good.non_object_prob = 0.1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      set_pixel(good, x, y, 2.0f, 2.2f);
      pobj(x, y) = 0.95f;
    }
  SelectionWeights weights;
  weights.overlap_subsample = 1;
  auto hyp = brute_force_compose({good}, {}, obs, pobj, K, weights);
  REQUIRE(hyp.selected_candidates == std::vector<uint8_t>{1});

  // make inclusion worse than exclusion
  auto bad = good;
  for (auto& v : bad.render.depth.depth.data)
    if (DepthImage::is_valid(v)) v = 8.0f;
  for (auto& v : bad.depth_range.near_depth.depth.data)
    if (DepthImage::is_valid(v)) v = 8.0f;
  Grid<float> pobj_low(w, h, 0.02f);
  hyp = brute_force_compose({bad}, {}, obs, pobj_low, K, weights);
  REQUIRE(hyp.selected_candidates == std::vector<uint8_t>{0});
}

TEST_CASE("brute force selects exactly the negative-marginal candidates when separable") {
  const int w = 20, h = 6;
  const auto K = small_camera(w, h);
  DepthImage obs(w, h);  // all missing: the depth term is zero for everyone
  Grid<float> pobj(w, h, 0.f);

  // disjoint single-pixel candidates; marginal = (1 - 2 * pobj) at the pixel
  std::vector<Candidate> pool;
  std::vector<uint8_t> expect;
  Rng rng(111);
  for (int i = 0; i < 8; ++i) {
    auto c = fake_candidate(i, w, h);
    set_pixel(c, 2 * i, 2, 1.5f, 1.6f);
    const float p = float(rng.uniform(0.0, 1.0));
    pobj(2 * i, 2) = p;
    expect.push_back(p > 0.5f ? 1 : 0);
    pool.push_back(std::move(c));
  }
  SelectionWeights weights;
  weights.overlap_subsample = 1;
  const auto hyp = brute_force_compose(pool, {}, obs, pobj, K, weights);
  REQUIRE(hyp.selected_candidates == expect);
}

TEST_CASE("compose matches brute force on small random scenes") {
  Rng rng(121);
  SelectionWeights weights;
  weights.overlap_subsample = 1;
  int optimal = 0, total = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const auto s = random_scene(rng, 7);
    SelectionContext ctx(s.candidates, s.layouts, s.observed, s.pobj, s.K, weights);
    const auto exact = brute_force_compose_ctx(ctx);
    const auto heur = compose_scene_ctx(ctx);
    REQUIRE(heur.cost >= exact.cost - 1e-9);
    ++total;
    if (heur.cost <= exact.cost + 1e-9) {
      ++optimal;
      // when the search reaches the optimum it must agree on cost exactly
      REQUIRE(heur.cost == Approx(exact.cost).margin(1e-9));
    }
  }
  REQUIRE(optimal >= total * 3 / 4);
}

TEST_CASE("brute force refuses oversized pools") {
  const auto K = small_camera(4, 4);
  DepthImage obs(4, 4);
  Grid<float> pobj(4, 4, 0.f);
  std::vector<Candidate> pool;
  for (int i = 0; i < 21; ++i) pool.push_back(fake_candidate(i, 4, 4));
  REQUIRE_THROWS_AS(brute_force_compose(pool, {}, obs, pobj, K, SelectionWeights{}),
                    std::invalid_argument);
}

TEST_CASE("a disjoint perfectly-fitting candidate never increases the cost") {
  Rng rng(131);
  SelectionWeights weights;
  weights.overlap_subsample = 1;
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_scene(rng, 5);
    // perfect candidate in the top-right corner, clear of the random boxes
    auto c = fake_candidate(int(s.candidates.size()), s.observed.width(), s.observed.height());
    for (int y = 8; y < 11; ++y)
      for (int x = 12; x < 15; ++x) {
        const float d = 1.2f;
        s.observed.set(x, y, d);
        s.pobj(x, y) = 0.9f;
        set_pixel(c, x, y, d, d);
        c.region(x, y) = 1;
      }
    for (auto& other : s.candidates) {
      for (int y = 8; y < 11; ++y)
        for (int x = 12; x < 15; ++x) {
          other.region(x, y) = 0;
          other.render.mask(x, y) = 0;
          other.render.depth.set(x, y, DepthImage::missing_value());
          other.depth_range.mask(x, y) = 0;
          other.depth_range.near_depth.set(x, y, DepthImage::missing_value());
          other.depth_range.far_depth.set(x, y, DepthImage::missing_value());
        }
    }
    auto pool = s.candidates;
    pool.push_back(c);
    SelectionContext ctx(pool, s.layouts, s.observed, s.pobj, s.K, weights);
    for (int k = 0; k < 5; ++k) {
      auto y = random_selection(rng, pool.size() + s.layouts.size());
      y[s.candidates.size()] = 0;
      const double without = ctx.eval(y);
      y[s.candidates.size()] = 1;
      REQUIRE(ctx.eval(y) <= without + 1e-12);
    }
  }
}
