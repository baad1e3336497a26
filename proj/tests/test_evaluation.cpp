#include <catch2/catch_amalgamated.hpp>

#include "scenecomp/core/rng.hpp"
#include "scenecomp/eval/metrics.hpp"
#include "scenecomp/eval/voxel.hpp"
#include "scenecomp/synth/shapes.hpp"
#include "test_scenes.hpp"

using namespace scenecomp;
using Catch::Approx;
using Eigen::AlignedBox3d;
using Eigen::Vector3d;

namespace {

CameraIntrinsics eval_camera(int w = 64, int h = 48, double f = 28.0) {
  CameraIntrinsics K;
  K.fx = K.fy = f;
  K.cx = w / 2;
  K.cy = h / 2;
  K.width = w;
  K.height = h;
  return K;
}

Candidate mesh_candidate(int id, const TriangleMesh& mesh, const PoseTransform& pose,
                         const CameraIntrinsics& K) {
  Candidate c;
  c.id = id;
  c.mesh = mesh;
  c.pose = pose;
  c.region = PixelMask(K.width, K.height, 0);
  c.class_probs = std::vector<double>(kObjectClasses, 1.0 / kObjectClasses);
  prepare_candidate(c, K);
  return c;
}

// exhaustive nearest-occupied scan mirroring the tolerant matching rule
void tolerant_oracle(const VoxelGrid& pred, const VoxelGrid& gt, double tol, double& precision,
                     double& recall) {
  std::vector<Vector3d> gt_centers;
  for (int iz = 0; iz < gt.dims.z(); ++iz)
    for (int iy = 0; iy < gt.dims.y(); ++iy)
      for (int ix = 0; ix < gt.dims.x(); ++ix)
        if (gt.in_scope[gt.index(ix, iy, iz)] && gt.occupancy[gt.index(ix, iy, iz)])
          gt_centers.push_back(gt.center(ix, iy, iz));

  std::vector<uint8_t> recalled(gt_centers.size(), 0);
  size_t np = 0, correct = 0;
  for (int iz = 0; iz < pred.dims.z(); ++iz)
    for (int iy = 0; iy < pred.dims.y(); ++iy)
      for (int ix = 0; ix < pred.dims.x(); ++ix) {
        const size_t i = pred.index(ix, iy, iz);
        if (!pred.in_scope[i] || !pred.occupancy[i]) continue;
        ++np;
        const Vector3d c = pred.center(ix, iy, iz);
        const double eps2 = tol * c.z() * tol * c.z();
        bool hit = false;
        for (size_t g = 0; g < gt_centers.size(); ++g)
          if ((gt_centers[g] - c).squaredNorm() <= eps2) {
            hit = true;
            recalled[g] = 1;
          }
        correct += hit;
      }
  size_t nrec = 0;
  for (uint8_t v : recalled) nrec += v;
  precision = np == 0 ? 1.0 : double(correct) / double(np);
  recall = gt_centers.empty() ? 1.0 : double(nrec) / double(gt_centers.size());
}

VoxelGrid random_grid(Rng& rng, const VoxelGrid& frame, double density) {
  VoxelGrid g = frame;
  for (size_t i = 0; i < g.cell_count(); ++i)
    g.occupancy[i] = g.in_scope[i] && rng.chance(density);
  return g;
}

}  // namespace

TEST_CASE("relative depth error basics") {
  DepthImage gt(8, 8), pred(8, 8);
  Rng rng(201);
  for (size_t i = 0; i < gt.depth.size(); ++i) gt.depth.data[i] = float(rng.uniform(0.5, 5.0));
  pred = gt;
  REQUIRE(relative_depth_error(pred, gt) == 0.0);

  for (size_t i = 0; i < pred.depth.size(); ++i) pred.depth.data[i] = 1.1f * gt.depth.data[i];
  REQUIRE(relative_depth_error(pred, gt) == Approx(0.1).margin(1e-6));

  REQUIRE_THROWS_AS(relative_depth_error(DepthImage(8, 8), gt), std::invalid_argument);
}

TEST_CASE("relative depth error equals the direct sum") {
  Rng rng(211);
  for (int t = 0; t < 50; ++t) {
    DepthImage gt(12, 9), pred(12, 9);
    double sum = 0;
    long n = 0;
    for (size_t i = 0; i < gt.depth.size(); ++i) {
      if (rng.chance(0.1)) continue;
      gt.depth.data[i] = float(rng.uniform(0.5, 6.0));
      pred.depth.data[i] = float(rng.uniform(0.5, 6.0));
      sum += std::abs(double(gt.depth.data[i]) - double(pred.depth.data[i])) /
             double(gt.depth.data[i]);
      ++n;
    }
    if (n == 0) continue;
    REQUIRE(relative_depth_error(pred, gt) == Approx(sum / n).epsilon(1e-12));
  }
}

TEST_CASE("relative depth error scales with the deviation") {
  Rng rng(221);
  DepthImage gt(10, 10), p1(10, 10), p2(10, 10);
  for (size_t i = 0; i < gt.depth.size(); ++i) {
    gt.depth.data[i] = float(rng.uniform(1.0, 4.0));
    const float dev = float(rng.uniform(0.0, 0.3));
    p1.depth.data[i] = gt.depth.data[i] + dev;
    p2.depth.data[i] = gt.depth.data[i] + 3.0f * dev;
  }
  REQUIRE(relative_depth_error(p2, gt) == Approx(3.0 * relative_depth_error(p1, gt)).epsilon(1e-5));
}

TEST_CASE("voxelized cube matches its analytic volume") {
  const auto K = eval_camera();
  const auto cube = make_box({-0.5, -0.5, 1.5}, {0.5, 0.5, 2.5});
  const auto c = mesh_candidate(0, cube, {}, K);

  const double res = 0.03;
  const auto frame = make_voxel_grid(AlignedBox3d(Vector3d(-0.8, -0.8, 1.2), Vector3d(0.8, 0.8, 2.8)),
                                     res, K);
  const auto grid = voxelize_scene({c}, {1}, {}, {}, K, frame);

  // unit volume over the voxel volume; the cube is fully inside the frustum
  const double analytic = 1.0 / (res * res * res);
  const double got = double(grid.occupied_count());
  REQUIRE(got == Approx(analytic).epsilon(0.05));
}

TEST_CASE("voxelizing an empty hypothesis leaves everything free") {
  const auto K = eval_camera();
  const auto frame =
      make_voxel_grid(AlignedBox3d(Vector3d(-1, -1, 0.5), Vector3d(1, 1, 3)), 0.05, K);
  const auto grid = voxelize_scene({}, {}, {}, {}, K, frame);
  REQUIRE(grid.occupied_count() == 0);
}

TEST_CASE("voxel occupancy of disjoint boxes is the union and is monotone") {
  const auto K = eval_camera();
  const auto a = mesh_candidate(0, make_box({-0.6, -0.3, 1.6}, {-0.1, 0.3, 2.1}), {}, K);
  const auto b = mesh_candidate(1, make_box({0.2, -0.3, 2.2}, {0.7, 0.3, 2.7}), {}, K);
  const auto frame =
      make_voxel_grid(AlignedBox3d(Vector3d(-1, -0.6, 1.2), Vector3d(1, 0.6, 3.0)), 0.04, K);

  const auto ga = voxelize_scene({a, b}, {1, 0}, {}, {}, K, frame);
  const auto gb = voxelize_scene({a, b}, {0, 1}, {}, {}, K, frame);
  const auto gu = voxelize_scene({a, b}, {1, 1}, {}, {}, K, frame);
  for (size_t i = 0; i < gu.cell_count(); ++i) {
    REQUIRE(int(gu.occupancy[i]) == int(ga.occupancy[i] || gb.occupancy[i]));
    REQUIRE(gu.occupancy[i] >= ga.occupancy[i]);  // adding a model never removes voxels
  }
}

TEST_CASE("occupancy metrics are perfect for identical grids") {
  const auto K = eval_camera();
  const auto frame =
      make_voxel_grid(AlignedBox3d(Vector3d(-1, -1, 0.5), Vector3d(1, 1, 3)), 0.06, K);
  Rng rng(231);
  const auto g = random_grid(rng, frame, 0.2);
  const auto r = occupancy_metrics(g, g, 0.05);
  REQUIRE(r.get("occupancy_precision") == 1.0);
  REQUIRE(r.get("occupancy_recall") == 1.0);
  REQUIRE(r.get("occupancy_precision_eps") == 1.0);
  REQUIRE(r.get("occupancy_recall_eps") == 1.0);
  REQUIRE(r.get("freespace_precision") == 1.0);
  REQUIRE(r.get("freespace_recall") == 1.0);
}

TEST_CASE("one-voxel shift at two meters passes tolerant matching only") {
  const auto K = eval_camera();
  const double res = 0.03;
  const auto frame = make_voxel_grid(AlignedBox3d(Vector3d(-0.5, -0.5, 1.5), Vector3d(0.5, 0.5, 2.5)),
                                     res, K);
  VoxelGrid gt = frame, pred = frame;
  for (int iz = 0; iz < frame.dims.z(); ++iz)
    for (int iy = 5; iy < 12; ++iy)
      for (int ix = 5; ix < 12; ++ix) {
        const Vector3d c = frame.center(ix, iy, iz);
        if (std::abs(c.z() - 2.0) > 0.1) continue;
        if (frame.in_scope[frame.index(ix, iy, iz)]) {
          gt.occupancy[gt.index(ix, iy, iz)] = 1;
          if (ix + 1 < frame.dims.x() && frame.in_scope[frame.index(ix + 1, iy, iz)])
            pred.occupancy[pred.index(ix + 1, iy, iz)] = 1;  // shifted one voxel in x
        }
      }
  const auto r = occupancy_metrics(pred, gt, 0.05);  // eps at 2 m = 0.1 m
  REQUIRE(r.get("occupancy_precision") < 1.0);
  REQUIRE(r.get("occupancy_precision_eps") == 1.0);
}

TEST_CASE("occupancy metrics match the naive tolerant oracle") {
  const auto K = eval_camera(24, 18);
  const auto frame =
      make_voxel_grid(AlignedBox3d(Vector3d(-0.6, -0.6, 0.8), Vector3d(0.6, 0.6, 2.0)), 0.08, K);
  Rng rng(241);
  for (int t = 0; t < 10; ++t) {
    const auto pred = random_grid(rng, frame, 0.15);
    const auto gt = random_grid(rng, frame, 0.15);
    const double tol = rng.uniform(0.0, 0.08);
    const auto r = occupancy_metrics(pred, gt, tol);
    double oप, orc;
    tolerant_oracle(pred, gt, tol, oप, orc);
    REQUIRE(r.get("occupancy_precision_eps") == Approx(oप).margin(1e-12));
    REQUIRE(r.get("occupancy_recall_eps") == Approx(orc).margin(1e-12));

    REQUIRE(r.get("occupancy_precision_eps") >= r.get("occupancy_precision"));
    REQUIRE(r.get("occupancy_recall_eps") >= r.get("occupancy_recall"));
    for (const auto& [k, v] : r.entries) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
}

TEST_CASE("occupancy metrics reject mismatched frames") {
  const auto K = eval_camera();
  const auto a = make_voxel_grid(AlignedBox3d(Vector3d(0, 0, 1), Vector3d(1, 1, 2)), 0.1, K);
  const auto b = make_voxel_grid(AlignedBox3d(Vector3d(0, 0, 1), Vector3d(1, 1, 2)), 0.05, K);
  REQUIRE_THROWS_AS(occupancy_metrics(a, b, 0.05), std::invalid_argument);
}

TEST_CASE("layout pixel error is zero for identical sets and tracks label swaps") {
  const auto room = testroom::make_room();
  const auto zero = layout_pixel_error(room.layouts, room.layouts, room.K, &room.depth);
  REQUIRE(zero.get("layout_pixel_error") == 0.0);
  REQUIRE(zero.get("layout_pixel_error_visible") == 0.0);
  REQUIRE(zero.get("layout_pixel_error_occluded") == 0.0);

  // relabel left wall as right and vice versa, geometry unchanged
  auto swapped = room.layouts;
  for (auto& p : swapped) {
    if (p.category == LayoutCategory::LeftWall)
      p.category = LayoutCategory::RightWall;
    else if (p.category == LayoutCategory::RightWall)
      p.category = LayoutCategory::LeftWall;
  }
  const auto gtmap = scenecomp::detail::composite_layouts(room.layouts, room.K);
  long walls = 0, total = 0;
  for (int y = 0; y < room.K.height; ++y)
    for (int x = 0; x < room.K.width; ++x) {
      if (gtmap.label(x, y) < 0) continue;
      ++total;
      const auto c = LayoutCategory(gtmap.label(x, y));
      walls += c == LayoutCategory::LeftWall || c == LayoutCategory::RightWall;
    }
  const auto r = layout_pixel_error(swapped, room.layouts, room.K);
  REQUIRE(r.get("layout_pixel_error") == Approx(double(walls) / double(total)).margin(1e-12));
}

TEST_CASE("raising the floor only disturbs the floor boundary") {
  const auto room = testroom::make_room();
  auto raised = room.layouts;
  for (auto& p : raised)
    if (p.category == LayoutCategory::Floor) p.offset -= 0.2;  // raised = toward the camera level

  const auto pred = scenecomp::detail::composite_layouts(raised, room.K);
  const auto gt = scenecomp::detail::composite_layouts(room.layouts, room.K);
  long wrong = 0;
  for (int y = 0; y < room.K.height; ++y)
    for (int x = 0; x < room.K.width; ++x) {
      if (gt.label(x, y) < 0) continue;
      if (pred.label(x, y) == gt.label(x, y)) continue;
      ++wrong;
      // every disagreement involves the floor on one side
      const bool involves_floor = gt.label(x, y) == int8_t(LayoutCategory::Floor) ||
                                  pred.label(x, y) == int8_t(LayoutCategory::Floor);
      REQUIRE(involves_floor);
    }
  REQUIRE(wrong > 0);
}

TEST_CASE("layout depth error reflects a uniform wall push") {
  const auto K = eval_camera();
  auto wall = LayoutPlane::from_category(LayoutCategory::FrontWall, 3.0);
  auto pushed = wall;
  pushed.offset = 3.1;
  REQUIRE(layout_depth_error({wall}, {wall}, K).get("layout_depth_error") == 0.0);
  // front walls render at constant depth equal to their offset
  REQUIRE(layout_depth_error({pushed}, {wall}, K).get("layout_depth_error") ==
          Approx(0.1).margin(1e-6));
}

TEST_CASE("sensor depth error on occluded layout dwarfs the model error") {
  auto room = testroom::make_room();
  // cabinet hiding a chunk of the front wall
  testroom::add_occluder_slab(room, -0.9, 0.9, 0.1, room.spec.wall_z - 1.2);

  const auto sensor =
      layout_depth_error(room.depth, room.layouts, room.K, &room.depth);
  // a slightly-off layout prediction
  auto pred = room.layouts;
  for (auto& p : pred)
    if (p.category == LayoutCategory::FrontWall && p.offset == room.spec.wall_z) p.offset += 0.02;
  const auto model = layout_depth_error(pred, room.layouts, room.K, &room.depth);

  REQUIRE(sensor.get("layout_depth_error_occluded") > 1.0);
  REQUIRE(model.get("layout_depth_error_occluded") <
          0.25 * sensor.get("layout_depth_error_occluded"));
}

TEST_CASE("coverage metrics on exact and degraded predictions") {
  InstanceMap gt(20, 20), pred(20, 20);
  gt.classes = {3, 7, 7};
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) gt.ids(x, y) = 0;
  for (int y = 10; y < 16; ++y)
    for (int x = 2; x < 9; ++x) gt.ids(x, y) = 1;
  for (int y = 12; y < 18; ++y)
    for (int x = 12; x < 19; ++x) gt.ids(x, y) = 2;

  pred = gt;
  auto r = coverage_metrics(pred, gt);
  REQUIRE(r.get("coverage_weighted") == 1.0);
  REQUIRE(r.get("coverage_unweighted") == 1.0);
  REQUIRE(r.get("semseg_avg_class") == 1.0);
  REQUIRE(r.get("semseg_avg_instance") == 1.0);
  REQUIRE(r.get("semseg_avg_pixel") == 1.0);

  // drop one instance entirely: unweighted mean falls by 1/3
  for (auto& v : pred.ids.data)
    if (v == 2) v = -1;
  r = coverage_metrics(pred, gt);
  REQUIRE(r.get("coverage_unweighted") == Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("coverage matches a per-pair IoU oracle on random partitions") {
  Rng rng(251);
  for (int t = 0; t < 20; ++t) {
    const int w = 16, h = 12;
    InstanceMap gt(w, h), pred(w, h);
    const int ng = rng.uniform_int(1, 4), np = rng.uniform_int(1, 4);
    for (int i = 0; i < ng; ++i) gt.classes.push_back(rng.uniform_int(0, 2));
    for (int i = 0; i < np; ++i) pred.classes.push_back(rng.uniform_int(0, 2));
    for (int i = 0; i < w * h; ++i) {
      gt.ids.data[i] = rng.uniform_int(-1, ng - 1);
      pred.ids.data[i] = rng.uniform_int(-1, np - 1);
    }

    // direct per-pair IoU
    double unweighted = 0, weighted = 0;
    long total_area = 0, instances = 0;
    for (int g = 0; g < ng; ++g) {
      long ga = 0;
      for (int i = 0; i < w * h; ++i) ga += gt.ids.data[i] == g;
      if (ga == 0) continue;
      ++instances;
      total_area += ga;
      double best = 0;
      for (int p = 0; p < np; ++p) {
        if (pred.classes[p] != gt.classes[g]) continue;
        long pa = 0, shared = 0;
        for (int i = 0; i < w * h; ++i) {
          pa += pred.ids.data[i] == p;
          shared += pred.ids.data[i] == p && gt.ids.data[i] == g;
        }
        if (pa + ga - shared > 0) best = std::max(best, double(shared) / double(pa + ga - shared));
      }
      unweighted += best;
      weighted += best * double(ga);
    }
    if (instances == 0) continue;
    const auto r = coverage_metrics(pred, gt);
    REQUIRE(r.get("coverage_unweighted") == Approx(unweighted / instances).margin(1e-12));
    REQUIRE(r.get("coverage_weighted") == Approx(weighted / total_area).margin(1e-12));
  }
}
