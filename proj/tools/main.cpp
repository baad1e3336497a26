// Command-line surface for the indoor-scene composition pipeline:
// synth -> align -> layout -> compose -> eval.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "scenecomp/align/align.hpp"
#include "scenecomp/compose/selection.hpp"
#include "scenecomp/eval/metrics.hpp"
#include "scenecomp/eval/voxel.hpp"
#include "scenecomp/io/config.hpp"
#include "scenecomp/io/pfm.hpp"
#include "scenecomp/io/png_io.hpp"
#include "scenecomp/io/scene_file.hpp"
#include "scenecomp/layout/detect.hpp"
#include "scenecomp/layout/extent.hpp"
#include "scenecomp/synth/synth.hpp"

namespace {

using namespace scenecomp;
namespace fs = std::filesystem;

DepthImage load_depth_any(const std::string& path) {
  const auto ext = fs::path(path).extension().string();
  if (ext == ".pfm") return load_pfm(path);
  if (ext == ".png") return load_depth_png16(path);
  throw std::runtime_error("depth: unsupported extension '" + ext + "' (want .pfm or .png)");
}

DepthImage observed_for_scene(const SceneFile& scene, const std::string& scene_path,
                              const std::string& override_path) {
  std::string path = override_path;
  if (path.empty()) {
    if (scene.depth_path.empty())
      throw std::runtime_error("scene file carries no depth reference; pass --depth");
    path = (fs::path(scene_path).parent_path() / scene.depth_path).string();
  }
  return load_depth_any(path);
}

Grid<float> load_probability_map(const std::string& path) {
  const DepthImage img = load_pfm(path);
  Grid<float> out(img.width(), img.height(), 0.f);
  for (size_t i = 0; i < img.depth.size(); ++i) {
    const float v = img.depth.data[i];
    out.data[i] = std::isfinite(v) ? v : 0.f;
  }
  return out;
}

void save_probability_map(const Grid<float>& map, const std::string& path) {
  DepthImage img(map.width, map.height);
  img.depth.data = map.data;
  save_pfm(img, path);
}

PixelLabelProbs load_labels(const std::string& prefix) {
  const char* names[4] = {"floor", "wall", "ceiling", "object"};
  PixelLabelProbs labels;
  for (int l = 0; l < 4; ++l) {
    const auto img = load_pfm(prefix + "_" + names[l] + ".pfm");
    if (l == 0) labels = PixelLabelProbs(img.width(), img.height());
    if (!img.depth.same_size(labels.probs.width, labels.probs.height))
      throw std::runtime_error("labels: channel sizes differ");
    for (size_t i = 0; i < img.depth.size(); ++i) labels.probs.data[i][l] = img.depth.data[i];
  }
  labels.validate();
  return labels;
}

std::vector<Candidate> scene_objects_as_candidates(const SceneFile& scene) {
  std::vector<Candidate> out;
  for (const auto& obj : scene.objects) {
    Candidate c;
    c.id = obj.id;
    c.region_id = obj.id;
    c.mesh = obj.mesh;
    c.pose = obj.pose;
    c.class_id = obj.class_id;
    c.class_probs = std::vector<double>(kObjectClasses, 1.0 / kObjectClasses);
    c.region = PixelMask(scene.camera.width, scene.camera.height, 0);
    prepare_candidate(c, scene.camera);
    out.push_back(std::move(c));
  }
  return out;
}

DepthImage composite_scene_render(const SceneFile& scene) {
  DepthImage out(scene.camera.width, scene.camera.height);
  const auto fold = [&](const DepthImage& d) {
    for (size_t i = 0; i < out.depth.size(); ++i) {
      const float v = d.depth.data[i];
      if (!DepthImage::is_valid(v)) continue;
      if (!DepthImage::is_valid(out.depth.data[i]) || v < out.depth.data[i])
        out.depth.data[i] = v;
    }
  };
  for (const auto& obj : scene.objects) fold(render_depth(obj.mesh, obj.pose, scene.camera).depth);
  for (const auto& l : scene.layouts) fold(render_layout(l, scene.camera).near_depth);
  return out;
}

// 84-class instance map: objects keep their class, layout surfaces map to
// floor/ceiling/wall pseudo-classes.
InstanceMap scene_instance_map(const SceneFile& scene) {
  InstanceMap map(scene.camera.width, scene.camera.height);
  DepthImage zbuf(scene.camera.width, scene.camera.height);
  const auto fold = [&](const DepthImage& d, const PixelMask& mask, int instance) {
    for (size_t i = 0; i < zbuf.depth.size(); ++i) {
      if (!mask.data[i]) continue;
      const float v = d.depth.data[i];
      if (!DepthImage::is_valid(zbuf.depth.data[i]) || v < zbuf.depth.data[i]) {
        zbuf.depth.data[i] = v;
        map.ids.data[i] = instance;
      }
    }
  };
  for (const auto& obj : scene.objects) {
    map.classes.push_back(obj.class_id);
    const auto r = render_depth(obj.mesh, obj.pose, scene.camera);
    fold(r.depth, r.mask, int(map.classes.size()) - 1);
  }
  for (const auto& l : scene.layouts) {
    const int cls = l.category == LayoutCategory::Floor     ? kObjectClasses
                    : l.category == LayoutCategory::Ceiling ? kObjectClasses + 1
                                                            : kObjectClasses + 2;
    map.classes.push_back(cls);
    const auto r = render_layout(l, scene.camera);
    fold(r.near_depth, r.mask, int(map.classes.size()) - 1);
  }
  return map;
}

int run_synth(uint64_t seed, const std::string& out_dir, SynthParams params, const RunConfig& cfg) {
  params.seed = seed;
  fs::create_directories(out_dir);
  const auto scene = synth_scene(params, cfg.retrieval);

  auto gt = scene.gt;
  gt.depth_path = "depth.pfm";
  save_scene(gt, (fs::path(out_dir) / "scene_gt.json").string());
  save_pfm(scene.depth, (fs::path(out_dir) / "depth.pfm").string());
  save_depth_png16(scene.depth, (fs::path(out_dir) / "depth.png").string());
  save_probability_map(scene.p_object, (fs::path(out_dir) / "pobject.pfm").string());

  const char* names[4] = {"floor", "wall", "ceiling", "object"};
  for (int l = 0; l < 4; ++l) {
    Grid<float> channel(scene.labels.probs.width, scene.labels.probs.height, 0.f);
    for (size_t i = 0; i < channel.size(); ++i) channel.data[i] = scene.labels.probs.data[i][l];
    save_probability_map(channel,
                         (fs::path(out_dir) / ("labels_" + std::string(names[l]) + ".pfm")).string());
  }
  save_pool(scene.candidates, (fs::path(out_dir) / "pool.json").string());
  std::cout << "synth: wrote scene with " << scene.gt.objects.size() << " objects, "
            << scene.candidates.size() << " candidates to " << out_dir << "\n";
  return 0;
}

int run_align(const std::string& scene_path, const std::string& pool_path,
              const std::string& profile, const std::string& out_path,
              const std::string& depth_override, bool prune_top5, const RunConfig& cfg) {
  const auto scene = load_scene(scene_path);
  const auto observed = observed_for_scene(scene, scene_path, depth_override);
  const FitWeights w = cfg.fit_weights(profile);
  auto pool = load_pool(pool_path, &scene.camera);

  std::vector<Candidate> out;
  std::map<int, std::vector<int>> groups;
  for (size_t i = 0; i < pool.size(); ++i) groups[pool[i].region_id].push_back(int(i));
  for (const auto& [region_id, members] : groups) {
    std::vector<int> chosen = members;
    if (prune_top5 && members.size() > 5) {
      std::vector<std::pair<double, int>> ranked;
      for (int i : members)
        ranked.emplace_back(orientation_scan_cost(pool[i].mesh, pool[i].region, observed,
                                                  scene.camera, w, pool[i].pose, cfg.align),
                            i);
      std::stable_sort(ranked.begin(), ranked.end());
      chosen.clear();
      for (int k = 0; k < 5; ++k) chosen.push_back(ranked[k].second);
      std::sort(chosen.begin(), chosen.end());
    }
    for (int i : chosen) {
      auto& c = pool[i];
      const auto res = align_model(c.mesh, c.region, observed, scene.camera, w, c.pose, cfg.align);
      c.pose = res.pose;
      c.fitting_energy = res.cost;
      prepare_candidate(c, scene.camera);
      out.push_back(c);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  save_pool(out, out_path.empty() ? pool_path : out_path);
  std::cout << "align: " << out.size() << " candidates aligned with '" << profile << "' weights\n";
  return 0;
}

int run_layout(const std::string& depth_path, const std::string& labels_prefix,
               const std::string& scene_path, const std::string& out_path, const RunConfig& cfg) {
  const DepthImage depth = load_depth_any(depth_path);
  CameraIntrinsics K = cfg.camera;
  if (!scene_path.empty()) K = load_scene(scene_path).camera;
  if (K.width != depth.width() || K.height != depth.height())
    throw std::runtime_error("layout: camera does not match the depth image size");
  const auto labels = load_labels(labels_prefix);

  auto planes = detect_planes(depth, K, labels, cfg.layout);
  for (auto& p : planes) p = plane_extent(p, planes, depth, K, cfg.extent);

  SceneFile out;
  out.camera = K;
  out.layouts = planes;
  save_scene(out, out_path);
  std::cout << "layout: " << planes.size() << " surfaces detected\n";
  for (const auto& p : planes)
    std::cout << "  " << to_string(p.category) << " offset " << p.offset << " score " << p.score
              << " holes " << p.holes.size() << "\n";
  return 0;
}

int run_compose(const std::string& scene_path, const std::string& pool_path,
                const std::string& pobject_path, const std::string& out_path,
                const std::string& depth_override, bool prune, const RunConfig& cfg) {
  const auto scene = load_scene(scene_path);
  const auto observed = observed_for_scene(scene, scene_path, depth_override);
  const auto pobject = load_probability_map(pobject_path);
  auto pool = load_pool(pool_path, &scene.camera);
  if (prune) pool = prune_proposals(pool, cfg.selection, cfg.prune);
  for (auto& c : pool) prepare_candidate(c, scene.camera);

  SelectionContext ctx(pool, scene.layouts, observed, pobject, scene.camera, cfg.selection);
  ComposeTrace trace;
  const auto hyp = compose_scene_ctx(ctx, cfg.compose, &trace);

  std::vector<uint8_t> y(hyp.selected_candidates);
  y.insert(y.end(), hyp.selected_layouts.begin(), hyp.selected_layouts.end());
  const auto terms = ctx.eval_terms(y);

  save_hypothesis(hyp, terms, out_path);
  SceneFile pred;
  pred.camera = scene.camera;
  pred.depth_path = scene.depth_path;
  for (size_t i = 0; i < scene.layouts.size(); ++i)
    if (hyp.selected_layouts[i]) pred.layouts.push_back(scene.layouts[i]);
  for (size_t i = 0; i < pool.size(); ++i) {
    if (!hyp.selected_candidates[i]) continue;
    SceneObject obj;
    obj.id = pool[i].id;
    obj.mesh = pool[i].mesh;
    obj.pose = pool[i].pose;
    obj.class_id = pool[i].class_id;
    obj.support_height = pool[i].support_height;
    obj.region = pool[i].region;
    pred.objects.push_back(std::move(obj));
  }
  const auto parent = fs::path(out_path).parent_path();
  const auto pred_path = (parent / (fs::path(out_path).stem().string() + "_scene.json")).string();
  save_scene(pred, pred_path);

  std::cout << "compose: cost = " << hyp.cost << "\n"
            << "  term_depth          = " << terms.depth << "\n"
            << "  term_pobject        = " << terms.pobject << "\n"
            << "  term_region_overlap = " << terms.region_overlap << "\n"
            << "  term_overlap3d      = " << terms.overlap3d << "\n"
            << "  stage_costs         = " << trace.stage1_cost << " " << trace.stage2_cost << " "
            << trace.stage3_cost << "\n"
            << "  selected objects: ";
  for (size_t i = 0; i < pool.size(); ++i)
    if (hyp.selected_candidates[i]) std::cout << pool[i].id << " ";
  std::cout << "\n  scene written to " << pred_path << "\n";
  return 0;
}

int run_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& depth_path, double voxel_res, double tolerance,
             const std::string& out_path, const RunConfig& cfg) {
  const auto pred = load_scene(pred_path);
  const auto gt = load_scene(gt_path);
  if (!(pred.camera == gt.camera)) throw std::runtime_error("eval: scene cameras differ");
  const auto& K = gt.camera;

  DepthImage observed;
  bool have_observed = false;
  try {
    observed = observed_for_scene(gt, gt_path, depth_path);
    have_observed = true;
  } catch (const std::exception&) {
    if (!depth_path.empty()) throw;
  }

  MetricReport report;
  report.merge(layout_pixel_error(pred.layouts, gt.layouts, K, have_observed ? &observed : nullptr,
                                  cfg.occluded_frac));
  report.merge(layout_depth_error(pred.layouts, gt.layouts, K, have_observed ? &observed : nullptr,
                                  cfg.occluded_frac));
  if (have_observed)
    report.merge(layout_depth_error(observed, gt.layouts, K, &observed, cfg.occluded_frac),
                 "sensor_");

  const DepthImage pred_render = composite_scene_render(pred);
  const DepthImage gt_render = composite_scene_render(gt);
  report.set("rde_vs_gt_render", relative_depth_error(pred_render, gt_render));
  if (have_observed) report.set("rde_vs_observed", relative_depth_error(pred_render, observed));

  // voxel evaluation in the annotated-layout frame
  const Eigen::AlignedBox3d fallback(Eigen::Vector3d(-3, -3, 0), Eigen::Vector3d(3, 3, 8));
  const auto frame = make_voxel_grid(layout_bounds(gt.layouts, fallback), voxel_res, K);
  const auto pred_cands = scene_objects_as_candidates(pred);
  const auto gt_cands = scene_objects_as_candidates(gt);
  const auto pred_grid =
      voxelize_scene(pred_cands, std::vector<uint8_t>(pred_cands.size(), 1), pred.layouts,
                     std::vector<uint8_t>(pred.layouts.size(), 1), K, frame);
  const auto gt_grid = voxelize_scene(gt_cands, std::vector<uint8_t>(gt_cands.size(), 1), gt.layouts,
                                      std::vector<uint8_t>(gt.layouts.size(), 1), K, frame);
  report.merge(occupancy_metrics(pred_grid, gt_grid, tolerance));

  report.merge(coverage_metrics(scene_instance_map(pred), scene_instance_map(gt)));

  const auto text = report.to_text();
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("eval: cannot open " + out_path + " for writing");
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor-scene composition from depth: synthetic data, alignment, layout, "
               "selection, and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration overriding built-in defaults");

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene and candidate pool");
  uint64_t seed = 1;
  std::string out_dir = "scene";
  SynthParams sp;
  synth->add_option("--seed", seed, "random seed")->required();
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--width", sp.image_width, "image width");
  synth->add_option("--height", sp.image_height, "image height");
  synth->add_option("--focal", sp.focal, "focal length in pixels");
  synth->add_option("--objects-min", sp.object_count.x(), "minimum object count");
  synth->add_option("--objects-max", sp.object_count.y(), "maximum object count");
  synth->add_option("--distractors", sp.distractor_count, "distractor candidates");
  synth->add_option("--occluders", sp.occluder_count, "wall-occluding slabs");
  synth->add_option("--missing", sp.missing_fraction, "missing-depth fraction");
  synth->add_option("--yaw-perturb", sp.yaw_perturb_deg, "candidate yaw noise, degrees");
  synth->add_option("--translation-perturb", sp.translation_perturb,
                    "candidate translation noise, meters");
  synth->add_option("--scale-perturb-fraction", sp.scale_perturb_fraction,
                    "fraction of candidates mis-scaled by 1/0.9");

  auto* align = app.add_subcommand("align", "fit candidate poses to the observed depth");
  std::string a_scene, a_pool, a_weights = "retrieval", a_out, a_depth;
  bool a_prune = false;
  align->add_option("--scene", a_scene, "scene file providing camera and depth reference")
      ->required();
  align->add_option("--candidates", a_pool, "candidate pool file")->required();
  align->add_option("--weights", a_weights, "weight profile: annotation or retrieval")
      ->check(CLI::IsMember({"annotation", "retrieval"}));
  align->add_option("--out", a_out, "output pool (defaults to overwriting the input)");
  align->add_option("--depth", a_depth, "observed depth override");
  align->add_flag("--prune-top5", a_prune, "keep only the top five models per region before ICP");

  auto* layout = app.add_subcommand("layout", "detect layout surfaces from depth and labels");
  std::string l_depth, l_labels, l_scene, l_out = "layout_scene.json";
  layout->add_option("--depth", l_depth, "depth image (.pfm or .png)")->required();
  layout->add_option("--labels", l_labels, "label map prefix (expects <prefix>_floor.pfm etc.)")
      ->required();
  layout->add_option("--scene", l_scene, "scene file supplying camera intrinsics");
  layout->add_option("--out", l_out, "output scene file");

  auto* compose = app.add_subcommand("compose", "select the scene hypothesis");
  std::string c_scene, c_pool, c_pobject, c_out = "hypothesis.json", c_depth;
  bool c_no_prune = false;
  compose->add_option("--scene", c_scene, "scene file with camera, layouts, depth reference")
      ->required();
  compose->add_option("--pool", c_pool, "candidate pool file")->required();
  compose->add_option("--pobject", c_pobject, "object-probability map (.pfm)")->required();
  compose->add_option("--out", c_out, "hypothesis output file");
  compose->add_option("--depth", c_depth, "observed depth override");
  compose->add_flag("--no-prune", c_no_prune, "skip proposal pruning");

  auto* eval = app.add_subcommand("eval", "compare a predicted scene against the annotation");
  std::string e_pred, e_gt, e_depth, e_out;
  double e_voxel = -1, e_tol = -1;
  eval->add_option("--pred", e_pred, "predicted scene file")->required();
  eval->add_option("--gt", e_gt, "annotated scene file")->required();
  eval->add_option("--depth", e_depth, "observed depth for visible/occluded splits");
  eval->add_option("--voxel-res", e_voxel, "voxel resolution, meters");
  eval->add_option("--tolerance", e_tol, "depth-proportional occupancy tolerance");
  eval->add_option("--out", e_out, "also write the report to a file");

  try {
    app.parse(argc, argv);
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);

    if (*synth) return run_synth(seed, out_dir, sp, cfg);
    if (*align) return run_align(a_scene, a_pool, a_weights, a_out, a_depth, a_prune, cfg);
    if (*layout) return run_layout(l_depth, l_labels, l_scene, l_out, cfg);
    if (*compose) return run_compose(c_scene, c_pool, c_pobject, c_out, c_depth, !c_no_prune, cfg);
    if (*eval)
      return run_eval(e_pred, e_gt, e_depth, e_voxel > 0 ? e_voxel : cfg.voxel_resolution,
                      e_tol > 0 ? e_tol : cfg.tolerance_factor, e_out, cfg);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
