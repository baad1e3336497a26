#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "scenecomp/compose/candidate.hpp"
#include "scenecomp/compose/selection.hpp"
#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/mesh.hpp"
#include "scenecomp/core/pose.hpp"
#include "scenecomp/io/json_util.hpp"
#include "scenecomp/io/png_io.hpp"
#include "scenecomp/layout/plane.hpp"

namespace scenecomp {

struct SceneObject {
  int id = 0;
  std::string mesh_path;  // relative to the scene file
  TriangleMesh mesh;
  PoseTransform pose;
  int class_id = 0;
  std::string region_mask_path;
  PixelMask region;
  std::optional<double> support_height;
};

// On-disk scene: intrinsics, layout surfaces, posed objects. Meshes and
// region masks live in side files next to the scene json; depth_path
// optionally references the observation the scene explains.
struct SceneFile {
  int schema_version = 1;
  CameraIntrinsics camera;
  std::vector<LayoutPlane> layouts;
  std::vector<SceneObject> objects;
  std::string depth_path;
};

namespace detail {

inline Json pose_json(const PoseTransform& p) {
  return {{"yaw", p.yaw},
          {"scale", p.scale},
          {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}}};
}

inline PoseTransform pose_from_json(const Json& j) {
  PoseTransform p;
  p.yaw = j.at("yaw").get<double>();
  p.scale = j.at("scale").get<double>();
  const auto& t = j.at("translation");
  p.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
  return p;
}

inline Json layout_json(const LayoutPlane& p) {
  Json holes = Json::array();
  for (const auto& h : p.holes)
    holes.push_back({{"lo", {h.lo.x(), h.lo.y()}}, {"hi", {h.hi.x(), h.hi.y()}}});
  return {{"category", to_string(p.category)},
          {"offset", p.offset},
          {"extent_lo", {json_real(p.extent_lo.x()), json_real(p.extent_lo.y())}},
          {"extent_hi", {json_real(p.extent_hi.x()), json_real(p.extent_hi.y())}},
          {"holes", holes},
          {"score", p.score}};
}

inline LayoutPlane layout_from_json(const Json& j) {
  auto p = LayoutPlane::from_category(layout_category_from_string(j.at("category").get<std::string>()),
                                      j.at("offset").get<double>());
  if (j.contains("extent_lo")) {
    p.extent_lo = {real_from_json(j["extent_lo"].at(0)), real_from_json(j["extent_lo"].at(1))};
    p.extent_hi = {real_from_json(j["extent_hi"].at(0)), real_from_json(j["extent_hi"].at(1))};
  }
  for (const auto& h : j.value("holes", Json::array())) {
    HoleRect r;
    r.lo = {h.at("lo").at(0).get<double>(), h.at("lo").at(1).get<double>()};
    r.hi = {h.at("hi").at(0).get<double>(), h.at("hi").at(1).get<double>()};
    p.holes.push_back(r);
  }
  p.score = j.value("score", 0.0);
  return p;
}

inline Json camera_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
          {"width", k.width}, {"height", k.height}};
}

inline CameraIntrinsics camera_from_json(const Json& j) {
  CameraIntrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  k.validate();
  return k;
}

inline std::filesystem::path side_dir_for(const std::filesystem::path& file) {
  auto dir = file;
  dir.replace_extension();
  return dir.concat("_files");
}

}  // namespace detail

inline void save_scene(const SceneFile& scene, const std::string& path) {
  const std::filesystem::path file(path);
  const auto side_dir = detail::side_dir_for(file);
  const auto base_dir = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");

  Json j;
  j["schema_version"] = scene.schema_version;
  j["meta"] = {{"units", "meters"}, {"frame", "camera"}};
  j["camera"] = detail::camera_json(scene.camera);
  if (!scene.depth_path.empty()) j["depth"] = scene.depth_path;
  j["layouts"] = Json::array();
  for (const auto& l : scene.layouts) j["layouts"].push_back(detail::layout_json(l));
  j["objects"] = Json::array();
  for (const auto& obj : scene.objects) {
    Json jo;
    jo["id"] = obj.id;
    jo["class_id"] = obj.class_id;
    jo["pose"] = detail::pose_json(obj.pose);
    if (obj.support_height) jo["support_height"] = *obj.support_height;
    if (!obj.mesh.vertices.empty()) {
      std::string rel = obj.mesh_path;
      if (rel.empty())
        rel = (side_dir.filename() / ("mesh_" + std::to_string(obj.id) + ".obj")).string();
      std::filesystem::create_directories((base_dir / rel).parent_path());
      save_obj(obj.mesh, (base_dir / rel).string());
      jo["mesh"] = rel;
    }
    if (count_set(obj.region) > 0) {
      std::string rel = obj.region_mask_path;
      if (rel.empty())
        rel = (side_dir.filename() / ("region_" + std::to_string(obj.id) + ".png")).string();
      std::filesystem::create_directories((base_dir / rel).parent_path());
      save_mask_png(obj.region, (base_dir / rel).string());
      jo["region_mask"] = rel;
    }
    j["objects"].push_back(jo);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("scene: cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

inline SceneFile load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scene: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("scene: parse error in " + path + ": " + e.what());
  }
  const auto base_dir = std::filesystem::path(path).has_parent_path()
                            ? std::filesystem::path(path).parent_path()
                            : std::filesystem::path(".");
  SceneFile scene;
  try {
    scene.schema_version = j.at("schema_version").get<int>();
    scene.camera = detail::camera_from_json(j.at("camera"));
    scene.depth_path = j.value("depth", "");
    for (const auto& jl : j.at("layouts")) scene.layouts.push_back(detail::layout_from_json(jl));
    for (const auto& jo : j.at("objects")) {
      SceneObject obj;
      obj.id = jo.at("id").get<int>();
      obj.class_id = jo.at("class_id").get<int>();
      obj.pose = detail::pose_from_json(jo.at("pose"));
      obj.pose.validate();
      if (jo.contains("support_height")) obj.support_height = jo["support_height"].get<double>();
      if (jo.contains("mesh")) {
        obj.mesh_path = jo["mesh"].get<std::string>();
        obj.mesh = load_obj((base_dir / obj.mesh_path).string());
      }
      if (jo.contains("region_mask")) {
        obj.region_mask_path = jo["region_mask"].get<std::string>();
        obj.region = load_mask_png((base_dir / obj.region_mask_path).string());
      }
      scene.objects.push_back(std::move(obj));
    }
  } catch (const Json::exception& e) {
    throw std::runtime_error("scene: bad field in " + path + ": " + e.what());
  }
  return scene;
}

// Candidate pools share the side-file scheme. Renders are derived data and
// are rebuilt on load when intrinsics are supplied.
inline void save_pool(const std::vector<Candidate>& pool, const std::string& path) {
  const std::filesystem::path file(path);
  const auto side_dir = detail::side_dir_for(file);
  const auto base_dir = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");

  Json j;
  j["schema_version"] = 1;
  j["candidates"] = Json::array();
  for (const auto& c : pool) {
    Json jc;
    jc["id"] = c.id;
    jc["region_id"] = c.region_id;
    jc["class_id"] = c.class_id;
    jc["shape_rank"] = c.shape_rank;
    jc["pose"] = detail::pose_json(c.pose);
    jc["class_probs"] = c.class_probs;
    jc["non_object_prob"] = c.non_object_prob;
    jc["fitting_energy"] = c.fitting_energy;
    if (c.support_height) jc["support_height"] = *c.support_height;
    const std::string mesh_rel =
        (side_dir.filename() / ("cand_mesh_" + std::to_string(c.id) + ".obj")).string();
    std::filesystem::create_directories((base_dir / mesh_rel).parent_path());
    save_obj(c.mesh, (base_dir / mesh_rel).string());
    jc["mesh"] = mesh_rel;
    const std::string mask_rel =
        (side_dir.filename() / ("cand_region_" + std::to_string(c.id) + ".png")).string();
    save_mask_png(c.region, (base_dir / mask_rel).string());
    jc["region_mask"] = mask_rel;
    j["candidates"].push_back(jc);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("pool: cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

inline std::vector<Candidate> load_pool(const std::string& path,
                                        const CameraIntrinsics* K = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("pool: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("pool: parse error in " + path + ": " + e.what());
  }
  const auto base_dir = std::filesystem::path(path).has_parent_path()
                            ? std::filesystem::path(path).parent_path()
                            : std::filesystem::path(".");
  std::vector<Candidate> pool;
  try {
    for (const auto& jc : j.at("candidates")) {
      Candidate c;
      c.id = jc.at("id").get<int>();
      c.region_id = jc.at("region_id").get<int>();
      c.class_id = jc.at("class_id").get<int>();
      c.shape_rank = jc.at("shape_rank").get<int>();
      c.pose = detail::pose_from_json(jc.at("pose"));
      c.class_probs = jc.at("class_probs").get<std::vector<double>>();
      c.non_object_prob = jc.at("non_object_prob").get<double>();
      c.fitting_energy = jc.at("fitting_energy").get<double>();
      if (jc.contains("support_height")) c.support_height = jc["support_height"].get<double>();
      c.mesh = load_obj((base_dir / jc.at("mesh").get<std::string>()).string());
      c.region = load_mask_png((base_dir / jc.at("region_mask").get<std::string>()).string());
      c.validate();
      if (K) prepare_candidate(c, *K);
      pool.push_back(std::move(c));
    }
  } catch (const Json::exception& e) {
    throw std::runtime_error("pool: bad field in " + path + ": " + e.what());
  }
  return pool;
}

inline void save_hypothesis(const SceneHypothesis& hyp, const SelectionTerms& terms,
                            const std::string& path) {
  Json j;
  j["schema_version"] = 1;
  j["cost"] = hyp.cost;
  j["terms"] = {{"depth", terms.depth},
                {"pobject", terms.pobject},
                {"region_overlap", terms.region_overlap},
                {"overlap3d", terms.overlap3d}};
  j["selected_candidates"] = hyp.selected_candidates;
  j["selected_layouts"] = hyp.selected_layouts;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("hypothesis: cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace scenecomp
