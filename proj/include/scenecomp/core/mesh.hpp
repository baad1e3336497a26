#pragma once

#include <Eigen/Core>
#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scenecomp {

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }

  void validate() const {
    if (triangles.empty()) throw std::invalid_argument("mesh: no triangles");
    const int n = static_cast<int>(vertices.size());
    for (const auto& t : triangles)
      for (int i : t)
        if (i < 0 || i >= n) throw std::invalid_argument("mesh: triangle index out of range");
  }

  Eigen::Vector3d centroid() const {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& v : vertices) c += v;
    return vertices.empty() ? c : Eigen::Vector3d(c / double(vertices.size()));
  }
};

// OBJ subset: `v` and `f` records, triangulated faces. Face vertices may use
// the v/vt/vn syntax; only the position index is kept.
inline TriangleMesh load_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw std::runtime_error("obj: malformed vertex at line " + std::to_string(lineno));
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        if (!(ls >> tok))
          throw std::runtime_error("obj: face needs 3 vertices at line " + std::to_string(lineno));
        tri[k] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      std::string extra;
      if (ls >> extra)
        throw std::runtime_error("obj: non-triangular face at line " + std::to_string(lineno));
      mesh.triangles.push_back(tri);
    }
  }
  mesh.validate();
  return mesh;
}

inline TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("obj: cannot open " + path);
  return load_obj(in);
}

inline void save_obj(const TriangleMesh& mesh, std::ostream& out) {
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("obj: cannot open " + path + " for writing");
  save_obj(mesh, out);
}

}  // namespace scenecomp
