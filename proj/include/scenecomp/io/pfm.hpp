#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "scenecomp/core/image.hpp"

namespace scenecomp {

// Single-channel little-endian PFM, meters. Rows are stored bottom-up per
// the format convention. Floats round-trip bit-exactly (the missing-value
// NaN included).
inline void save_pfm(const DepthImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pfm: cannot open " + path + " for writing");
  out << "Pf\n" << img.width() << " " << img.height() << "\n-1.0\n";
  for (int y = img.height() - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(&img.depth.data[size_t(y) * img.width()]),
              sizeof(float) * img.width());
  if (!out) throw std::runtime_error("pfm: write failed for " + path);
}

inline DepthImage load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pfm: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "Pf") throw std::runtime_error("pfm: " + path + " is not single-channel PFM");
  int w = 0, h = 0;
  double scale = 0;
  in >> w >> h >> scale;
  if (!in || w <= 0 || h <= 0) throw std::runtime_error("pfm: bad header in " + path);
  if (scale >= 0) throw std::runtime_error("pfm: big-endian PFM not supported: " + path);
  in.get();  // single whitespace after scale
  DepthImage img(w, h);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(&img.depth.data[size_t(y) * w]), sizeof(float) * w);
    if (!in) throw std::runtime_error("pfm: truncated data in " + path);
  }
  return img;
}

}  // namespace scenecomp
