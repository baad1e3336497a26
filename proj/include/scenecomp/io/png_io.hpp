#pragma once

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenecomp/core/image.hpp"

namespace scenecomp {
namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void write_png_gray(const std::string& path, int width, int height, int bit_depth,
                           const std::vector<std::vector<png_byte>>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("png: cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: write failed for " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(rows[y].data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline std::vector<std::vector<png_byte>> read_png_gray(const std::string& path, int& width,
                                                        int& height, int expected_bit_depth) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("png: cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: failed to read " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != expected_bit_depth) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: " + path + " is not " + std::to_string(expected_bit_depth) +
                             "-bit grayscale");
  }
  std::vector<std::vector<png_byte>> rows(height);
  const size_t rowbytes = png_get_rowbytes(png, info);
  for (auto& r : rows) r.resize(rowbytes);
  for (int y = 0; y < height; ++y) png_read_row(png, rows[y].data(), nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return rows;
}

}  // namespace detail

// 16-bit grayscale, depth in millimeters, 0 = missing.
inline void save_depth_png16(const DepthImage& img, const std::string& path) {
  std::vector<std::vector<png_byte>> rows(img.height());
  for (int y = 0; y < img.height(); ++y) {
    rows[y].resize(size_t(img.width()) * 2);
    for (int x = 0; x < img.width(); ++x) {
      uint16_t mm = 0;
      const float d = img.at(x, y);
      if (DepthImage::is_valid(d)) {
        const long v = std::lround(double(d) * 1000.0);
        mm = static_cast<uint16_t>(std::min(65535L, std::max(1L, v)));
      }
      rows[y][size_t(x) * 2] = static_cast<png_byte>(mm >> 8);  // big-endian per PNG
      rows[y][size_t(x) * 2 + 1] = static_cast<png_byte>(mm & 0xff);
    }
  }
  detail::write_png_gray(path, img.width(), img.height(), 16, rows);
}

inline DepthImage load_depth_png16(const std::string& path) {
  int w = 0, h = 0;
  const auto rows = detail::read_png_gray(path, w, h, 16);
  DepthImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const uint16_t mm = (uint16_t(rows[y][size_t(x) * 2]) << 8) | rows[y][size_t(x) * 2 + 1];
      if (mm != 0) img.set(x, y, float(mm) / 1000.0f);
    }
  return img;
}

inline void save_mask_png(const PixelMask& mask, const std::string& path) {
  std::vector<std::vector<png_byte>> rows(mask.height);
  for (int y = 0; y < mask.height; ++y) {
    rows[y].resize(mask.width);
    for (int x = 0; x < mask.width; ++x) rows[y][x] = mask(x, y) ? 255 : 0;
  }
  detail::write_png_gray(path, mask.width, mask.height, 8, rows);
}

inline PixelMask load_mask_png(const std::string& path) {
  int w = 0, h = 0;
  const auto rows = detail::read_png_gray(path, w, h, 8);
  PixelMask mask(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) mask(x, y) = rows[y][x] ? 1 : 0;
  return mask;
}

}  // namespace scenecomp
