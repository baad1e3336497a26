#pragma once

// Hand-assembled box-room fixtures for layout tests: camera at the origin
// inside the room, doorway in the front wall revealing a backing wall one
// corridor-depth behind it.

#include <vector>

#include "scenecomp/core/camera.hpp"
#include "scenecomp/core/image.hpp"
#include "scenecomp/core/render.hpp"
#include "scenecomp/layout/features.hpp"
#include "scenecomp/layout/plane.hpp"

namespace testroom {

using namespace scenecomp;

struct RoomSpec {
  double floor_y = 1.3;
  double ceil_y = -1.1;
  double left_x = -1.4;
  double right_x = 1.4;
  double wall_z = 3.2;
  double back_z = 4.2;
  // doorway in the front wall, plane coords (x, y)
  double door_x0 = -0.9, door_x1 = -0.1;
  double door_height = 1.9;
};

struct Room {
  CameraIntrinsics K;
  RoomSpec spec;
  std::vector<LayoutPlane> layouts;
  DepthImage depth;
  PixelLabelProbs labels;
  Grid<int> front_layout;  // index into layouts, -1 = none
};

inline std::vector<LayoutPlane> room_layouts(const RoomSpec& s) {
  std::vector<LayoutPlane> L;
  auto floor = LayoutPlane::from_category(LayoutCategory::Floor, s.floor_y);
  floor.extent_lo = {0.0, s.left_x};  // (z, x)
  floor.extent_hi = {s.back_z, s.right_x};
  L.push_back(floor);

  auto ceil = LayoutPlane::from_category(LayoutCategory::Ceiling, s.ceil_y);
  ceil.extent_lo = {0.0, s.left_x};
  ceil.extent_hi = {s.back_z, s.right_x};
  L.push_back(ceil);

  auto left = LayoutPlane::from_category(LayoutCategory::LeftWall, s.left_x);
  left.extent_lo = {s.ceil_y, 0.0};  // (y, z)
  left.extent_hi = {s.floor_y, s.back_z};
  L.push_back(left);

  auto right = LayoutPlane::from_category(LayoutCategory::RightWall, s.right_x);
  right.extent_lo = {s.ceil_y, 0.0};
  right.extent_hi = {s.floor_y, s.back_z};
  L.push_back(right);

  auto front = LayoutPlane::from_category(LayoutCategory::FrontWall, s.wall_z);
  front.extent_lo = {s.left_x, s.ceil_y};  // (x, y)
  front.extent_hi = {s.right_x, s.floor_y};
  front.holes.push_back(
      {{s.door_x0, s.floor_y - s.door_height}, {s.door_x1, s.floor_y}});
  L.push_back(front);

  auto back = LayoutPlane::from_category(LayoutCategory::FrontWall, s.back_z);
  back.extent_lo = {s.left_x, s.ceil_y};
  back.extent_hi = {s.right_x, s.floor_y};
  L.push_back(back);
  return L;
}

inline PixelLabel layout_label(LayoutCategory c) {
  switch (c) {
    case LayoutCategory::Floor: return PixelLabel::Floor;
    case LayoutCategory::Ceiling: return PixelLabel::Ceiling;
    default: return PixelLabel::Wall;
  }
}

inline Room make_room(const RoomSpec& spec = {}, int width = 64, int height = 48,
                      double focal = 28.0) {
  Room room;
  room.spec = spec;
  room.K.fx = room.K.fy = focal;
  room.K.cx = width / 2;
  room.K.cy = height / 2;
  room.K.width = width;
  room.K.height = height;
  room.layouts = room_layouts(spec);
  room.depth = DepthImage(width, height);
  room.labels = PixelLabelProbs(width, height);
  room.front_layout = Grid<int>(width, height, -1);

  for (size_t i = 0; i < room.layouts.size(); ++i) {
    const auto r = render_layout(room.layouts[i], room.K);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        if (!r.mask(x, y)) continue;
        const float d = r.near_depth.at(x, y);
        if (!room.depth.valid_at(x, y) || d < room.depth.at(x, y)) {
          room.depth.set(x, y, d);
          room.front_layout(x, y) = int(i);
        }
      }
  }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int li = room.front_layout(x, y);
      if (li < 0) continue;
      std::array<float, 4> p{0, 0, 0, 0};
      p[int(layout_label(room.layouts[li].category))] = 1.0f;
      room.labels.probs(x, y) = p;
    }
  return room;
}

// Overlays a fronto-parallel slab (cabinet-style occluder) onto a room's
// depth image, labeling its pixels as object.
inline void add_occluder_slab(Room& room, double x0, double x1, double y_top, double z) {
  for (int y = 0; y < room.K.height; ++y)
    for (int x = 0; x < room.K.width; ++x) {
      const Eigen::Vector3d dir = room.K.ray(x, y);
      const double t = z / dir.z();
      const Eigen::Vector3d p = dir * t;
      if (p.x() < x0 || p.x() > x1 || p.y() < y_top || p.y() > room.spec.floor_y) continue;
      if (!room.depth.valid_at(x, y) || t < room.depth.at(x, y)) {
        room.depth.set(x, y, float(t));
        room.labels.probs(x, y) = {0.02f, 0.05f, 0.03f, 0.9f};
        room.front_layout(x, y) = -1;
      }
    }
}

}  // namespace testroom
