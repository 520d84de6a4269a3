#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <json.hpp>

#include "physdepth/camera.hpp"
#include "physdepth/common.hpp"
#include "physdepth/errors.hpp"
#include "physdepth/scene.hpp"

namespace physdepth {

/// Axis-aligned box resting on (or floating above) the ground plane,
/// described in the ground-aligned frame with the camera at the origin.
struct SynthBox {
  double center_x = 0.0;
  double center_z = 10.0;
  double size_x = 2.0;
  double size_y = 2.0;  ///< vertical extent
  double size_z = 2.0;
  double elevation = 0.0;  ///< gap between box bottom and the ground
  int label = 13;
};

struct SynthSceneSpec {
  int width = 640;
  int height = 192;
  double focal = 320.0;  ///< single focal length for both axes
  double principal_x = 320.0;
  double principal_y = 96.0;
  double camera_height = 1.6;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  double road_half_width = 4.0;  ///< ground with |x| beyond this is flat, not road
  int road_label = 0;
  int flat_label = 1;
  int sky_label = 10;
  double texture_amplitude = 0.12;
  std::vector<SynthBox> boxes;

  CameraModel camera() const {
    return {{focal, focal, principal_x, principal_y, width, height},
            {camera_height, roll, pitch, yaw}};
  }

  void validate() const {
    camera().validate();
    if (!(road_half_width > 0.0)) throw InvalidInput("synth scene: road_half_width must be positive");
    if (!(texture_amplitude >= 0.0 && texture_amplitude <= 0.5))
      throw InvalidInput("synth scene: texture_amplitude must be in [0, 0.5]");
    for (const SynthBox& box : boxes) {
      if (!(box.size_x > 0.0 && box.size_y > 0.0 && box.size_z > 0.0))
        throw InvalidInput("synth scene: box sizes must be positive");
      if (!(box.elevation >= 0.0)) throw InvalidInput("synth scene: box elevation must be >= 0");
      if (box.label < 0 || box.label > 255)
        throw InvalidInput("synth scene: box label must fit in a byte");
    }
  }
};

/// Rendered bundle: camera, labels, analytic depth, shaded image.
struct SynthScene {
  CameraModel camera;
  LabelMap labels;
  DepthMap depth;
  ImageBuffer image;
};

namespace detail {

struct SynthHit {
  double t = std::numeric_limits<double>::infinity();
  int target = -1;  // -1 miss, 0 ground, 1 + box index
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};

// Slab intersection with an axis-aligned box; entry distance and face normal.
inline bool ray_box(const Eigen::Vector3d& dir, const Eigen::Vector3d& lo,
                    const Eigen::Vector3d& hi, double* t_entry, Eigen::Vector3d* normal) {
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();
  int entry_axis = -1;
  double entry_sign = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double d = dir[axis];
    if (std::abs(d) < 1e-15) {
      if (0.0 < lo[axis] || 0.0 > hi[axis]) return false;  // ray origin outside slab
      continue;
    }
    double t0 = lo[axis] / d;
    double t1 = hi[axis] / d;
    double sign = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      sign = 1.0;
    }
    if (t0 > t_min) {
      t_min = t0;
      entry_axis = axis;
      entry_sign = sign;
    }
    t_max = std::min(t_max, t1);
    if (t_min > t_max) return false;
  }
  if (entry_axis < 0 || !(t_min > 1e-9)) return false;  // camera inside or behind
  *t_entry = t_min;
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n[entry_axis] = entry_sign;
  *normal = n;
  return true;
}

}  // namespace detail

/// Deterministic analytic render: per pixel, the ray from the camera is cast
/// against the ground plane and every box; the nearest hit supplies depth and
/// label, misses become sky. The image is Lambertian gray with a seeded
/// hash texture. Identical (spec, seed) pairs render bit-identically.
inline SynthScene synth_scene(const SynthSceneSpec& spec, std::uint64_t seed) {
  spec.validate();

  // Rotation into the ground-aligned frame, composed locally so the renderer
  // does not share code with the camera module it cross-checks.
  const double cr = std::cos(spec.roll), sr = std::sin(spec.roll);
  const double cp = std::cos(spec.pitch), sp = std::sin(spec.pitch);
  const double cy = std::cos(spec.yaw), sy = std::sin(spec.yaw);
  Eigen::Matrix3d r_roll, r_pitch, r_yaw;
  r_roll << 1, 0, 0, 0, cr, sr, 0, -sr, cr;
  r_pitch << cp, 0, -sp, 0, 1, 0, sp, 0, cp;
  r_yaw << cy, sy, 0, -sy, cy, 0, 0, 0, 1;
  const Eigen::Matrix3d cam_to_ground = r_yaw * r_pitch * r_roll;

  SynthScene scene;
  scene.camera = spec.camera();
  scene.labels = LabelMap(spec.width, spec.height, spec.sky_label);
  scene.depth = DepthMap(spec.width, spec.height);
  scene.image = ImageBuffer(spec.width, spec.height, 3);

  const double h = spec.camera_height;
  const Eigen::Vector3d light = Eigen::Vector3d(0.3, 0.8, 0.4).normalized();  // pointing down

  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double u = (x + 0.5) - spec.principal_x;
      const double v = (y + 0.5) - spec.principal_y;
      Eigen::Vector3d dir_cam(u, v, spec.focal);
      dir_cam.normalize();
      const Eigen::Vector3d dir_ground = cam_to_ground * dir_cam;

      detail::SynthHit hit;
      if (dir_ground.y() > 1e-12) {
        const double t = h / dir_ground.y();
        if (t < hit.t) hit = {t, 0, Eigen::Vector3d(0.0, -1.0, 0.0)};
      }
      for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
        const SynthBox& box = spec.boxes[b];
        const Eigen::Vector3d lo(box.center_x - 0.5 * box.size_x,
                                 h - box.elevation - box.size_y,
                                 box.center_z - 0.5 * box.size_z);
        const Eigen::Vector3d hi(box.center_x + 0.5 * box.size_x, h - box.elevation,
                                 box.center_z + 0.5 * box.size_z);
        double t = 0.0;
        Eigen::Vector3d normal;
        if (detail::ray_box(dir_ground, lo, hi, &t, &normal) && t < hit.t)
          hit = {t, static_cast<int>(b) + 1, normal};
      }

      double albedo = 0.85;  // sky
      if (hit.target >= 0) {
        const double depth = hit.t * dir_cam.z();
        if (depth > 0.0 && std::isfinite(depth)) {
          if (hit.target == 0) {
            const double ground_x = hit.t * dir_ground.x();
            const bool on_road = std::abs(ground_x) <= spec.road_half_width;
            scene.labels.at(x, y) = on_road ? spec.road_label : spec.flat_label;
            albedo = on_road ? 0.40 : 0.52;
          } else {
            scene.labels.at(x, y) = spec.boxes[static_cast<std::size_t>(hit.target - 1)].label;
            albedo = 0.65;
          }
          scene.depth.set(x, y, depth, Provenance::external);
        }
      }

      double shade = albedo;
      if (hit.target >= 0) shade = albedo * (0.35 + 0.65 * std::max(0.0, hit.normal.dot(-light)));
      for (int c = 0; c < 3; ++c) {
        const double noise =
            spec.texture_amplitude * (hash_unit(seed, static_cast<std::uint64_t>(x),
                                                static_cast<std::uint64_t>(y),
                                                static_cast<std::uint64_t>(c)) -
                                      0.5) * 2.0;
        scene.image.set(x, y, c, shade + noise);
      }
    }
  }
  return scene;
}

inline SynthSceneSpec synth_spec_from_json(const nlohmann::json& doc) {
  SynthSceneSpec spec;
  const auto get = [&doc](const char* key, auto fallback) {
    using T = decltype(fallback);
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number()) throw ParseError("synth spec: field '" + std::string(key) +
                                                "' must be a number");
    return doc[key].get<T>();
  };
  spec.width = get("width", spec.width);
  spec.height = get("height", spec.height);
  spec.focal = get("focal", spec.focal);
  spec.principal_x = get("principal_x", static_cast<double>(spec.width) / 2.0);
  spec.principal_y = get("principal_y", static_cast<double>(spec.height) / 2.0);
  spec.camera_height = get("camera_height", spec.camera_height);
  spec.roll = get("roll", spec.roll);
  spec.pitch = get("pitch", spec.pitch);
  spec.yaw = get("yaw", spec.yaw);
  spec.road_half_width = get("road_half_width", spec.road_half_width);
  spec.road_label = get("road_label", spec.road_label);
  spec.flat_label = get("flat_label", spec.flat_label);
  spec.sky_label = get("sky_label", spec.sky_label);
  spec.texture_amplitude = get("texture_amplitude", spec.texture_amplitude);
  if (doc.contains("boxes")) {
    if (!doc["boxes"].is_array()) throw ParseError("synth spec: field 'boxes' must be an array");
    for (const auto& bj : doc["boxes"]) {
      SynthBox box;
      const auto bget = [&bj](const char* key, auto fallback) {
        using T = decltype(fallback);
        if (!bj.contains(key)) return fallback;
        if (!bj[key].is_number()) throw ParseError("synth spec: box field '" + std::string(key) +
                                                   "' must be a number");
        return bj[key].get<T>();
      };
      box.center_x = bget("center_x", box.center_x);
      box.center_z = bget("center_z", box.center_z);
      box.size_x = bget("size_x", box.size_x);
      box.size_y = bget("size_y", box.size_y);
      box.size_z = bget("size_z", box.size_z);
      box.elevation = bget("elevation", box.elevation);
      box.label = bget("label", box.label);
      spec.boxes.push_back(box);
    }
  }
  return spec;
}

inline nlohmann::json synth_spec_to_json(const SynthSceneSpec& spec) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const SynthBox& box : spec.boxes)
    boxes.push_back({{"center_x", box.center_x},
                     {"center_z", box.center_z},
                     {"size_x", box.size_x},
                     {"size_y", box.size_y},
                     {"size_z", box.size_z},
                     {"elevation", box.elevation},
                     {"label", box.label}});
  return {{"width", spec.width},
          {"height", spec.height},
          {"focal", spec.focal},
          {"principal_x", spec.principal_x},
          {"principal_y", spec.principal_y},
          {"camera_height", spec.camera_height},
          {"roll", spec.roll},
          {"pitch", spec.pitch},
          {"yaw", spec.yaw},
          {"road_half_width", spec.road_half_width},
          {"road_label", spec.road_label},
          {"flat_label", spec.flat_label},
          {"sky_label", spec.sky_label},
          {"texture_amplitude", spec.texture_amplitude},
          {"boxes", boxes}};
}

}  // namespace physdepth
