#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "physdepth/camera.hpp"
#include "physdepth/errors.hpp"
#include "physdepth/inpaint.hpp"
#include "physdepth/raster.hpp"
#include "physdepth/scene.hpp"

namespace physdepth {

struct PhysicsDepthConfig {
  double horizon_epsilon = 1e-6;  ///< minimum downward ray component
  double max_depth = 120.0;       ///< meters; ground beyond this is dropped
  double sky_factor = 1.5;        ///< sky depth as a multiple of the deepest fill
  int inpaint_radius = 5;

  void validate() const {
    if (!(horizon_epsilon > 0.0) || !std::isfinite(horizon_epsilon))
      throw InvalidInput("physics depth config: horizon_epsilon must be positive");
    if (!(max_depth > 0.0) || !std::isfinite(max_depth))
      throw InvalidInput("physics depth config: max_depth must be positive");
    if (!(sky_factor > 1.0) || !std::isfinite(sky_factor))
      throw InvalidInput("physics depth config: sky_factor must exceed 1");
    if (inpaint_radius < 1) throw InvalidInput("physics depth config: inpaint_radius must be >= 1");
  }
};

enum class GroundSelect { road_only, all_flat };

/// The four stages of the prior: ground depth on road pixels, on every flat
/// pixel, after upward extension along vertical objects, and fully dense.
struct PhysicsDepthResult {
  DepthMap road;
  DepthMap flat;
  DepthMap edge_extended;
  DepthMap dense;
};

/// Camera-frame point where the pixel ray meets the ground plane, or nullopt
/// for rays at or above the horizon. The ray is rotated into the
/// ground-aligned frame, scaled by the slant range camera_height / r_down,
/// and the resulting ground point is rotated back into the camera frame, so
/// projecting the returned point lands on the originating pixel.
inline std::optional<Eigen::Vector3d> ground_intersection(const CameraModel& cam,
                                                          const Eigen::Matrix3d& cam_to_ground,
                                                          double u_img, double v_img,
                                                          double horizon_epsilon) {
  const Ray ray = pixel_ray(cam.intrinsics, u_img, v_img);
  const Ray ground_ray = rotate_ray(cam_to_ground, ray);
  if (!(ground_ray.dy > horizon_epsilon)) return std::nullopt;
  const double slant_range = cam.extrinsics.camera_height / ground_ray.dy;
  const Eigen::Vector3d ground_point = slant_range * ground_ray.vec();
  return cam_to_ground.transpose() * ground_point;
}

/// Closed-form depth for every pixel whose category is selected. Integer
/// pixel (x, y) is sampled at its center (x + 0.5, y + 0.5).
inline DepthMap ground_physics_depth(const CameraModel& cam, const Raster<Category>& categories,
                                     GroundSelect select, const PhysicsDepthConfig& cfg) {
  cam.validate();
  cfg.validate();
  if (categories.width() != cam.intrinsics.width || categories.height() != cam.intrinsics.height)
    throw InvalidInput("ground_physics_depth: category raster does not match camera dimensions");

  const Eigen::Matrix3d cam_to_ground = rotation_from_euler(cam.extrinsics);
  DepthMap out(categories.width(), categories.height());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const Category c = categories.at(x, y);
      const bool selected =
          c == Category::road || (select == GroundSelect::all_flat && c == Category::flat);
      if (!selected) continue;
      const auto point =
          ground_intersection(cam, cam_to_ground, x + 0.5, y + 0.5, cfg.horizon_epsilon);
      if (!point) continue;
      const double depth = point->z();
      if (!(depth > 0.0) || depth > cfg.max_depth) continue;
      out.set(x, y, depth, c == Category::road ? Provenance::road : Provenance::flat);
    }
  }
  return out;
}

/// Propagate ground depth up vertical objects. Each column is scanned bottom
/// to top; a maximal run of vertical-category pixels whose pixel immediately
/// below holds a valid ground depth takes that contact depth. Runs without a
/// contact stay invalid and are left to densify.
inline DepthMap edge_extend(const DepthMap& ground, const Raster<Category>& categories) {
  if (ground.width() != categories.width() || ground.height() != categories.height())
    throw InvalidInput("edge_extend: raster dimensions do not match");

  DepthMap out = ground;
  const int h = ground.height();
  for (int x = 0; x < ground.width(); ++x) {
    int y = h - 1;
    while (y >= 0) {
      if (categories.at(x, y) != Category::vertical) {
        --y;
        continue;
      }
      int top = y;
      while (top - 1 >= 0 && categories.at(x, top - 1) == Category::vertical) --top;
      if (y + 1 < h && ground.valid(x, y + 1)) {
        const float contact = ground.value(x, y + 1);
        for (int ry = top; ry <= y; ++ry)
          if (!out.valid(x, ry)) out.set(x, ry, contact, Provenance::edge_extended);
      }
      y = top - 1;
    }
  }
  return out;
}

/// Fill every remaining hole. Invalid pixels are inpainted by fast marching
/// from the valid set; sky-category pixels are then overwritten with
/// sky_factor times the deepest non-sky value. Already-valid pixels are never
/// touched, and the output has no invalid pixels.
inline DepthMap densify(const DepthMap& extended, const Raster<Category>& categories,
                        const PhysicsDepthConfig& cfg) {
  cfg.validate();
  if (extended.width() != categories.width() || extended.height() != categories.height())
    throw InvalidInput("densify: raster dimensions do not match");

  const int w = extended.width();
  const int h = extended.height();
  InpaintProblem problem{Raster<double>(w, h, 0.0), Raster<std::uint8_t>(w, h, std::uint8_t{0}),
                         cfg.inpaint_radius};
  std::size_t n_valid = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (extended.valid(x, y)) {
        problem.values.at(x, y) = extended.value(x, y);
        problem.known.at(x, y) = 1;
        ++n_valid;
      }
  if (n_valid == 0) throw EmptyPrior("densify: no valid pixels to densify from");

  const Raster<double> filled = telea(problem);

  DepthMap out = extended;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!out.valid(x, y) && categories.at(x, y) != Category::sky)
        out.set(x, y, filled.at(x, y), Provenance::inpainted);

  double max_non_sky = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (categories.at(x, y) != Category::sky)
        max_non_sky = std::max(max_non_sky, static_cast<double>(out.value(x, y)));

  const double sky_depth = cfg.sky_factor * max_non_sky;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!out.valid(x, y)) out.set(x, y, sky_depth, Provenance::sky);
  return out;
}

/// Full prior pipeline: categorize, ground depth on road pixels, ground depth
/// on all flat pixels, upward extension, densification.
inline PhysicsDepthResult compute_pipeline(const CameraModel& cam, const LabelMap& mask,
                                           const LabelSchema& schema,
                                           const PhysicsDepthConfig& cfg) {
  const Raster<Category> categories = categorize(mask, schema);
  PhysicsDepthResult result;
  result.road = ground_physics_depth(cam, categories, GroundSelect::road_only, cfg);
  result.flat = ground_physics_depth(cam, categories, GroundSelect::all_flat, cfg);
  result.edge_extended = edge_extend(result.flat, categories);
  result.dense = densify(result.edge_extended, categories, cfg);
  return result;
}

}  // namespace physdepth
