#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "physdepth/errors.hpp"

namespace physdepth {

/// Pinhole intrinsics. All quantities in pixels.
struct Intrinsics {
  double fx = 0.0;  ///< focal length, x
  double fy = 0.0;  ///< focal length, y
  double ox = 0.0;  ///< principal point, x
  double oy = 0.0;  ///< principal point, y
  int width = 0;
  int height = 0;

  void validate() const {
    if (!(std::isfinite(fx) && std::isfinite(fy) && std::isfinite(ox) && std::isfinite(oy)))
      throw InvalidInput("intrinsics: non-finite parameter");
    if (fx <= 0.0 || fy <= 0.0) throw InvalidInput("intrinsics: focal lengths must be positive");
    if (width < 1 || height < 1) throw InvalidInput("intrinsics: image dimensions must be >= 1");
    if (ox < 0.0 || ox >= width || oy < 0.0 || oy >= height)
      throw InvalidInput("intrinsics: principal point outside the image");
  }

  double mean_focal() const { return 0.5 * (fx + fy); }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k;
    k << fx, 0.0, ox, 0.0, fy, oy, 0.0, 0.0, 1.0;
    return k;
  }
};

/// Camera pose relative to the ground plane. Height in meters, angles in
/// radians; the camera frame is x-right, y-down, z-forward.
struct Extrinsics {
  double camera_height = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  void validate() const {
    if (!(std::isfinite(camera_height) && camera_height > 0.0))
      throw InvalidInput("extrinsics: camera height must be positive");
    if (!(std::isfinite(roll) && std::isfinite(pitch) && std::isfinite(yaw)))
      throw InvalidInput("extrinsics: non-finite angle");
  }
};

struct CameraModel {
  Intrinsics intrinsics;
  Extrinsics extrinsics;

  void validate() const {
    intrinsics.validate();
    extrinsics.validate();
  }
};

/// Unit direction of a camera ray.
struct Ray {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 1.0;

  Eigen::Vector3d vec() const { return {dx, dy, dz}; }

  static Ray from_direction(const Eigen::Vector3d& d) {
    const double n = d.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("ray: degenerate direction");
    return Ray{d.x() / n, d.y() / n, d.z() / n};
  }
};

enum class RayNormalization {
  mean_focal,  ///< direction (u, v, (fx+fy)/2); both axes share one focal length
  per_axis,    ///< direction (u/fx, v/fy, 1); exact pinhole inverse for fx != fy
};

/// Unit ray through a continuous image coordinate. Coordinates are centered
/// on the principal point before normalization.
inline Ray pixel_ray(const Intrinsics& intr, double u_img, double v_img,
                     RayNormalization normalization = RayNormalization::mean_focal) {
  if (!std::isfinite(u_img) || !std::isfinite(v_img))
    throw InvalidInput("pixel_ray: non-finite pixel coordinates");
  const double u = u_img - intr.ox;
  const double v = v_img - intr.oy;
  const Eigen::Vector3d dir = normalization == RayNormalization::mean_focal
                                  ? Eigen::Vector3d(u, v, intr.mean_focal())
                                  : Eigen::Vector3d(u / intr.fx, v / intr.fy, 1.0);
  return Ray::from_direction(dir);
}

/// Intrinsics for the same camera at a new raster resolution.
inline Intrinsics rescale_intrinsics(const Intrinsics& intr, int new_width, int new_height) {
  if (intr.width < 1 || intr.height < 1)
    throw InvalidInput("rescale_intrinsics: original dimensions must be >= 1");
  if (new_width < 1 || new_height < 1)
    throw InvalidInput("rescale_intrinsics: target dimensions must be >= 1");
  const double sw = static_cast<double>(new_width) / static_cast<double>(intr.width);
  const double sh = static_cast<double>(new_height) / static_cast<double>(intr.height);
  return Intrinsics{intr.fx * sw, intr.fy * sh, intr.ox * sw, intr.oy * sh, new_width, new_height};
}

/// Camera-to-ground rotation composed as yaw * pitch * roll.
inline Eigen::Matrix3d rotation_from_euler(const Extrinsics& ext) {
  const double cr = std::cos(ext.roll), sr = std::sin(ext.roll);
  const double cp = std::cos(ext.pitch), sp = std::sin(ext.pitch);
  const double cy = std::cos(ext.yaw), sy = std::sin(ext.yaw);
  Eigen::Matrix3d r_roll, r_pitch, r_yaw;
  r_roll << 1.0, 0.0, 0.0,
            0.0, cr, sr,
            0.0, -sr, cr;
  r_pitch << cp, 0.0, -sp,
             0.0, 1.0, 0.0,
             sp, 0.0, cp;
  r_yaw << cy, sy, 0.0,
           -sy, cy, 0.0,
           0.0, 0.0, 1.0;
  return r_yaw * r_pitch * r_roll;
}

inline Ray rotate_ray(const Eigen::Matrix3d& rotation, const Ray& ray) {
  const Eigen::Vector3d d = rotation * ray.vec();
  return Ray{d.x(), d.y(), d.z()};
}

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Perspective projection of a camera-frame point (meters) to continuous
/// image coordinates.
inline PixelCoord project(const Intrinsics& intr, const Eigen::Vector3d& point) {
  if (!(point.z() > 0.0)) throw BehindCamera("project: point has non-positive z");
  return {intr.fx * point.x() / point.z() + intr.ox,
          intr.fy * point.y() / point.z() + intr.oy};
}

/// Camera-frame point at the given depth along the pinhole back-projection of
/// an image coordinate.
inline Eigen::Vector3d unproject(const Intrinsics& intr, double u_img, double v_img,
                                 double depth) {
  if (!(depth > 0.0) || !std::isfinite(depth))
    throw InvalidDepth("unproject: depth must be positive and finite");
  return {depth * (u_img - intr.ox) / intr.fx, depth * (v_img - intr.oy) / intr.fy, depth};
}

}  // namespace physdepth
