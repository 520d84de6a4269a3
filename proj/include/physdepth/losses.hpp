#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "physdepth/camera.hpp"
#include "physdepth/common.hpp"
#include "physdepth/errors.hpp"
#include "physdepth/physics_depth.hpp"
#include "physdepth/raster.hpp"
#include "physdepth/scene.hpp"

namespace physdepth {

/// SE(3) pose used to warp between frames.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  void validate() const {
    const Eigen::Matrix3d residual =
        rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (residual.cwiseAbs().maxCoeff() >= 1e-9)
      throw InvalidInput("rigid transform: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) >= 1e-9)
      throw InvalidInput("rigid transform: rotation determinant is not +1");
    if (!translation.allFinite()) throw InvalidInput("rigid transform: non-finite translation");
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
};

struct LossConfig {
  double alpha_ssim = 0.85;    ///< structural weight of the photometric error
  double smooth_lambda = 1e-3;
  double l2d_alpha = 1.0;      ///< positional term weight
  double l2d_beta = 1.0;       ///< directional term weight

  void validate() const {
    if (!(alpha_ssim >= 0.0 && alpha_ssim <= 1.0))
      throw InvalidInput("loss config: alpha_ssim must be in [0, 1]");
    if (!(smooth_lambda >= 0.0) || !(l2d_alpha >= 0.0) || !(l2d_beta >= 0.0))
      throw InvalidInput("loss config: weights must be non-negative");
  }
};

/// Scalar loss plus a flag marking that no pixel contributed.
struct ScalarLoss {
  double value = 0.0;
  bool empty = false;
};

/// Per-pixel scalar field with validity.
struct MaskedMap {
  Raster<double> values;
  Raster<std::uint8_t> valid;
};

namespace detail {

inline void require_same_size(int aw, int ah, int bw, int bh, const char* what) {
  if (aw != bw || ah != bh) throw InvalidInput(std::string(what) + ": dimensions do not match");
}

}  // namespace detail

/// Mean weighted squared error between a prediction and the physics prior,
/// over pixels valid in both maps. With `normalized` false the raw weighted
/// sum is returned instead, which grows with resolution.
inline ScalarLoss physics_supervision_loss(const DepthMap& pred, const DepthMap& phys,
                                           const ConfidenceMap& weights, bool normalized = true) {
  detail::require_same_size(pred.width(), pred.height(), phys.width(), phys.height(),
                            "physics_supervision_loss");
  detail::require_same_size(pred.width(), pred.height(), weights.width(), weights.height(),
                            "physics_supervision_loss");
  std::vector<double> terms;
  std::vector<double> weight_terms;
  terms.reserve(weights.size());
  weight_terms.reserve(weights.size());
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (!phys.valid(x, y) || !pred.valid(x, y)) continue;
      const double w = weights.at(x, y);
      if (!(w >= 0.0 && w <= 1.0))
        throw InvalidInput("physics_supervision_loss: weights must lie in [0, 1]");
      const double diff =
          static_cast<double>(phys.value(x, y)) - static_cast<double>(pred.value(x, y));
      terms.push_back(w * diff * diff);
      weight_terms.push_back(w);
    }
  if (terms.empty()) return {0.0, true};
  const double sum = pairwise_sum(terms);
  if (!normalized) return {sum, false};
  const double weight_sum = pairwise_sum(weight_terms);
  if (weight_sum <= 0.0) return {0.0, true};
  return {sum / weight_sum, false};
}

/// Per-provenance confidence in the physics prior. Road geometry is trusted
/// most; inpainted and sky values carry little or no weight.
struct ConfidenceTable {
  double road = 1.0;
  double flat = 0.8;
  double edge_extended = 0.5;
  double inpainted = 0.2;
  double sky = 0.0;
  double external = 1.0;
  double none = 0.0;

  double weight(Provenance p) const {
    switch (p) {
      case Provenance::road: return road;
      case Provenance::flat: return flat;
      case Provenance::edge_extended: return edge_extended;
      case Provenance::inpainted: return inpainted;
      case Provenance::sky: return sky;
      case Provenance::external: return external;
      case Provenance::none: return none;
    }
    return none;
  }

  void validate() const {
    for (double w : {road, flat, edge_extended, inpainted, sky, external, none})
      if (!(w >= 0.0 && w <= 1.0))
        throw InvalidInput("confidence table: weights must lie in [0, 1]");
  }
};

inline ConfidenceMap confidence_map(const DepthMap& map, const ConfidenceTable& table = {}) {
  table.validate();
  ConfidenceMap out(map.width(), map.height(), 0.0f);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      out.at(x, y) = static_cast<float>(table.weight(map.provenance(x, y)));
  return out;
}

inline ConfidenceMap confidence_map(const PhysicsDepthResult& result,
                                    const ConfidenceTable& table = {}) {
  return confidence_map(result.dense, table);
}

/// Landing offsets for warping a source frame onto the target grid: each
/// valid target pixel is lifted to 3D with its depth, moved by the pose, and
/// reprojected. Pixels landing behind the camera are invalid.
inline FlowField warp_flow(const DepthMap& target_depth, const RigidTransform& pose,
                           const Intrinsics& intr) {
  intr.validate();
  pose.validate();
  detail::require_same_size(target_depth.width(), target_depth.height(), intr.width, intr.height,
                            "warp_flow");
  FlowField flow(target_depth.width(), target_depth.height());
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      if (!target_depth.valid(x, y)) continue;
      const double cu = x + 0.5, cv = y + 0.5;
      const Eigen::Vector3d p = unproject(intr, cu, cv, target_depth.value(x, y));
      const Eigen::Vector3d q = pose.apply(p);
      if (!(q.z() > 0.0)) continue;
      const PixelCoord landing = project(intr, q);
      flow.set(x, y, landing.u - cu, landing.v - cv);
    }
  return flow;
}

/// Bilinear sample at a continuous image coordinate (pixel centers at
/// x + 0.5). Corners with zero weight are not required to exist, so exact
/// pixel-center lookups succeed along the image border. Returns false when a
/// needed corner is outside the image.
inline bool bilinear_sample(const ImageBuffer& img, double u, double v, double* out_channels) {
  const double gx = u - 0.5;
  const double gy = v - 0.5;
  const double fx = std::floor(gx);
  const double fy = std::floor(gy);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double wx = gx - fx;
  const double wy = gy - fy;

  const double weights[4] = {(1.0 - wx) * (1.0 - wy), wx * (1.0 - wy), (1.0 - wx) * wy, wx * wy};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};

  for (int c = 0; c < img.channels(); ++c) out_channels[c] = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (weights[k] == 0.0) continue;
    if (xs[k] < 0 || xs[k] >= img.width() || ys[k] < 0 || ys[k] >= img.height()) return false;
    for (int c = 0; c < img.channels(); ++c)
      out_channels[c] += weights[k] * img.at(xs[k], ys[k], c);
  }
  return true;
}

struct WarpResult {
  ImageBuffer image;
  Raster<std::uint8_t> valid;
};

/// Reconstruct the target view by sampling the source frame at each pixel's
/// warped landing point.
inline WarpResult warp_image(const ImageBuffer& src, const DepthMap& target_depth,
                             const RigidTransform& pose, const Intrinsics& intr) {
  detail::require_same_size(src.width(), src.height(), target_depth.width(),
                            target_depth.height(), "warp_image");
  const FlowField flow = warp_flow(target_depth, pose, intr);
  WarpResult result{ImageBuffer(src.width(), src.height(), src.channels()),
                    Raster<std::uint8_t>(src.width(), src.height(), std::uint8_t{0})};
  double sample[3] = {0.0, 0.0, 0.0};
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      if (!flow.valid(x, y)) continue;
      const double u = x + 0.5 + flow.u(x, y);
      const double v = y + 0.5 + flow.v(x, y);
      if (!bilinear_sample(src, u, v, sample)) continue;
      for (int c = 0; c < src.channels(); ++c) result.image.set(x, y, c, sample[c]);
      result.valid.at(x, y) = 1;
    }
  return result;
}

/// Per-pixel structural similarity over a 3x3 box window (shrunk at the
/// borders), averaged across channels. Constants follow the usual
/// C1 = 0.01^2, C2 = 0.03^2 for intensities in [0, 1].
inline Raster<double> ssim(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) throw InvalidInput("ssim: image shapes differ");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  Raster<double> out(a.width(), a.height(), 0.0);
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const int x0 = std::max(0, x - 1), x1 = std::min(a.width() - 1, x + 1);
      const int y0 = std::max(0, y - 1), y1 = std::min(a.height() - 1, y + 1);
      const double n = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
      double acc = 0.0;
      for (int c = 0; c < a.channels(); ++c) {
        double mean_a = 0.0, mean_b = 0.0;
        for (int wy = y0; wy <= y1; ++wy)
          for (int wx = x0; wx <= x1; ++wx) {
            mean_a += a.at(wx, wy, c);
            mean_b += b.at(wx, wy, c);
          }
        mean_a /= n;
        mean_b /= n;
        double var_a = 0.0, var_b = 0.0, cov = 0.0;
        for (int wy = y0; wy <= y1; ++wy)
          for (int wx = x0; wx <= x1; ++wx) {
            const double da = a.at(wx, wy, c) - mean_a;
            const double db = b.at(wx, wy, c) - mean_b;
            var_a += da * da;
            var_b += db * db;
            cov += da * db;
          }
        var_a /= n;
        var_b /= n;
        cov /= n;
        acc += ((2.0 * mean_a * mean_b + c1) * (2.0 * cov + c2)) /
               ((mean_a * mean_a + mean_b * mean_b + c1) * (var_a + var_b + c2));
      }
      out.at(x, y) = acc / a.channels();
    }
  return out;
}

struct PhotometricLoss {
  MaskedMap per_pixel;
  double mean = 0.0;
  bool empty = false;
};

/// Photometric reconstruction error: alpha/2 * (1 - SSIM) + (1 - alpha) * L1
/// per pixel, with the scalar mean taken over the valid mask.
inline PhotometricLoss photometric_loss(const ImageBuffer& target, const ImageBuffer& recon,
                                        const Raster<std::uint8_t>& valid,
                                        const LossConfig& cfg) {
  if (!target.same_shape(recon)) throw InvalidInput("photometric_loss: image shapes differ");
  detail::require_same_size(target.width(), target.height(), valid.width(), valid.height(),
                            "photometric_loss");
  cfg.validate();

  const Raster<double> structural = ssim(target, recon);
  PhotometricLoss result;
  result.per_pixel.values = Raster<double>(target.width(), target.height(), 0.0);
  result.per_pixel.valid = valid;

  std::vector<double> terms;
  terms.reserve(valid.size());
  for (int y = 0; y < target.height(); ++y)
    for (int x = 0; x < target.width(); ++x) {
      double l1 = 0.0;
      for (int c = 0; c < target.channels(); ++c)
        l1 += std::abs(static_cast<double>(target.at(x, y, c)) - recon.at(x, y, c));
      l1 /= target.channels();
      const double value =
          cfg.alpha_ssim * 0.5 * (1.0 - structural.at(x, y)) + (1.0 - cfg.alpha_ssim) * l1;
      result.per_pixel.values.at(x, y) = value;
      if (valid.at(x, y)) terms.push_back(value);
    }
  if (terms.empty()) {
    result.empty = true;
    return result;
  }
  result.mean = pairwise_sum(terms) / static_cast<double>(terms.size());
  return result;
}

/// Pixel-wise minimum of two loss maps. A pixel valid in only one input takes
/// that input; a pixel valid in neither stays invalid.
inline MaskedMap min_reprojection(const MaskedMap& fwd, const MaskedMap& bwd) {
  detail::require_same_size(fwd.values.width(), fwd.values.height(), bwd.values.width(),
                            bwd.values.height(), "min_reprojection");
  MaskedMap out{Raster<double>(fwd.values.width(), fwd.values.height(), 0.0),
                Raster<std::uint8_t>(fwd.values.width(), fwd.values.height(), std::uint8_t{0})};
  for (int y = 0; y < out.values.height(); ++y)
    for (int x = 0; x < out.values.width(); ++x) {
      const bool fv = fwd.valid.at(x, y) != 0;
      const bool bv = bwd.valid.at(x, y) != 0;
      if (!fv && !bv) continue;
      double v;
      if (fv && bv)
        v = std::min(fwd.values.at(x, y), bwd.values.at(x, y));
      else
        v = fv ? fwd.values.at(x, y) : bwd.values.at(x, y);
      out.values.at(x, y) = v;
      out.valid.at(x, y) = 1;
    }
  return out;
}

/// Mean over valid pixels of a masked map.
inline ScalarLoss masked_mean(const MaskedMap& map) {
  std::vector<double> terms;
  terms.reserve(map.values.size());
  for (int y = 0; y < map.values.height(); ++y)
    for (int x = 0; x < map.values.width(); ++x)
      if (map.valid.at(x, y)) terms.push_back(map.values.at(x, y));
  if (terms.empty()) return {0.0, true};
  return {pairwise_sum(terms) / static_cast<double>(terms.size()), false};
}

/// Edge-aware smoothness of the mean-normalized inverse depth: gradients of
/// disparity are down-weighted where the image itself has edges. Gradient
/// sites need both stencil pixels valid; the result is the lambda-scaled mean
/// over all such sites.
inline ScalarLoss smoothness_loss(const DepthMap& depth, const ImageBuffer& image,
                                  double lambda) {
  detail::require_same_size(depth.width(), depth.height(), image.width(), image.height(),
                            "smoothness_loss");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidInput("smoothness_loss: lambda must be non-negative");

  std::vector<double> inverse_terms;
  inverse_terms.reserve(depth.values().size());
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      if (depth.valid(x, y)) inverse_terms.push_back(1.0 / depth.value(x, y));
  if (inverse_terms.empty()) return {0.0, true};
  const double mean_inverse =
      pairwise_sum(inverse_terms) / static_cast<double>(inverse_terms.size());

  const auto disparity = [&](int x, int y) {
    return (1.0 / depth.value(x, y)) / mean_inverse;
  };
  const auto image_gradient = [&](int x0, int y0, int x1, int y1) {
    double g = 0.0;
    for (int c = 0; c < image.channels(); ++c)
      g += std::abs(static_cast<double>(image.at(x1, y1, c)) - image.at(x0, y0, c));
    return g / image.channels();
  };

  std::vector<double> terms;
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x + 1 < depth.width(); ++x) {
      if (!depth.valid(x, y) || !depth.valid(x + 1, y)) continue;
      terms.push_back(std::abs(disparity(x + 1, y) - disparity(x, y)) *
                      std::exp(-image_gradient(x, y, x + 1, y)));
    }
  for (int y = 0; y + 1 < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y) || !depth.valid(x, y + 1)) continue;
      terms.push_back(std::abs(disparity(x, y + 1) - disparity(x, y)) *
                      std::exp(-image_gradient(x, y, x, y + 1)));
    }
  if (terms.empty()) return {0.0, true};
  return {lambda * pairwise_sum(terms) / static_cast<double>(terms.size()), false};
}

/// Motion of one matched point in two consecutive frame pairs.
struct FlowMatch {
  Eigen::Vector2d current;  ///< motion vector at frame t
  Eigen::Vector2d next;     ///< motion vector at frame t+1
};

/// Positional plus directional consistency over matched motion vectors:
/// alpha * |v_next - v_current|^2 + beta * (1 - cos(angle between them)).
/// Vectors shorter than 1e-9 contribute only the positional term.
inline double spatial_2d_loss(std::span<const FlowMatch> matches, const LossConfig& cfg) {
  cfg.validate();
  if (matches.empty()) throw InvalidInput("spatial_2d_loss: no matches");
  std::vector<double> terms;
  terms.reserve(matches.size());
  for (const FlowMatch& m : matches) {
    double term = cfg.l2d_alpha * (m.next - m.current).squaredNorm();
    const double n_current = m.current.norm();
    const double n_next = m.next.norm();
    if (n_current >= 1e-9 && n_next >= 1e-9) {
      const double cos_angle = m.current.dot(m.next) / (n_current * n_next);
      term += cfg.l2d_beta * (1.0 - cos_angle);
    }
    terms.push_back(term);
  }
  return pairwise_sum(terms);
}

/// Matches from two flow fields sampled on the same grid: pixels valid in both.
inline std::vector<FlowMatch> flow_matches(const FlowField& current, const FlowField& next) {
  detail::require_same_size(current.width(), current.height(), next.width(), next.height(),
                            "flow_matches");
  std::vector<FlowMatch> matches;
  for (int y = 0; y < current.height(); ++y)
    for (int x = 0; x < current.width(); ++x) {
      if (!current.valid(x, y) || !next.valid(x, y)) continue;
      matches.push_back({Eigen::Vector2d(current.u(x, y), current.v(x, y)),
                         Eigen::Vector2d(next.u(x, y), next.v(x, y))});
    }
  return matches;
}

/// Dense integer-displacement flow by exhaustive SSD block matching. Ties
/// break on the smaller displacement norm, then on (dv, du) scan order.
/// Border pixels whose patch does not fit stay invalid.
inline FlowField block_matching_flow(const ImageBuffer& a, const ImageBuffer& b, int patch,
                                     int search) {
  if (!a.same_shape(b)) throw InvalidInput("block_matching_flow: image shapes differ");
  if (patch < 1 || patch % 2 == 0) throw InvalidInput("block_matching_flow: patch must be odd");
  if (search < 1) throw InvalidInput("block_matching_flow: search must be >= 1");
  if (a.width() < patch || a.height() < patch)
    throw InvalidInput("block_matching_flow: image smaller than patch");

  const int half = patch / 2;
  FlowField flow(a.width(), a.height());
  for (int y = half; y < a.height() - half; ++y) {
    for (int x = half; x < a.width() - half; ++x) {
      double best_ssd = std::numeric_limits<double>::infinity();
      int best_norm2 = 0;
      int best_du = 0, best_dv = 0;
      bool found = false;
      for (int dv = -search; dv <= search; ++dv) {
        for (int du = -search; du <= search; ++du) {
          const int cx = x + du, cy = y + dv;
          if (cx - half < 0 || cx + half >= b.width() || cy - half < 0 || cy + half >= b.height())
            continue;
          double ssd = 0.0;
          for (int py = -half; py <= half; ++py)
            for (int px = -half; px <= half; ++px)
              for (int c = 0; c < a.channels(); ++c) {
                const double d = static_cast<double>(a.at(x + px, y + py, c)) -
                                 b.at(cx + px, cy + py, c);
                ssd += d * d;
              }
          const int norm2 = du * du + dv * dv;
          if (!found || ssd < best_ssd || (ssd == best_ssd && norm2 < best_norm2)) {
            found = true;
            best_ssd = ssd;
            best_norm2 = norm2;
            best_du = du;
            best_dv = dv;
          }
        }
      }
      if (found) flow.set(x, y, best_du, best_dv);
    }
  }
  return flow;
}

}  // namespace physdepth
