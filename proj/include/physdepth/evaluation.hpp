#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "physdepth/common.hpp"
#include "physdepth/errors.hpp"
#include "physdepth/scene.hpp"

namespace physdepth {

struct MetricsReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t n_pixels = 0;
  double scale_applied = 1.0;

  nlohmann::json to_json() const {
    return {{"abs_rel", abs_rel},   {"sq_rel", sq_rel},       {"rmse", rmse},
            {"rmse_log", rmse_log}, {"delta1", delta1},       {"delta2", delta2},
            {"delta3", delta3},     {"n_pixels", n_pixels},   {"scale_applied", scale_applied}};
  }

  static std::string csv_header() {
    return "abs_rel,sq_rel,rmse,rmse_log,delta1,delta2,delta3,n_pixels,scale_applied";
  }

  std::string csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << abs_rel << ',' << sq_rel << ',' << rmse << ',' << rmse_log << ',' << delta1 << ','
       << delta2 << ',' << delta3 << ',' << n_pixels << ',' << scale_applied;
    return os.str();
  }
};

struct PctErrorReport {
  double frac_within_5pct = 0.0;
  double frac_within_10pct = 0.0;
  std::size_t n_pixels = 0;

  nlohmann::json to_json() const {
    return {{"frac_within_5pct", frac_within_5pct},
            {"frac_within_10pct", frac_within_10pct},
            {"n_pixels", n_pixels}};
  }

  static std::string csv_header() { return "frac_within_5pct,frac_within_10pct,n_pixels"; }

  std::string csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << frac_within_5pct << ',' << frac_within_10pct << ',' << n_pixels;
    return os.str();
  }
};

struct DepthRange {
  double min_depth = 1e-3;
  double max_depth = 80.0;

  void validate() const {
    if (!(min_depth > 0.0) || !(max_depth > min_depth))
      throw InvalidInput("depth range: need 0 < min < max");
  }
};

/// Standard depth metrics over pixels valid in both maps with ground truth
/// inside the range.
inline MetricsReport depth_metrics(const DepthMap& pred, const DepthMap& gt,
                                   DepthRange range = {}) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw InvalidInput("depth_metrics: dimensions do not match");
  range.validate();

  std::size_t n = 0;
  double abs_rel = 0.0, sq_rel = 0.0, se = 0.0, sle = 0.0;
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred.valid(x, y) || !gt.valid(x, y)) continue;
      const double g = gt.value(x, y);
      if (g < range.min_depth || g > range.max_depth) continue;
      const double p = pred.value(x, y);
      const double diff = p - g;
      abs_rel += std::abs(diff) / g;
      sq_rel += diff * diff / g;
      se += diff * diff;
      const double lg = std::log(p) - std::log(g);
      sle += lg * lg;
      const double ratio = std::max(p / g, g / p);
      d1 += ratio < 1.25;
      d2 += ratio < 1.25 * 1.25;
      d3 += ratio < 1.25 * 1.25 * 1.25;
      ++n;
    }
  if (n == 0) throw EmptyOverlap("depth_metrics: no jointly valid pixels in range");

  const double dn = static_cast<double>(n);
  MetricsReport report;
  report.abs_rel = abs_rel / dn;
  report.sq_rel = sq_rel / dn;
  report.rmse = std::sqrt(se / dn);
  report.rmse_log = std::sqrt(sle / dn);
  report.delta1 = static_cast<double>(d1) / dn;
  report.delta2 = static_cast<double>(d2) / dn;
  report.delta3 = static_cast<double>(d3) / dn;
  report.n_pixels = n;
  return report;
}

/// Fraction of jointly valid pixels whose relative error is at most pct/100.
inline double within_pct(const DepthMap& pred, const DepthMap& gt, double pct) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw InvalidInput("within_pct: dimensions do not match");
  if (!(pct > 0.0)) throw InvalidInput("within_pct: pct must be positive");
  std::size_t n = 0, inside = 0;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred.valid(x, y) || !gt.valid(x, y)) continue;
      const double g = gt.value(x, y);
      const double p = pred.value(x, y);
      inside += std::abs(p - g) / g <= pct / 100.0;
      ++n;
    }
  if (n == 0) throw EmptyOverlap("within_pct: no jointly valid pixels");
  return static_cast<double>(inside) / static_cast<double>(n);
}

/// Median of reference/prediction ratios over jointly valid pixels. With an
/// even count the two middle ratios are averaged.
inline double median_scale(const DepthMap& pred, const DepthMap& ref) {
  if (pred.width() != ref.width() || pred.height() != ref.height())
    throw InvalidInput("median_scale: dimensions do not match");
  std::vector<double> ratios;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred.valid(x, y) || !ref.valid(x, y)) continue;
      ratios.push_back(static_cast<double>(ref.value(x, y)) / pred.value(x, y));
    }
  if (ratios.empty()) throw EmptyOverlap("median_scale: no jointly valid pixels");
  std::sort(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  if (n % 2 == 1) return ratios[n / 2];
  return 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
}

/// Multiply every valid value by a positive factor; provenance is preserved.
inline DepthMap apply_scale(const DepthMap& pred, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("apply_scale: scale must be positive");
  DepthMap out = pred;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (out.valid(x, y))
        out.set(x, y, static_cast<double>(out.value(x, y)) * s, out.provenance(x, y));
  return out;
}

/// Metrics for a prediction aligned once against LiDAR ground truth and once
/// against the physics prior; both alignments are evaluated against LiDAR.
struct ScaleComparison {
  MetricsReport with_lidar_scale;
  MetricsReport with_physics_scale;
};

inline ScaleComparison compare_scales(const DepthMap& pred, const DepthMap& lidar_gt,
                                      const DepthMap& phys, DepthRange range = {}) {
  const double lidar_scale = median_scale(pred, lidar_gt);
  const double physics_scale = median_scale(pred, phys);
  ScaleComparison cmp;
  cmp.with_lidar_scale = depth_metrics(apply_scale(pred, lidar_scale), lidar_gt, range);
  cmp.with_lidar_scale.scale_applied = lidar_scale;
  cmp.with_physics_scale = depth_metrics(apply_scale(pred, physics_scale), lidar_gt, range);
  cmp.with_physics_scale.scale_applied = physics_scale;
  return cmp;
}

}  // namespace physdepth
