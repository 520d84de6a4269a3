#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>

#include "physdepth/errors.hpp"
#include "physdepth/raster.hpp"

namespace physdepth {

/// Scalar raster with holes to fill by fast marching.
struct InpaintProblem {
  Raster<double> values;       ///< defined wherever `known` is set
  Raster<std::uint8_t> known;  ///< non-zero marks a known pixel
  int radius = 5;              ///< neighborhood radius for the fill average
};

/// Optional instrumentation of the march.
struct InpaintTrace {
  Raster<double> arrival;             ///< fast-marching distance at acceptance
  Raster<double> max_source_arrival;  ///< largest arrival among value contributors
};

namespace detail {

constexpr double kFarDistance = std::numeric_limits<double>::max();

enum : std::uint8_t { kAccepted = 0, kBand = 1, kFar = 2 };

// First-order upwind solution of |grad T| = 1 from accepted neighbors.
inline double eikonal_solve(const Raster<double>& dist, const Raster<std::uint8_t>& state,
                            int x, int y) {
  const auto accepted_at = [&](int px, int py) -> double {
    if (!dist.in_bounds(px, py) || state.at(px, py) != kAccepted) return kFarDistance;
    return dist.at(px, py);
  };
  const double left = accepted_at(x - 1, y);
  const double right = accepted_at(x + 1, y);
  const double up = accepted_at(x, y - 1);
  const double down = accepted_at(x, y + 1);

  double best = kFarDistance;
  for (double th : {left, right}) {
    for (double tv : {up, down}) {
      double cand;
      if (th < kFarDistance && tv < kFarDistance) {
        const double diff = th - tv;
        if (std::abs(diff) < 1.0)
          cand = 0.5 * (th + tv + std::sqrt(2.0 - diff * diff));
        else
          cand = std::min(th, tv) + 1.0;
      } else if (th < kFarDistance) {
        cand = th + 1.0;
      } else if (tv < kFarDistance) {
        cand = tv + 1.0;
      } else {
        continue;
      }
      best = std::min(best, cand);
    }
  }
  return best;
}

// Finite difference over accepted pixels only; zero when no neighbor is usable.
inline double upwind_gradient(const Raster<double>& field, const Raster<std::uint8_t>& state,
                              int x, int y, int dx, int dy, double center) {
  const int px = x + dx, py = y + dy;
  const int mx = x - dx, my = y - dy;
  const bool plus = field.in_bounds(px, py) && state.at(px, py) == kAccepted;
  const bool minus = field.in_bounds(mx, my) && state.at(mx, my) == kAccepted;
  if (plus && minus) return 0.5 * (field.at(px, py) - field.at(mx, my));
  if (plus) return field.at(px, py) - center;
  if (minus) return center - field.at(mx, my);
  return 0.0;
}

}  // namespace detail

/// Fill unknown pixels by fast marching from the known boundary. Pixels are
/// filled in order of increasing boundary distance; each value is a weighted
/// average of first-order estimates from already-accepted pixels within
/// `radius`, with direction, distance, and level-set weight factors. Results
/// are clamped to the known value range, so filled values never escape
/// [min, max] of the input. Queue ties break on row-major index, which makes
/// the march fully deterministic.
inline Raster<double> telea(const InpaintProblem& problem, InpaintTrace* trace = nullptr) {
  using detail::kAccepted;
  using detail::kBand;
  using detail::kFar;
  using detail::kFarDistance;

  if (problem.radius < 1) throw InvalidInput("telea: radius must be >= 1");
  if (problem.values.empty() || !problem.values.same_size(problem.known))
    throw InvalidInput("telea: value and mask rasters must match");

  const int w = problem.values.width();
  const int h = problem.values.height();

  Raster<double> out = problem.values;
  Raster<double> dist(w, h, kFarDistance);
  Raster<std::uint8_t> state(w, h, kFar);

  double known_min = kFarDistance;
  double known_max = -kFarDistance;
  std::size_t n_known = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (problem.known.at(x, y)) {
        state.at(x, y) = kAccepted;
        dist.at(x, y) = 0.0;
        known_min = std::min(known_min, out.at(x, y));
        known_max = std::max(known_max, out.at(x, y));
        ++n_known;
      }
  if (n_known == 0) throw EmptyPrior("telea: no known pixels to march from");

  if (trace) {
    trace->arrival = dist;
    trace->max_source_arrival = Raster<double>(w, h, 0.0);
  }
  if (n_known == problem.values.size()) return out;

  // Band entries keyed by (distance, row-major index).
  std::set<std::pair<double, std::size_t>> band;
  constexpr int kNeighbors[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (state.at(x, y) != kFar) continue;
      bool touches_known = false;
      for (const auto& n : kNeighbors) {
        const int nx = x + n[0], ny = y + n[1];
        if (dist.in_bounds(nx, ny) && state.at(nx, ny) == kAccepted) touches_known = true;
      }
      if (!touches_known) continue;
      dist.at(x, y) = detail::eikonal_solve(dist, state, x, y);
      state.at(x, y) = kBand;
      band.emplace(dist.at(x, y), dist.index(x, y));
    }

  const int radius = problem.radius;
  const double r2_limit = static_cast<double>(radius) * radius;

  while (!band.empty()) {
    const auto [t_here, idx] = *band.begin();
    band.erase(band.begin());
    const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
    const int y = static_cast<int>(idx / static_cast<std::size_t>(w));

    // March normal, used by the directional weight.
    double ntx = detail::upwind_gradient(dist, state, x, y, 1, 0, t_here);
    double nty = detail::upwind_gradient(dist, state, x, y, 0, 1, t_here);
    const double nlen = std::hypot(ntx, nty);
    if (nlen > 0.0) {
      ntx /= nlen;
      nty /= nlen;
    }

    double weight_sum = 0.0;
    double value_sum = 0.0;
    double max_source = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
      const int qy = y + dy;
      if (qy < 0 || qy >= h) continue;
      for (int dx = -radius; dx <= radius; ++dx) {
        const int qx = x + dx;
        if (qx < 0 || qx >= w) continue;
        if (dx == 0 && dy == 0) continue;
        const double r2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
        if (r2 > r2_limit) continue;
        if (state.at(qx, qy) != kAccepted) continue;

        const double rlen = std::sqrt(r2);
        double dir = std::abs((-dx) * ntx + (-dy) * nty) / rlen;
        if (dir < 1e-6) dir = 1e-6;
        const double dst = 1.0 / r2;
        const double lev = 1.0 / (1.0 + std::abs(t_here - dist.at(qx, qy)));
        const double wgt = dir * dst * lev;

        const double gx = detail::upwind_gradient(out, state, qx, qy, 1, 0, out.at(qx, qy));
        const double gy = detail::upwind_gradient(out, state, qx, qy, 0, 1, out.at(qx, qy));
        const double estimate = out.at(qx, qy) + gx * (-dx) + gy * (-dy);

        value_sum += wgt * estimate;
        weight_sum += wgt;
        max_source = std::max(max_source, dist.at(qx, qy));
      }
    }
    // Every popped pixel entered the band next to an accepted pixel, so the
    // neighborhood is never empty. The pixel is accepted only after its value
    // is written; gradient estimates never see an unfilled neighbor.
    out.at(x, y) = std::clamp(value_sum / weight_sum, known_min, known_max);
    state.at(x, y) = kAccepted;
    if (trace) {
      trace->arrival.at(x, y) = t_here;
      trace->max_source_arrival.at(x, y) = max_source;
    }

    for (const auto& n : kNeighbors) {
      const int nx = x + n[0], ny = y + n[1];
      if (!dist.in_bounds(nx, ny) || state.at(nx, ny) == kAccepted) continue;
      const double t_new = detail::eikonal_solve(dist, state, nx, ny);
      if (state.at(nx, ny) == kFar) {
        state.at(nx, ny) = kBand;
        dist.at(nx, ny) = t_new;
        band.emplace(t_new, dist.index(nx, ny));
      } else if (t_new < dist.at(nx, ny)) {
        band.erase({dist.at(nx, ny), dist.index(nx, ny)});
        dist.at(nx, ny) = t_new;
        band.emplace(t_new, dist.index(nx, ny));
      }
    }
  }

  return out;
}

}  // namespace physdepth
