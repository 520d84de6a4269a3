#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "physdepth/inpaint.hpp"

using namespace physdepth;

namespace {

InpaintProblem constant_with_hole(int size, double value, int hole_half) {
  InpaintProblem p{Raster<double>(size, size, value), Raster<std::uint8_t>(size, size, 1), 5};
  const int c = size / 2;
  for (int y = c - hole_half; y <= c + hole_half; ++y)
    for (int x = c - hole_half; x <= c + hole_half; ++x) {
      p.known.at(x, y) = 0;
      p.values.at(x, y) = 0.0;
    }
  return p;
}

}  // namespace

TEST(Telea, ConstantFieldStaysConstant) {
  const InpaintProblem p = constant_with_hole(21, 8.0, 2);
  const Raster<double> filled = telea(p);
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) EXPECT_NEAR(filled.at(x, y), 8.0, 1e-3);
}

TEST(Telea, LinearRampDiskHoleWithinTwoPercent) {
  const int size = 32;
  InpaintProblem p{Raster<double>(size, size, 0.0), Raster<std::uint8_t>(size, size, 1), 5};
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) p.values.at(x, y) = 10.0 + x;
  const double cx = 16.0, cy = 16.0, radius = 5.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius) {
        p.known.at(x, y) = 0;
        p.values.at(x, y) = 0.0;
      }
  const Raster<double> filled = telea(p);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      if (p.known.at(x, y)) continue;
      const double expected = 10.0 + x;
      EXPECT_LT(std::abs(filled.at(x, y) - expected) / expected, 0.02)
          << "at (" << x << ", " << y << "): " << filled.at(x, y) << " vs " << expected;
    }
}

TEST(Telea, SingleUnknownPixelIsConvexCombination) {
  InpaintProblem p{Raster<double>(5, 5, 0.0), Raster<std::uint8_t>(5, 5, 1), 5};
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> value(1.0, 9.0);
  double lo = 1e30, hi = -1e30;
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      p.values.at(x, y) = value(rng);
      lo = std::min(lo, p.values.at(x, y));
      hi = std::max(hi, p.values.at(x, y));
    }
  p.known.at(2, 2) = 0;
  lo = 1e30;
  hi = -1e30;
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      if (p.known.at(x, y)) {
        lo = std::min(lo, p.values.at(x, y));
        hi = std::max(hi, p.values.at(x, y));
      }
  const Raster<double> filled = telea(p);
  EXPECT_GE(filled.at(2, 2), lo);
  EXPECT_LE(filled.at(2, 2), hi);
}

TEST(Telea, MaximumPrincipleOnRandomProblems) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> value(0.5, 50.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 8 + static_cast<int>(coin(rng) * 16);
    const int h = 8 + static_cast<int>(coin(rng) * 16);
    InpaintProblem p{Raster<double>(w, h, 0.0), Raster<std::uint8_t>(w, h, 0), 5};
    double lo = 1e30, hi = -1e30;
    bool any_known = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (coin(rng) < 0.6) {
          p.known.at(x, y) = 1;
          p.values.at(x, y) = value(rng);
          lo = std::min(lo, p.values.at(x, y));
          hi = std::max(hi, p.values.at(x, y));
          any_known = true;
        }
    if (!any_known) {
      p.known.at(0, 0) = 1;
      p.values.at(0, 0) = lo = hi = value(rng);
    }
    const Raster<double> filled = telea(p);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        EXPECT_GE(filled.at(x, y), lo - 1e-12);
        EXPECT_LE(filled.at(x, y), hi + 1e-12);
      }
  }
}

TEST(Telea, IdempotentOnCompleteRaster) {
  Raster<double> values(7, 7, 0.0);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> v(0.0, 10.0);
  for (auto& x : values) x = v(rng);
  const InpaintProblem p{values, Raster<std::uint8_t>(7, 7, 1), 5};
  EXPECT_EQ(telea(p), values);
}

TEST(Telea, FillOrderRespectsMarchDistance) {
  const InpaintProblem p = constant_with_hole(25, 4.0, 5);
  InpaintTrace trace;
  telea(p, &trace);
  for (int y = 0; y < 25; ++y)
    for (int x = 0; x < 25; ++x) {
      if (p.known.at(x, y)) continue;
      EXPECT_GE(trace.arrival.at(x, y), trace.max_source_arrival.at(x, y) - 1e-12);
    }
}

TEST(Telea, AllUnknownRejected) {
  const InpaintProblem p{Raster<double>(4, 4, 0.0), Raster<std::uint8_t>(4, 4, 0), 5};
  EXPECT_THROW(telea(p), EmptyPrior);
}

TEST(Telea, BadRadiusOrShapeRejected) {
  InpaintProblem p{Raster<double>(4, 4, 0.0), Raster<std::uint8_t>(4, 4, 1), 0};
  EXPECT_THROW(telea(p), InvalidInput);
  p.radius = 3;
  p.known = Raster<std::uint8_t>(5, 4, 1);
  EXPECT_THROW(telea(p), InvalidInput);
}

TEST(Telea, DeterministicAcrossRuns) {
  InpaintProblem p = constant_with_hole(19, 6.0, 4);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> v(1.0, 9.0);
  for (int y = 0; y < 19; ++y)
    for (int x = 0; x < 19; ++x)
      if (p.known.at(x, y)) p.values.at(x, y) = v(rng);
  EXPECT_EQ(telea(p), telea(p));
}
