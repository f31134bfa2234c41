// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gmfoo/problems.hpp"
#include "support/oracle.hpp"

namespace gmfoo {
namespace {

std::vector<Point2> line(Point2 a, Point2 b, std::size_t n) {
  std::vector<Point2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    pts[i] = {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  }
  return pts;
}

// Shoelace over the curve closed along the wall, written out separately.
double shoelace_objective(const std::vector<Point2>& curve, double w1, double w2) {
  std::vector<Point2> ring = curve;
  ring.push_back({0.0, curve.back()[1]});
  ring.push_back({0.0, curve.front()[1]});
  double a = 0, cx = 0, cy = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % ring.size()];
    const double c = p[0] * q[1] - q[0] * p[1];
    a += c;
    cx += (p[0] + q[0]) * c;
    cy += (p[1] + q[1]) * c;
  }
  cx /= 3 * a;
  cy /= 3 * a;
  return w1 * std::abs(a / 2) * cx + w2 * (cx * cx + cy * cy);
}

const CurveProfile rectangle(line({1.0, 0.0}, {1.0, 2.0}, kProfilePoints));

TEST(Corbel, RectangleClosedForm) {
  const auto r = corbel_region(rectangle);
  EXPECT_NEAR(r.area, 2.0, 1e-12);
  EXPECT_NEAR(r.cx, 0.5, 1e-12);
  EXPECT_NEAR(r.cy, 1.0, 1e-12);
  EXPECT_NEAR(corbel_objective(rectangle, CorbelConfig{}), 13.5, 1e-9);
}

TEST(Corbel, OrientationAndScaling) {
  auto pts = rectangle.points();
  std::reverse(pts.begin(), pts.end());
  EXPECT_NEAR(corbel_objective(CurveProfile(pts), CorbelConfig{}), 13.5, 1e-9);
  for (auto& p : pts) p = {2 * p[0], 2 * p[1]};
  const auto r = corbel_region(CurveProfile(pts));
  EXPECT_NEAR(r.area, 8.0, 1e-12);
  EXPECT_NEAR(r.cx, 1.0, 1e-12);
  EXPECT_NEAR(r.cy, 2.0, 1e-12);
  // 1 * 8 * 1 + 10 * (1 + 4)
  EXPECT_NEAR(corbel_objective(CurveProfile(pts), CorbelConfig{}), 58.0, 1e-9);
}

TEST(Corbel, ConfigTermsSeparate) {
  CorbelConfig c;
  c.w1 = 0.0;
  c.w2 = 1.0;
  c.target_centroid = {0.5, 1.0};
  EXPECT_NEAR(corbel_objective(rectangle, c), 0.0, 1e-12);
  c = CorbelConfig{};
  c.density = 3.0;
  c.gravity = 2.0;
  c.w2 = 0.0;
  EXPECT_NEAR(corbel_objective(rectangle, c), 3.0 * 2.0 * 2.0 * 0.5, 1e-12);
  c.w1 = 0.0;
  EXPECT_THROW(corbel_objective(rectangle, c), ArgumentError);
}

TEST(Corbel, ZeroWidthIsDegenerate) {
  EXPECT_THROW(corbel_objective(CurveProfile(line({0.0, 0.0}, {0.0, 2.0}, kProfilePoints)), CorbelConfig{}),
               GeometryError);
}

TEST(Corbel, SelfIntersectionRejected) {
  // The curve crosses the wall closure.
  auto pts = line({1.0, 0.0}, {1.0, 2.0}, kProfilePoints);
  pts[100] = {-1.0, 1.0};
  EXPECT_THROW(corbel_objective(CurveProfile(pts), CorbelConfig{}), GeometryError);
}

TEST(Corbel, TriangleMatchesRefinedOracle) {
  const CurveProfile tri(line({2.0, 0.0}, {0.0, 2.0}, kProfilePoints));
  const double refined = shoelace_objective(line({2.0, 0.0}, {0.0, 2.0}, 10 * kProfilePoints), 1.0, 10.0);
  EXPECT_NEAR(corbel_objective(tri, CorbelConfig{}), refined, 1e-6);
  EXPECT_NEAR(refined, 1.0 * 2.0 * (2.0 / 3.0) + 10.0 * (8.0 / 9.0), 1e-9);
}

TEST(Corbel, CurvedProfileMatchesRefinedOracle) {
  auto arc = [](std::size_t n) {
    std::vector<Point2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = M_PI * static_cast<double>(i) / static_cast<double>(n - 1);
      pts[i] = {0.2 + std::sin(t), 1.0 - std::cos(t)};
    }
    return pts;
  };
  EXPECT_NEAR(corbel_objective(CurveProfile(arc(kProfilePoints)), CorbelConfig{}),
              shoelace_objective(arc(10 * kProfilePoints), 1.0, 10.0), 5e-4);
}

TEST(CurveProfile, ShapeAndCsv) {
  EXPECT_THROW(CurveProfile(line({1, 0}, {1, 1}, 10)), ArgumentError);
  std::stringstream ss;
  rectangle.write_csv(ss);
  EXPECT_EQ(CurveProfile::read_csv(ss).points(), rectangle.points());
  Vector xy;
  for (const auto& p : rectangle.points()) {
    xy.push_back(p[0]);
    xy.push_back(p[1]);
  }
  EXPECT_EQ(CurveProfile::from_interleaved(xy).points(), rectangle.points());
  EXPECT_NEAR(make_corbel_problem(CorbelConfig{}).evaluate(xy), 13.5, 1e-9);
}

TEST(Area, Counts) {
  EXPECT_EQ(area_objective(Vector(kImagePixels, 1.0)), -784.0);
  EXPECT_EQ(area_objective(Vector(kImagePixels, 0.0)), 0.0);
  EXPECT_THROW(area_objective(Vector(783, 1.0)), ArgumentError);
  Rng rng(RngSeed{1});
  Vector img(kImagePixels);
  for (auto& v : img) v = rng.uniform();
  int count = 0;
  for (double v : img) count += v > 0.5 ? 1 : 0;
  EXPECT_EQ(area_objective(img), -static_cast<double>(count));
  // pixels sitting away from the threshold; nudging them does not change the count
  Vector nudged = img;
  for (auto& v : nudged)
    if (std::abs(v - 0.5) > 1e-3) v += 0.5e-3;
  EXPECT_EQ(area_objective(nudged), area_objective(img));
}

TEST(Area, ThresholdByActivation) {
  EXPECT_EQ(area_threshold_for(Activation::Sigmoid), 0.5);
  EXPECT_EQ(area_threshold_for(Activation::Tanh), 0.0);
  EXPECT_EQ(make_area_problem(0.0).evaluate(Vector(kImagePixels, -0.5)), 0.0);
}

TEST(Pgm, RoundTrip) {
  Vector img(12);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>(i) / 11.0;
  std::stringstream ss;
  write_pgm(ss, img, 4, 3);
  std::size_t w = 0, h = 0;
  const auto back = read_pgm(ss, w, h);
  EXPECT_EQ(w, 4u);
  EXPECT_EQ(h, 3u);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back[i], img[i], 1.0 / 255.0);
}

TEST(FourierPair, EncoderInvertsGeneratorOnSubspace) {
  const auto fp = fourier_pair(384, 16, 4);
  Rng rng(RngSeed{2});
  for (int t = 0; t < 50; ++t) {
    Vector c(4);
    for (auto& v : c) v = rng.uniform(-1, 1);
    Vector z(16, 0.0);
    std::copy(c.begin(), c.end(), z.begin());
    const auto back = forward(fp.pair.encoder(), fp.pair.generate(z));
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(back[k], c[k], 1e-10);
  }
}

TEST(FourierPair, GeneratorFormula) {
  const std::size_t D = 40;
  const auto fp = fourier_pair(D, 5, 2);
  Vector z{0.3, -0.8, 0.5, 0.1, -0.4};
  const auto y = fp.pair.generate(z);
  for (std::size_t j = 0; j < D; ++j) {
    double ref = 0.0;
    for (std::size_t k = 0; k < 5; ++k)
      ref += std::pow(2.0, -static_cast<double>(k)) * z[k] *
             std::sin(static_cast<double>(k + 1) * M_PI * static_cast<double>(j + 1) / static_cast<double>(D + 1));
    EXPECT_NEAR(y[j], ref, 1e-13);
  }
}

TEST(FourierPair, ObjectiveAtZeroIsZeroCurve) {
  for (auto kind : {FourierObjective::QuadraticTarget, FourierObjective::Subspace, FourierObjective::Corbel}) {
    const auto fp = fourier_pair(384, 16, 4, kind);
    EXPECT_EQ(fp.problem.evaluate(fp.pair.generate(Vector(16, 0.0))), fp.problem.evaluate(Vector(384, 0.0)));
  }
}

TEST(FourierPair, QuadraticMinimumMatchesLeastSquares) {
  const std::size_t D = 384, dh = 16, dl = 4;
  const auto fp = fourier_pair(D, dh, dl);
  // Normal equations over the first dl generator columns, built from the formula.
  oracle::Mat A(D, oracle::Vec(dl));
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < dl; ++k)
      A[j][k] = std::pow(2.0, -static_cast<double>(k)) *
                std::sin(static_cast<double>(k + 1) * M_PI * static_cast<double>(j + 1) / static_cast<double>(D + 1));
  oracle::Mat AtA(dl, oracle::Vec(dl, 0.0));
  oracle::Vec Atb(dl, 0.0);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t p = 0; p < dl; ++p) {
      Atb[p] += A[j][p] * fp.target[j];
      for (std::size_t q = 0; q < dl; ++q) AtA[p][q] += A[j][p] * A[j][q];
    }
  const oracle::Vec c = oracle::matvec(oracle::inverse(AtA), Atb);
  double ls_min = 0.0;
  for (std::size_t j = 0; j < D; ++j) {
    const double r = oracle::dot(A[j], c) - fp.target[j];
    ls_min += r * r;
  }
  ls_min /= static_cast<double>(D);
  const auto coeffs = fourier_target_coefficients(dh);
  for (std::size_t k = 0; k < dl; ++k) EXPECT_NEAR(c[k], coeffs[k], 1e-6);
  const auto objective_at = [&](const Vector& cc) { return fp.problem.evaluate(fp.pair.generate_low(cc)); };
  EXPECT_NEAR(objective_at(Vector(c.begin(), c.end())), ls_min, 1e-6);
  Rng rng(RngSeed{3});
  for (int t = 0; t < 100; ++t) {
    Vector cc = c;
    for (auto& v : cc) v += rng.uniform(-0.1, 0.1);
    EXPECT_GE(objective_at(cc), ls_min - 1e-12);
  }
}

TEST(FourierPair, DimensionChecks) {
  EXPECT_THROW(fourier_pair(384, 4, 4), ArgumentError);
  EXPECT_THROW(fourier_pair(20, 11, 4), ArgumentError);
  EXPECT_THROW(fourier_pair(100, 16, 4, FourierObjective::Corbel), ArgumentError);
  EXPECT_THROW(fourier_pair(384, 16, 0), ArgumentError);
}

TEST(Problem, EvaluateWrapsFailures) {
  const Problem bad{"bad", 2, [](std::span<const double>) -> double { throw std::runtime_error("boom"); }};
  EXPECT_THROW(bad.evaluate(Vector{0.0, 0.0}), EvaluationError);
  const Problem nan{"nan", 1, [](std::span<const double>) { return NAN; }};
  EXPECT_THROW(nan.evaluate(Vector{0.0}), EvaluationError);
  EXPECT_THROW(nan.evaluate(Vector{0.0, 1.0}), ArgumentError);
}

}  // namespace
}  // namespace gmfoo
