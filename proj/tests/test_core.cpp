// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gmfoo/core.hpp"

namespace gmfoo {
namespace {

// Bin index of v in [lo, hi) split into n equal bins.
std::size_t bin_of(double v, double lo, double hi, std::size_t n) {
  return static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
}

TEST(Bounds, RejectsBadBoxes) {
  EXPECT_THROW(Bounds({}, {}), ArgumentError);
  EXPECT_THROW(Bounds({0.0}, {0.0, 1.0}), ArgumentError);
  EXPECT_THROW(Bounds({1.0}, {1.0}), ArgumentError);
  EXPECT_THROW(Bounds({0.0}, {NAN}), ArgumentError);
}

TEST(Bounds, ContainsAndClamp) {
  const Bounds b({-1.0, 0.0}, {1.0, 2.0});
  EXPECT_TRUE(b.contains(std::vector{1.0, 0.0}));
  EXPECT_FALSE(b.contains(std::vector{1.1, 0.0}));
  EXPECT_FALSE(b.contains(std::vector{0.0}));
  EXPECT_EQ(b.clamp(std::vector{-3.0, 5.0}), (Vector{-1.0, 2.0}));
  EXPECT_DOUBLE_EQ(b.width(1), 2.0);
}

TEST(Enums, StringRoundTrip) {
  for (auto f : {Fidelity::High, Fidelity::Low}) EXPECT_EQ(fidelity_from_string(to_string(f)), f);
  for (auto o : {Origin::DoE, Origin::EiQuery, Origin::NarrowedQuery, Origin::Exchanged})
    EXPECT_EQ(origin_from_string(to_string(o)), o);
  EXPECT_THROW(fidelity_from_string("medium"), ArgumentError);
  EXPECT_THROW(origin_from_string(""), ArgumentError);
}

TEST(Dataset, ValidatesSamples) {
  Dataset ds(Bounds::uniform(2));
  ds.add({{0.1, 0.2}, 1.0, Fidelity::High, Origin::DoE});
  EXPECT_THROW(ds.add({{0.1}, 1.0}), ArgumentError);
  EXPECT_THROW(ds.add({{0.3, 0.2}, NAN}), ArgumentError);
  EXPECT_THROW(ds.add({{2.0, 0.0}, 1.0}), ArgumentError);
  EXPECT_THROW(ds.add({{0.1, 0.2}, 5.0, Fidelity::High}), ArgumentError);
  // a low sample may share the location of a high one
  ds.add({{0.1, 0.2}, 5.0, Fidelity::Low, Origin::Exchanged});
  EXPECT_EQ(ds.count(Fidelity::High), 1u);
  EXPECT_EQ(ds.count(Fidelity::Low), 1u);
  EXPECT_TRUE(ds.contains(std::vector{0.1, 0.2}, Fidelity::Low));
  EXPECT_EQ(ds.filter(Fidelity::Low).size(), 1u);
}

TEST(Dataset, BestAndMin) {
  Dataset ds(Bounds::uniform(1));
  EXPECT_FALSE(ds.min_y().has_value());
  EXPECT_FALSE(ds.best(Fidelity::High).has_value());
  ds.add({{0.0}, 3.0, Fidelity::High});
  ds.add({{0.5}, -1.0, Fidelity::Low});
  ds.add({{0.7}, 2.0, Fidelity::High});
  EXPECT_DOUBLE_EQ(ds.best(Fidelity::High)->y, 2.0);
  EXPECT_DOUBLE_EQ(*ds.min_y(), -1.0);
}

TEST(Dataset, CsvRoundTrip) {
  Dataset ds(Bounds::uniform(2));
  ds.add({{0.1, -0.3333333333333333}, 1.0 / 3.0, Fidelity::High, Origin::DoE});
  ds.add({{0.9, 0.0}, -2.5e-7, Fidelity::Low, Origin::Exchanged});
  std::stringstream ss;
  ds.write_csv(ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "x0,x1,y,fidelity,origin");
  const Dataset back = Dataset::read_csv(ss, ds.bounds());
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.samples()[i].x, ds.samples()[i].x);
    EXPECT_EQ(back.samples()[i].y, ds.samples()[i].y);
    EXPECT_EQ(back.samples()[i].fidelity, ds.samples()[i].fidelity);
    EXPECT_EQ(back.samples()[i].origin, ds.samples()[i].origin);
  }
}

TEST(Dataset, CsvErrors) {
  std::stringstream bad_header("a,b,y,fidelity,origin\n");
  EXPECT_THROW(Dataset::read_csv(bad_header, Bounds::uniform(2)), LoadError);
  std::stringstream bad_number("x0,y,fidelity,origin\n0.1x,1,high,doe\n");
  EXPECT_THROW(Dataset::read_csv(bad_number, Bounds::uniform(1)), LoadError);
  std::stringstream bad_label("x0,y,fidelity,origin\n0.1,1,mid,doe\n");
  EXPECT_THROW(Dataset::read_csv(bad_label, Bounds::uniform(1)), LoadError);
}

TEST(Rng, SeedsAreStableAndIsolated) {
  Rng a(RngSeed{42}), b(RngSeed{42});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(derive_seed(RngSeed{1}, "doe").value, derive_seed(RngSeed{1}, "fit").value);
  EXPECT_NE(derive_seed(RngSeed{1}, "fit", 1).value, derive_seed(RngSeed{1}, "fit", 2).value);
  EXPECT_NE(derive_seed(RngSeed{1}, "doe").value, derive_seed(RngSeed{2}, "doe").value);
  EXPECT_EQ(hash_tag(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hash_tag("a"), 0xaf63dc4c8601ec8cULL);  // FNV-1a test vector
}

TEST(Rng, UniformRangeAndMean) {
  Rng rng(RngSeed{7});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, BelowIsUnbiasedOverSmallRange) {
  Rng rng(RngSeed{3});
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[rng.below(6)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_THROW(rng.below(0), ArgumentError);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(RngSeed{11});
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Lhs, SinglePointSpansDomain) {
  const auto pts = lhs_sample(1, Bounds::uniform(2), RngSeed{0});
  ASSERT_EQ(pts.size(), 1u);
  for (double v : pts[0]) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Lhs, FivePointsOnePerQuintile) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pts = lhs_sample(5, Bounds::uniform(2), RngSeed{seed});
    for (std::size_t j = 0; j < 2; ++j) {
      std::set<std::size_t> bins;
      for (const auto& p : pts) bins.insert(bin_of(p[j], -1.0, 1.0, 5));
      EXPECT_EQ(bins.size(), 5u);
    }
  }
}

TEST(Lhs, DoeOfElevenTimesLowDimIsStratifiedAndRepeatable) {
  const Bounds b = Bounds::uniform(4);
  const auto a = lhs_sample(44, b, RngSeed{9});
  const auto again = lhs_sample(44, b, RngSeed{9});
  EXPECT_EQ(a, again);
  for (std::size_t j = 0; j < 4; ++j) {
    std::set<std::size_t> bins;
    for (const auto& p : a) bins.insert(bin_of(p[j], -1.0, 1.0, 44));
    EXPECT_EQ(bins.size(), 44u);
  }
  EXPECT_NE(a, lhs_sample(44, b, RngSeed{10}));
}

TEST(Lhs, RespectsAsymmetricBounds) {
  const Bounds b({0.0, 10.0}, {0.5, 20.0});
  for (const auto& p : lhs_sample(17, b, RngSeed{1})) EXPECT_TRUE(b.contains(p, 0.0));
  EXPECT_THROW(lhs_sample(0, b, RngSeed{1}), ArgumentError);
}

TEST(Standardize, ConstantInputClampsStd) {
  const auto s = standardize_outputs(std::vector{1.0, 1.0, 1.0});
  EXPECT_EQ(s.values, (Vector{0.0, 0.0, 0.0}));
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_DOUBLE_EQ(s.std, kMinStd);
}

TEST(Standardize, TwoPointSymmetry) {
  const auto s = standardize_outputs(std::vector{0.0, 2.0});
  EXPECT_EQ(s.values, (Vector{-1.0, 1.0}));
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
}

TEST(Standardize, RoundTrip) {
  Rng rng(RngSeed{5});
  Vector ys(100);
  for (auto& y : ys) y = rng.uniform(-50.0, 300.0);
  const auto s = standardize_outputs(ys);
  for (std::size_t i = 0; i < ys.size(); ++i) EXPECT_NEAR(s.restore(s.values[i]), ys[i], 1e-10);
  EXPECT_THROW(standardize_outputs(std::vector<double>{}), ArgumentError);
}

}  // namespace
}  // namespace gmfoo
