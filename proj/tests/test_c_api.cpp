// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "gmfoo/gmfoo.h"

namespace {

const std::string kData = GMFOO_TEST_DATA;

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(gmfoo_version(), "1.0.0");
  EXPECT_STREQ(gmfoo_status_name(GMFOO_OK), "ok");
  EXPECT_STREQ(gmfoo_status_name(GMFOO_ERR_GEOMETRY), "geometry");
  gmfoo_string_free(nullptr);
}

TEST(CApi, ExpectedImprovement) {
  double v = 0;
  ASSERT_EQ(gmfoo_expected_improvement(0.0, 1.0, 0.0, &v), GMFOO_OK);
  EXPECT_NEAR(v, 0.3989423, 1e-6);
  EXPECT_EQ(gmfoo_expected_improvement(0.0, -1.0, 0.0, &v), GMFOO_ERR_ARGUMENT);
  EXPECT_NE(std::string(gmfoo_last_error()).find("variance"), std::string::npos);
  EXPECT_EQ(gmfoo_expected_improvement(0.0, 1.0, 0.0, nullptr), GMFOO_ERR_ARGUMENT);
}

TEST(CApi, CorbelRectangleAndDegenerate) {
  std::vector<double> xy;
  for (int i = 0; i < 192; ++i) {
    xy.push_back(1.0);
    xy.push_back(2.0 * i / 191.0);
  }
  double f = 0;
  ASSERT_EQ(gmfoo_corbel_objective(xy.data(), xy.size(), 1, 10, 0, 0, 1, 1, &f), GMFOO_OK);
  EXPECT_NEAR(f, 13.5, 1e-9);
  for (int i = 0; i < 192; ++i) xy[2 * i] = 0.0;
  EXPECT_EQ(gmfoo_corbel_objective(xy.data(), xy.size(), 1, 10, 0, 0, 1, 1, &f), GMFOO_ERR_GEOMETRY);
  EXPECT_EQ(gmfoo_corbel_objective(xy.data(), 10, 1, 10, 0, 0, 1, 1, &f), GMFOO_ERR_ARGUMENT);
}

TEST(CApi, AreaObjective) {
  std::vector<double> img(784, 1.0);
  double f = 0;
  ASSERT_EQ(gmfoo_area_objective(img.data(), img.size(), 0.5, &f), GMFOO_OK);
  EXPECT_EQ(f, -784.0);
  EXPECT_EQ(gmfoo_area_objective(img.data(), 100, 0.5, &f), GMFOO_ERR_ARGUMENT);
}

TEST(CApi, LhsStratified) {
  const double lo[2] = {-1, 0}, hi[2] = {1, 10};
  std::vector<double> out(10 * 2);
  ASSERT_EQ(gmfoo_lhs(10, 2, lo, hi, 3, out.data()), GMFOO_OK);
  for (int d = 0; d < 2; ++d) {
    std::vector<int> hits(10, 0);
    for (int i = 0; i < 10; ++i) ++hits[static_cast<int>((out[i * 2 + d] - lo[d]) / (hi[d] - lo[d]) * 10)];
    for (int h : hits) EXPECT_EQ(h, 1);
  }
  EXPECT_EQ(gmfoo_lhs(0, 2, lo, hi, 3, out.data()), GMFOO_ERR_ARGUMENT);
}

TEST(CApi, NetworkLifecycle) {
  gmfoo_network* net = nullptr;
  ASSERT_EQ(gmfoo_network_load((kData + "/identity2.net.json").c_str(), &net), GMFOO_OK);
  size_t in = 0, out = 0;
  ASSERT_EQ(gmfoo_network_dims(net, &in, &out), GMFOO_OK);
  EXPECT_EQ(in, 2u);
  EXPECT_EQ(out, 2u);
  const double x[2] = {0.5, -1.5};
  double y[2] = {0, 0};
  ASSERT_EQ(gmfoo_network_forward(net, x, 2, y, 2), GMFOO_OK);
  EXPECT_EQ(y[0], 0.5);
  EXPECT_EQ(y[1], -1.5);
  EXPECT_EQ(gmfoo_network_forward(net, x, 1, y, 2), GMFOO_ERR_ARGUMENT);
  EXPECT_EQ(gmfoo_network_forward(net, x, 2, y, 3), GMFOO_ERR_ARGUMENT);
  gmfoo_network_free(net);

  gmfoo_network* bad = nullptr;
  EXPECT_EQ(gmfoo_network_load((kData + "/mismatched_chain.net.json").c_str(), &bad), GMFOO_ERR_LOAD);
  EXPECT_EQ(bad, nullptr);
  EXPECT_NE(std::string(gmfoo_last_error()).find("layer 1"), std::string::npos);
  gmfoo_network_free(nullptr);
}

TEST(CApi, ExperimentValidateAndErrors) {
  gmfoo_experiment* exp = nullptr;
  ASSERT_EQ(gmfoo_experiment_load((kData + "/analytic_small.toml").c_str(), &exp), GMFOO_OK);
  char* report = nullptr;
  ASSERT_EQ(gmfoo_experiment_validate(exp, &report), GMFOO_OK);
  EXPECT_NE(std::string(report).find("d_low: 2"), std::string::npos);
  gmfoo_string_free(report);
  gmfoo_experiment_free(exp);

  gmfoo_experiment* bad = nullptr;
  EXPECT_EQ(gmfoo_experiment_load((kData + "/bad_schema.toml").c_str(), &bad), GMFOO_ERR_CONFIG);
  EXPECT_NE(std::string(gmfoo_last_error()).find("run.delta"), std::string::npos);
  EXPECT_EQ(gmfoo_experiment_load(nullptr, &bad), GMFOO_ERR_ARGUMENT);

  ASSERT_EQ(gmfoo_experiment_load((kData + "/missing_network.toml").c_str(), &exp), GMFOO_OK);
  EXPECT_EQ(gmfoo_experiment_validate(exp, &report), GMFOO_ERR_CONFIG);
  EXPECT_NE(std::string(gmfoo_last_error()).find("no_such_generator"), std::string::npos);
  gmfoo_experiment_free(exp);
}

TEST(CApi, RunAndDiagnose) {
  const auto dir = std::filesystem::temp_directory_path() / "gmfoo_test_c_api";
  std::filesystem::remove_all(dir);
  gmfoo_experiment* exp = nullptr;
  ASSERT_EQ(gmfoo_experiment_load((kData + "/subspace.toml").c_str(), &exp), GMFOO_OK);
  gmfoo_run_result r{};
  ASSERT_EQ(gmfoo_experiment_run(exp, dir.c_str(), 1, 0, &r), GMFOO_OK);
  EXPECT_EQ(r.runs, 1u);
  EXPECT_EQ(r.failed, 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "random-search_0.runlog.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  double p = 0;
  ASSERT_EQ(gmfoo_experiment_diagnose(exp, dir.c_str(), 50, &p), GMFOO_OK);
  EXPECT_NEAR(p, 1.0, 1e-9);
  EXPECT_EQ(gmfoo_experiment_diagnose(exp, dir.c_str(), 2, &p), GMFOO_ERR_ARGUMENT);
  EXPECT_EQ(gmfoo_experiment_run(nullptr, dir.c_str(), 1, 0, &r), GMFOO_ERR_ARGUMENT);
  gmfoo_experiment_free(exp);
}

}  // namespace
