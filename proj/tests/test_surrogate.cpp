// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "gmfoo/surrogate.hpp"
#include "support/oracle.hpp"

namespace gmfoo {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;

std::vector<Vector> random_points(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<Vector> X(n, Vector(dim));
  for (auto& x : X)
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return X;
}

KernelParams random_params(Rng& rng, std::size_t dim, bool noise) {
  KernelParams p;
  p.signal_variance = rng.uniform(0.5, 2.0);
  for (std::size_t i = 0; i < dim; ++i) p.length_scales.push_back(rng.uniform(0.3, 1.5));
  p.noise_variance_high = noise ? rng.uniform(1e-4, 1e-2) : 0.0;
  p.noise_variance_low = noise ? rng.uniform(1e-4, 1e-2) : 0.0;
  return p;
}

TEST(Kernel, ClosedForms) {
  auto p = KernelParams::isotropic(1, 1.0, 1.0);
  EXPECT_NEAR(kernel(std::vector{0.0}, std::vector{1.0}, p), std::exp(-0.5), 1e-15);
  p.signal_variance = 2.0;
  EXPECT_EQ(kernel(std::vector{0.4}, std::vector{0.4}, p), 2.0);
  EXPECT_LT(kernel(std::vector{0.0}, std::vector{50.0}, p), 1e-300);
  EXPECT_THROW(kernel(std::vector{0.0, 1.0}, std::vector{1.0}, p), ArgumentError);
}

TEST(Kernel, SymmetricExactly) {
  Rng rng(RngSeed{1});
  for (int t = 0; t < 100; ++t) {
    const auto X = random_points(rng, 2, 3);
    const auto p = random_params(rng, 3, false);
    EXPECT_EQ(kernel(X[0], X[1], p), kernel(X[1], X[0], p));
  }
}

TEST(KernelParams, Validation) {
  auto p = KernelParams::isotropic(2, 0.5);
  EXPECT_NO_THROW(p.validate(2));
  EXPECT_THROW(p.validate(3), ArgumentError);
  p.rho = 1.5;
  EXPECT_THROW(p.validate(2), ArgumentError);
  p = KernelParams::isotropic(2, 0.5);
  p.noise_variance_low = -1e-3;
  EXPECT_THROW(p.validate(2), ArgumentError);
}

TEST(Jitter, LadderRecoversSingularMatrix) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const auto f = factorize_with_jitter(ones);
  EXPECT_GE(f.jitter, kJitterStart);
  EXPECT_LE(f.jitter, kJitterCeiling);
  Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  try {
    factorize_with_jitter(indefinite);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("1e-4"), std::string::npos) << e.what();
  }
}

TEST(LogMarginalLikelihood, ClosedForms) {
  auto p = KernelParams::isotropic(1, 1.0, 1.0);
  EXPECT_NEAR(log_marginal_likelihood({{0.0}}, std::vector{0.0}, p), -0.5 * kLog2Pi, 1e-12);
  EXPECT_NEAR(log_marginal_likelihood({{0.0}}, std::vector{0.0}, p), -0.9189385, 1e-7);
  EXPECT_NEAR(log_marginal_likelihood({{0.0}}, std::vector{1.0}, p), -0.5 - 0.5 * kLog2Pi, 1e-12);
}

TEST(LogMarginalLikelihood, MatchesDenseOracle) {
  Rng rng(RngSeed{2});
  for (int t = 0; t < 20; ++t) {
    const auto X = random_points(rng, 3, 2);
    const Vector y{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto p = random_params(rng, 2, true);
    EXPECT_NEAR(log_marginal_likelihood(X, y, p),
                oracle::log_marginal_likelihood(X, y, p.signal_variance, p.length_scales, p.noise_variance_high),
                1e-10);
  }
}

TEST(GpModel, InterpolatesNoiseFree) {
  Rng rng(RngSeed{3});
  const auto X = random_points(rng, 6, 2);
  Vector y;
  for (const auto& x : X) y.push_back(std::sin(3 * x[0]) + x[1]);
  const GpModel gp(X, y, KernelParams::isotropic(2, 0.7));
  for (std::size_t i = 0; i < X.size(); ++i) {
    const auto pr = gp.predict(X[i]);
    EXPECT_NEAR(pr.mean, y[i], 1e-8);
    EXPECT_NEAR(pr.variance, 0.0, 1e-8);
  }
}

TEST(GpModel, RevertsToPriorFarAway) {
  const auto p = KernelParams::isotropic(1, 0.2, 1.5, 0.01);
  const GpModel gp({{0.0}, {0.5}}, Vector{1.0, -1.0}, p, false);
  const auto pr = gp.predict(std::vector{100.0});
  EXPECT_NEAR(pr.mean, 0.0, 1e-12);
  EXPECT_NEAR(pr.variance, 1.5 + 0.01, 1e-12);
}

TEST(GpModel, TwoPointsMatchExplicitInverse) {
  const double s = 1.3, l = 0.8, sn = 0.05;
  const double x1 = -0.4, x2 = 0.3, y1 = 0.7, y2 = -0.2, q = 0.1;
  const GpModel gp({{x1}, {x2}}, Vector{y1, y2}, KernelParams::isotropic(1, l, s, sn), false);
  auto k = [&](double a, double b) { return s * std::exp(-0.5 * (a - b) * (a - b) / (l * l)); };
  const double a = k(x1, x1) + sn, b = k(x1, x2), d = k(x2, x2) + sn;
  const double det = a * d - b * b;
  const double i11 = d / det, i12 = -b / det, i22 = a / det;
  const double k1 = k(q, x1), k2 = k(q, x2);
  const double mean = k1 * (i11 * y1 + i12 * y2) + k2 * (i12 * y1 + i22 * y2);
  const double var = s - (k1 * k1 * i11 + 2 * k1 * k2 * i12 + k2 * k2 * i22) + sn;
  const auto pr = gp.predict(std::vector{q});
  EXPECT_NEAR(pr.mean, mean, 1e-10);
  EXPECT_NEAR(pr.variance, var, 1e-10);
}

TEST(GpModel, StandardizedMatchesOracleOnScaledOutputs) {
  Rng rng(RngSeed{4});
  for (int t = 0; t < 10; ++t) {
    const auto X = random_points(rng, 7, 3);
    Vector y;
    for (std::size_t i = 0; i < X.size(); ++i) y.push_back(rng.uniform(10.0, 20.0));
    const auto p = random_params(rng, 3, true);
    const GpModel gp(X, y, p);
    const auto st = standardize_outputs(y);
    const Vector q = random_points(rng, 1, 3)[0];
    const auto o = oracle::gp_posterior(X, st.values, q, p.signal_variance, p.length_scales, p.noise_variance_high);
    const auto pr = gp.predict(q);
    EXPECT_NEAR(pr.mean, st.restore(o.mean), 1e-8);
    EXPECT_NEAR(pr.variance, o.variance * st.std * st.std, 1e-8);
  }
}

TEST(GpModel, BatchAndCursorAgreeWithPointwise) {
  Rng rng(RngSeed{5});
  const auto X = random_points(rng, 30, 4);
  Vector y;
  for (const auto& x : X) y.push_back(x[0] * x[1] - x[2] + 0.3 * x[3]);
  const GpModel gp(X, y, random_params(rng, 4, true));
  Eigen::MatrixXd Q(4, 25);
  for (Eigen::Index c = 0; c < Q.cols(); ++c)
    for (Eigen::Index r = 0; r < 4; ++r) Q(r, c) = rng.uniform(-1, 1);
  Eigen::VectorXd mean, var;
  gp.predict_batch(Q, mean, var);
  for (Eigen::Index c = 0; c < Q.cols(); ++c) {
    const Vector q(Q.col(c).data(), Q.col(c).data() + 4);
    const auto pr = gp.predict(q);
    EXPECT_NEAR(mean(c), pr.mean, 1e-12);
    EXPECT_NEAR(var(c), pr.variance, 1e-12);
  }

  auto cursor = gp.coordinate_evaluator();
  Vector base(4, 0.1);
  auto pr = cursor->reset(base);
  EXPECT_NEAR(pr.mean, gp.predict(base).mean, 1e-12);
  for (int step = 0; step < 200; ++step) {
    const auto i = static_cast<std::size_t>(rng.below(4));
    const double v = rng.uniform(-1, 1);
    pr = cursor->trial(i, v);
    Vector moved = base;
    moved[i] = v;
    const auto ref = gp.predict(moved);
    ASSERT_NEAR(pr.mean, ref.mean, 1e-10);
    ASSERT_NEAR(pr.variance, ref.variance, 1e-10);
    if (rng.uniform() < 0.5) {
      cursor->accept();
      base = moved;
    }
  }
}

TEST(GpModel, RejectsBadQueries) {
  const GpModel gp({{0.0, 0.0}, {1.0, 1.0}}, Vector{0.0, 1.0}, KernelParams::isotropic(2, 1.0));
  EXPECT_THROW(gp.predict(std::vector{0.0}), ArgumentError);
  EXPECT_THROW(GpModel({{0.0}}, Vector{1.0, 2.0}, KernelParams::isotropic(1, 1.0)), ArgumentError);
}

TEST(GpModel, JsonRoundTrip) {
  const GpModel gp({{0.0, 0.5}, {1.0, -1.0}, {0.2, 0.2}}, Vector{0.0, 1.0, 3.0},
                   KernelParams::isotropic(2, 0.6, 1.2, 1e-3));
  const GpModel back = GpModel::from_json(gp.to_json());
  const auto a = gp.predict(std::vector{0.3, 0.1}), b = back.predict(std::vector{0.3, 0.1});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_THROW(GpModel::from_json("{"), LoadError);
}

TEST(FitGp, RejectsTooFewSamples) {
  EXPECT_THROW(fit_gp({{0.0}}, std::vector{1.0}, 1, RngSeed{0}), ArgumentError);
}

TEST(FitGp, LinearFunctionInterpolated) {
  const std::vector<Vector> X{{-1.0}, {-0.5}, {0.0}, {0.5}, {1.0}};
  const Vector y{-2.0, -0.5, 1.0, 2.5, 4.0};
  FitOptions opt;
  opt.fixed_noise = 0.0;
  const auto gp = fit_gp(X, y, 1, RngSeed{1}, opt);
  for (std::size_t i = 0; i < X.size(); ++i) EXPECT_NEAR(gp.predict(X[i]).mean, y[i], 1e-6);
}

TEST(FitGp, BeatsRandomHyperparameterDraws) {
  Rng rng(RngSeed{6});
  const auto X = random_points(rng, 10, 2);
  Vector y;
  for (const auto& x : X) y.push_back(std::cos(2 * x[0]) * x[1] + rng.uniform(-0.05, 0.05));
  const auto gp = fit_gp(X, y, 2, RngSeed{7});
  const auto st = standardize_outputs(y);
  const HyperparameterRanges r;
  for (int t = 0; t < 100; ++t) {
    KernelParams p;
    p.signal_variance = std::exp(rng.uniform(r.log_signal_min, r.log_signal_max));
    for (int i = 0; i < 2; ++i) p.length_scales.push_back(std::exp(rng.uniform(r.log_length_min, r.log_length_max)));
    p.noise_variance_high = std::exp(rng.uniform(r.log_noise_min, r.log_noise_max));
    double ll = -INFINITY;
    try {
      ll = log_marginal_likelihood(X, st.values, p);
    } catch (const NumericalError&) {
    }
    EXPECT_GE(gp.log_likelihood(), ll);
  }
  EXPECT_NEAR(gp.log_likelihood(), log_marginal_likelihood(X, st.values, gp.params()), 1e-9);
}

TEST(FitGp, Deterministic) {
  Rng rng(RngSeed{8});
  const auto X = random_points(rng, 8, 2);
  Vector y;
  for (const auto& x : X) y.push_back(x[0] + x[1] * x[1]);
  EXPECT_EQ(fit_gp(X, y, 2, RngSeed{3}).to_json(), fit_gp(X, y, 2, RngSeed{3}).to_json());
}

TEST(MfgpModel, EmptyLowEqualsGp) {
  Rng rng(RngSeed{9});
  for (int t = 0; t < 5; ++t) {
    const auto X = random_points(rng, 8, 2);
    Vector y;
    for (const auto& x : X) y.push_back(rng.uniform(-3, 3));
    auto p = random_params(rng, 2, t % 2 == 0);
    p.rho = 0.4;
    const GpModel gp(X, y, p);
    const MfgpModel mf(X, y, {}, {}, p);
    for (int k = 0; k < 100; ++k) {
      const Vector q{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const auto a = gp.predict(q), b = mf.predict(q);
      EXPECT_NEAR(a.mean, b.mean, 1e-8);
      EXPECT_NEAR(a.variance, b.variance, 1e-8);
    }
    if (p.noise_variance_high == 0.0) {
      for (std::size_t i = 0; i < X.size(); ++i) {
        EXPECT_NEAR(mf.predict(X[i]).mean, y[i], 1e-8);
        EXPECT_NEAR(mf.predict(X[i]).variance, 0.0, 1e-8);
      }
    }
  }
}

TEST(MfgpModel, MatchesJointDenseOracle) {
  Rng rng(RngSeed{10});
  for (int t = 0; t < 20; ++t) {
    const auto Xh = random_points(rng, 4, 2);
    const auto Xl = random_points(rng, 4, 2);
    Vector yh, yl;
    for (int i = 0; i < 4; ++i) {
      yh.push_back(rng.uniform(-1, 1));
      yl.push_back(rng.uniform(-1, 1));
    }
    auto p = random_params(rng, 2, true);
    p.rho = rng.uniform(-0.9, 0.9);
    const MfgpModel mf(Xh, yh, Xl, yl, p, false);
    oracle::Mat X = Xh;
    X.insert(X.end(), Xl.begin(), Xl.end());
    oracle::Vec y = yh;
    y.insert(y.end(), yl.begin(), yl.end());
    const std::vector<int> block{0, 0, 0, 0, 1, 1, 1, 1};
    const Vector q = random_points(rng, 1, 2)[0];
    const auto o = oracle::joint_posterior(X, y, block, q, p.signal_variance, p.length_scales,
                                           p.noise_variance_high, p.noise_variance_low, p.rho);
    const auto pr = mf.predict(q);
    EXPECT_NEAR(pr.mean, o.mean, 1e-8);
    EXPECT_NEAR(pr.variance, o.variance, 1e-8);
  }
}

TEST(MfgpModel, LowOnlyPointWithFullCorrelation) {
  auto p = KernelParams::isotropic(1, 0.4, 1.0, 0.0);
  p.rho = 1.0;
  const MfgpModel mf({{-0.8}, {0.0}}, Vector{1.0, 0.5}, {{0.6}}, Vector{-2.0}, p, false);
  EXPECT_NEAR(mf.predict(std::vector{0.6}).mean, -2.0, 1e-6);
}

TEST(MfgpModel, VarianceBoundedByPrior) {
  Rng rng(RngSeed{11});
  auto p = random_params(rng, 2, true);
  p.rho = -0.7;
  const auto Xh = random_points(rng, 5, 2), Xl = random_points(rng, 9, 2);
  const MfgpModel mf(Xh, Vector(5, 1.0), Xl, Vector(9, -1.0), p, false);
  for (int k = 0; k < 500; ++k) {
    const Vector q{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto pr = mf.predict(q);
    EXPECT_GE(pr.variance, 0.0);
    EXPECT_LE(pr.variance, p.signal_variance + p.noise_variance_high + 1e-8);
  }
}

TEST(MfgpModel, BatchAndCursorAgreeWithPointwise) {
  Rng rng(RngSeed{12});
  auto p = random_params(rng, 3, true);
  p.rho = 0.6;
  const auto Xh = random_points(rng, 10, 3), Xl = random_points(rng, 12, 3);
  Vector yh, yl;
  for (int i = 0; i < 10; ++i) yh.push_back(rng.uniform(-1, 1));
  for (int i = 0; i < 12; ++i) yl.push_back(rng.uniform(-1, 1));
  const MfgpModel mf(Xh, yh, Xl, yl, p);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Random(3, 20);
  Eigen::VectorXd mean, var;
  mf.predict_batch(Q, mean, var);
  for (Eigen::Index c = 0; c < Q.cols(); ++c) {
    const Vector q(Q.col(c).data(), Q.col(c).data() + 3);
    EXPECT_NEAR(mean(c), mf.predict(q).mean, 1e-12);
    EXPECT_NEAR(var(c), mf.predict(q).variance, 1e-12);
  }
  auto cursor = mf.coordinate_evaluator();
  Vector base{0.0, 0.0, 0.0};
  cursor->reset(base);
  for (int step = 0; step < 100; ++step) {
    const auto i = static_cast<std::size_t>(rng.below(3));
    const double v = rng.uniform(-1, 1);
    const auto pr = cursor->trial(i, v);
    Vector moved = base;
    moved[i] = v;
    ASSERT_NEAR(pr.mean, mf.predict(moved).mean, 1e-10);
    ASSERT_NEAR(pr.variance, mf.predict(moved).variance, 1e-10);
    cursor->accept();
    base = moved;
  }
}

TEST(MfgpModel, JsonRoundTrip) {
  auto p = KernelParams::isotropic(1, 0.5, 1.0, 1e-4);
  p.noise_variance_low = 1e-3;
  p.rho = 0.3;
  const MfgpModel mf({{0.0}, {1.0}}, Vector{0.0, 1.0}, {{0.5}}, Vector{0.7}, p);
  const auto back = MfgpModel::from_json(mf.to_json());
  EXPECT_EQ(back.size_low(), 1u);
  EXPECT_EQ(back.predict(std::vector{0.2}).mean, mf.predict(std::vector{0.2}).mean);
}

Dataset dataset_of(const std::vector<Vector>& X, const Vector& y, Fidelity f) {
  Dataset ds(Bounds::uniform(X.front().size()));
  for (std::size_t i = 0; i < X.size(); ++i) ds.add({X[i], y[i], f, Origin::DoE});
  return ds;
}

TEST(FitMfgp, EmptyLowMatchesFitGp) {
  Rng rng(RngSeed{13});
  for (int t = 0; t < 3; ++t) {
    const auto X = random_points(rng, 9, 2);
    Vector y;
    for (const auto& x : X) y.push_back(x[0] * x[0] - x[1]);
    const auto gp = fit_gp(X, y, 2, RngSeed{static_cast<std::uint64_t>(t)});
    const auto mf = fit_mfgp(dataset_of(X, y, Fidelity::High), Dataset(Bounds::uniform(2)),
                             RngSeed{static_cast<std::uint64_t>(t)});
    for (int k = 0; k < 100; ++k) {
      const Vector q{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      EXPECT_NEAR(gp.predict(q).mean, mf.predict(q).mean, 1e-8);
      EXPECT_NEAR(gp.predict(q).variance, mf.predict(q).variance, 1e-8);
    }
  }
}

// Profile of the joint likelihood over rho with the other parameters fixed.
double profile(const std::vector<Vector>& X, const Vector& yh, const Vector& yl, KernelParams p, double rho) {
  p.rho = rho;
  std::vector<Vector> all = X;
  all.insert(all.end(), X.begin(), X.end());
  oracle::Vec y = yh;
  y.insert(y.end(), yl.begin(), yl.end());
  const auto st = standardize_outputs(y);
  const std::size_t n = all.size();
  oracle::Mat K(n, oracle::Vec(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      K[i][j] = ((i < X.size()) == (j < X.size()) ? 1.0 : rho) *
                oracle::se_kernel(all[i], all[j], p.signal_variance, p.length_scales);
    K[i][i] += i < X.size() ? p.noise_variance_high : p.noise_variance_low;
  }
  return -0.5 * oracle::dot(st.values, oracle::matvec(oracle::inverse(K), st.values)) -
         0.5 * std::log(oracle::determinant(K));
}

TEST(FitMfgp, CopiedLowGivesStrongCorrelation) {
  Rng rng(RngSeed{14});
  const auto X = random_points(rng, 8, 2);
  Vector y;
  for (const auto& x : X) y.push_back(std::sin(2 * x[0]) + x[1]);
  const auto mf = fit_mfgp(dataset_of(X, y, Fidelity::High), dataset_of(X, y, Fidelity::Low), RngSeed{1});
  EXPECT_GE(std::abs(mf.params().rho), 0.9);
  const double best = profile(X, y, y, mf.params(), mf.params().rho);
  for (double r : {-0.5, 0.0, 0.5, 0.8}) EXPECT_GT(best, profile(X, y, y, mf.params(), r));
}

TEST(FitMfgp, NegatedLowGivesAntiCorrelation) {
  Rng rng(RngSeed{15});
  const auto X = random_points(rng, 8, 2);
  Vector y, neg;
  for (const auto& x : X) {
    y.push_back(std::sin(2 * x[0]) + x[1]);
    neg.push_back(-y.back());
  }
  const auto mf = fit_mfgp(dataset_of(X, y, Fidelity::High), dataset_of(X, neg, Fidelity::Low), RngSeed{1});
  EXPECT_LE(mf.params().rho, -0.5);
}

TEST(Simplex, MinimizesBoundedQuadratic) {
  const auto r = minimize_simplex(
      [](const Vector& x) { return (x[0] - 0.3) * (x[0] - 0.3) + 4 * (x[1] + 0.2) * (x[1] + 0.2); }, {0.9, 0.9},
      {-1, -1}, {1, 1}, 400);
  EXPECT_NEAR(r.x[0], 0.3, 1e-3);
  EXPECT_NEAR(r.x[1], -0.2, 1e-3);
  EXPECT_LE(r.evaluations, 400u);
  const auto clamped = minimize_simplex([](const Vector& x) { return x[0]; }, {0.5}, {0.0}, {1.0}, 100);
  EXPECT_NEAR(clamped.x[0], 0.0, 1e-9);
}

}  // namespace
}  // namespace gmfoo
