// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flush_denormals.hpp"

namespace gmfoo {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kMinSigma = 1e-12;
constexpr double kInitialStep = 0.1;
constexpr double kFinalStep = 1e-6;
// Successful moves allowed per step size before the step is halved anyway.
constexpr std::size_t kMaxMovesPerStep = 50;

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }
double normal_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

struct LocalResult {
  Vector point;
  double value;
};

// Compass search with one step per coordinate. Coordinates are polled in
// order, + before -, and the first strict improvement is taken at once. A
// coordinate keeps its step after a success and halves it after a failed
// poll; the search ends when every step is below the floor.
LocalResult compass_search(CoordinateEvaluator& eval, const Bounds& bounds, double f_min, Vector x,
                           std::size_t& evaluations) {
  auto ei = [f_min](const Prediction& p) { return expected_improvement(p.mean, std::max(p.variance, 0.0), f_min); };
  double fx = ei(eval.reset(x));
  ++evaluations;
  const std::size_t d = bounds.dim();
  std::vector<double> frac(d, kInitialStep);
  std::vector<std::size_t> moves(d, 0);
  for (bool active = true; active;) {
    active = false;
    for (std::size_t i = 0; i < d; ++i) {
      if (frac[i] < kFinalStep) continue;
      active = true;
      const double step = frac[i] * bounds.width(i);
      bool improved = false;
      for (double sign : {1.0, -1.0}) {
        const double v = std::clamp(x[i] + sign * step, bounds.lower()[i], bounds.upper()[i]);
        if (v == x[i]) continue;
        ++evaluations;
        const double ft = ei(eval.trial(i, v));
        if (ft > fx) {
          eval.accept();
          x[i] = v;
          fx = ft;
          improved = true;
          break;
        }
      }
      if (improved && ++moves[i] < kMaxMovesPerStep) continue;
      frac[i] *= 0.5;
      moves[i] = 0;
    }
  }
  return {std::move(x), fx};
}

}  // namespace

double expected_improvement(double mean, double variance, double f_min) {
  if (variance < 0.0 || std::isnan(variance))
    throw ArgumentError("expected_improvement: variance must be >= 0");
  const double sigma = std::sqrt(variance);
  const double gap = f_min - mean;
  if (sigma < kMinSigma) return std::max(gap, 0.0);
  const double u = gap / sigma;
  return std::max(gap * normal_cdf(u) + sigma * normal_pdf(u), 0.0);
}

AcquisitionQuery maximize_ei(CoordinateEvaluator& eval, const Bounds& bounds, double f_min, std::size_t restarts,
                             RngSeed seed) {
  if (restarts < 1) throw ArgumentError("maximize_ei: restarts must be >= 1");
  if (eval.dimension() != bounds.dim()) throw ArgumentError("maximize_ei: model and bounds dimensions differ");
  const detail::FlushDenormals ftz;
  const auto starts = lhs_sample(restarts, bounds, seed);
  AcquisitionQuery best;
  best.ei_value = -1.0;
  best.restarts_used = restarts;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto local = compass_search(eval, bounds, f_min, starts[s], best.evaluations);
    if (local.value > best.ei_value) {
      best.point = std::move(local.point);
      best.ei_value = local.value;
      best.winning_start = s;
    }
  }
  return best;
}

AcquisitionQuery maximize_ei(const Predictor& predict, const Bounds& bounds, double f_min,
                             std::size_t restarts, RngSeed seed) {
  if (!predict) throw ArgumentError("maximize_ei: empty predictor");
  auto eval = make_coordinate_evaluator(predict, bounds.dim());
  return maximize_ei(*eval, bounds, f_min, restarts, seed);
}

}  // namespace gmfoo
