// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "gmfoo/core.hpp"
#include "gmfoo/surrogate.hpp"

namespace gmfoo {

/// Expected improvement below f_min of N(mean, variance). Falls back to
/// max(f_min - mean, 0) when the standard deviation is below 1e-12.
double expected_improvement(double mean, double variance, double f_min);

struct AcquisitionQuery {
  Vector point;
  double ei_value = 0.0;
  std::size_t restarts_used = 0;
  /// Index of the LHS start that produced the winner.
  std::size_t winning_start = 0;
  /// Posterior evaluations spent by the search.
  std::size_t evaluations = 0;
};

/// Multi-start pattern search for the EI maximizer inside bounds.
///
/// Starts are an LHS design of size `restarts`. From each start a compass
/// search polls +/- step along each coordinate in turn, moves on the first
/// strict improvement, and halves the step once a full sweep fails (or
/// after 50 moves). Steps run from 0.1 of the box width down to 1e-6. The
/// winner is the largest EI, ties going to the lowest start index.
AcquisitionQuery maximize_ei(CoordinateEvaluator& eval, const Bounds& bounds, double f_min, std::size_t restarts,
                             RngSeed seed);
/// Same search through a pointwise predictor.
AcquisitionQuery maximize_ei(const Predictor& predict, const Bounds& bounds, double f_min,
                             std::size_t restarts, RngSeed seed);

/// 10 restarts per dimension.
inline std::size_t default_restarts(std::size_t dim) { return 10 * dim; }

}  // namespace gmfoo
