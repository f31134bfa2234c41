// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gmfoo/core.hpp"
#include "gmfoo/latent.hpp"

namespace gmfoo {

inline constexpr std::size_t kProfilePoints = 192;
inline constexpr std::size_t kImagePixels = 784;

using Point2 = std::array<double, 2>;

/// A 192-point corbel curve. The first and last points fix the span of wall
/// the curve is attached to.
class CurveProfile {
 public:
  explicit CurveProfile(std::vector<Point2> points);

  /// Interleaved [x0, y0, x1, y1, ...] design vector of length 384.
  static CurveProfile from_interleaved(std::span<const double> xy);

  const std::vector<Point2>& points() const { return points_; }

  void write_csv(std::ostream& os) const;
  static CurveProfile read_csv(std::istream& is);

 private:
  std::vector<Point2> points_;
};

struct CorbelConfig {
  double w1 = 1.0;
  double w2 = 10.0;
  Point2 target_centroid{0.0, 0.0};
  double density = 1.0;
  double gravity = 1.0;

  void validate() const;
};

struct PolygonProperties {
  double area = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Area and centroid of the region closed by last point -> (0, y_last) ->
/// (0, y_first) -> first point. Throws GeometryError when the area is at
/// most 1e-12 or the boundary self-intersects.
PolygonProperties corbel_region(const CurveProfile& curve);

/// w1 * m * g * Cx + w2 * |(Cx, Cy) - target|^2 with m = density * area.
double corbel_objective(const CurveProfile& curve, const CorbelConfig& cfg);

/// Negated count of pixels above threshold, so minimizing maximizes area.
double area_objective(std::span<const double> image, double threshold = 0.5);

/// Thresholds for generators emitting [0, 1] (sigmoid) or [-1, 1] (tanh).
double area_threshold_for(Activation output_activation);

struct Problem {
  std::string name;
  std::size_t input_dim = 0;
  Objective objective;  // minimized

  /// Calls the objective with a length check; non-Error exceptions and
  /// non-finite values become EvaluationError.
  double evaluate(std::span<const double> design) const;
};

Problem make_corbel_problem(const CorbelConfig& cfg);          // designs are interleaved profiles
Problem make_area_problem(double threshold);                    // designs are 784-pixel images

// Subspace depends on the design only through its first d_low sine
// coefficients, so the low space loses no information on it.
enum class FourierObjective { QuadraticTarget, Corbel, Subspace };

/// Analytic stand-in for a trained generator/encoder pair.
///
/// The generator is linear: y_j = sum_k 2^-k z_k sin((k+1) pi t_j) with
/// t_j = (j+1)/(D+1), so the sine columns are exactly orthogonal on the grid
/// and the encoder recovers the first d_low coefficients by projection.
struct FourierPair {
  LatentSpacePair pair;
  Problem problem;
  /// Hidden target curve (quadratic variant only).
  Vector target;
};

FourierPair fourier_pair(std::size_t D, std::size_t d_high, std::size_t d_low,
                         FourierObjective objective = FourierObjective::QuadraticTarget);

/// Coefficients of the in-span part of the quadratic target.
Vector fourier_target_coefficients(std::size_t d_high);

void write_pgm(std::ostream& os, std::span<const double> image, std::size_t width, std::size_t height,
               double lo = 0.0, double hi = 1.0);
/// Pixel values rescaled back to [lo, hi].
Vector read_pgm(std::istream& is, std::size_t& width, std::size_t& height, double lo = 0.0, double hi = 1.0);

}  // namespace gmfoo
