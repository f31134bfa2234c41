// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmfoo/error.hpp"

namespace gmfoo {

using Vector = std::vector<double>;

/// Axis-aligned search box. Immutable after construction.
class Bounds {
 public:
  Bounds(Vector lower, Vector upper);

  /// [lo, hi]^dim.
  static Bounds uniform(std::size_t dim, double lo = -1.0, double hi = 1.0);

  std::size_t dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  double width(std::size_t i) const { return upper_[i] - lower_[i]; }

  bool contains(std::span<const double> x, double tol = 1e-12) const;
  Vector clamp(std::span<const double> x) const;

  bool operator==(const Bounds&) const = default;

 private:
  Vector lower_;
  Vector upper_;
};

enum class Fidelity { High, Low };
enum class Origin { DoE, EiQuery, NarrowedQuery, Exchanged };

std::string_view to_string(Fidelity f);
std::string_view to_string(Origin o);
Fidelity fidelity_from_string(std::string_view s);
Origin origin_from_string(std::string_view s);

struct Sample {
  Vector x;
  double y = 0.0;
  Fidelity fidelity = Fidelity::High;
  Origin origin = Origin::DoE;
};

/// Coordinates closer than this (per coordinate) count as the same point.
inline constexpr double kDuplicateTolerance = 1e-12;

bool same_point(std::span<const double> a, std::span<const double> b,
                double tol = kDuplicateTolerance);

/// Append-only sample set bound to one search box.
///
/// Rejects High-fidelity duplicates; Low samples may coincide with High ones
/// since exchanged samples can land on already evaluated designs.
class Dataset {
 public:
  explicit Dataset(Bounds bounds);

  std::size_t dimension() const { return bounds_.dim(); }
  const Bounds& bounds() const { return bounds_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  /// Throws ArgumentError on dimension mismatch, non-finite y, out of bounds
  /// or a duplicate High point.
  void add(Sample s);

  /// True when a sample with this fidelity already sits at x.
  bool contains(std::span<const double> x, Fidelity fidelity) const;

  std::size_t count(Fidelity f) const;
  /// Copy holding only the samples of the given fidelity.
  Dataset filter(Fidelity f) const;

  /// Smallest y over the samples of one fidelity, if any.
  std::optional<Sample> best(Fidelity f) const;
  std::optional<double> min_y() const;

  void write_csv(std::ostream& os) const;
  void save_csv(const std::string& path) const;
  static Dataset read_csv(std::istream& is, const Bounds& bounds);
  static Dataset load_csv(const std::string& path, const Bounds& bounds);

 private:
  Bounds bounds_;
  std::vector<Sample> samples_;
};

struct RngSeed {
  std::uint64_t value = 0;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t hash_tag(std::string_view tag);
RngSeed derive_seed(RngSeed base, std::string_view tag, std::uint64_t index = 0);

/// Platform-independent random stream (xoshiro256**).
///
/// The standard distributions are implementation-defined, so uniform reals,
/// bounded integers and shuffles are produced here directly to keep runs
/// bitwise reproducible across toolchains.
class Rng {
 public:
  explicit Rng(RngSeed seed);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }
  Vector uniform_point(const Bounds& bounds);

 private:
  std::uint64_t s_[4];
};

/// Latin hypercube design: one point in each of the n equal-width bins of
/// every coordinate. Deterministic given the seed.
std::vector<Vector> lhs_sample(std::size_t n, const Bounds& bounds, RngSeed seed);

struct Standardized {
  Vector values;
  double mean = 0.0;
  double std = 1.0;

  double restore(double v) const { return v * std + mean; }
};

inline constexpr double kMinStd = 1e-12;

/// Zero mean, unit (population) variance; std is clamped below by kMinStd.
Standardized standardize_outputs(std::span<const double> ys);

}  // namespace gmfoo
