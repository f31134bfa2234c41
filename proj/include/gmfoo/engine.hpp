// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmfoo/acquisition.hpp"
#include "gmfoo/core.hpp"
#include "gmfoo/latent.hpp"
#include "gmfoo/problems.hpp"
#include "gmfoo/surrogate.hpp"

namespace gmfoo {

enum class SubTask { High, Low, Narrowed };
std::string_view to_string(SubTask t);
SubTask subtask_from_string(std::string_view s);

/// Box around an embedded low-space incumbent. May be degenerate (delta = 0),
/// which is why this is not a Bounds.
struct NarrowedBox {
  Vector lower;
  Vector upper;

  bool degenerate() const;
  bool contains(std::span<const double> x, double tol = 1e-12) const;
  /// Throws ArgumentError when degenerate.
  Bounds bounds() const;
};

/// Box centred at [c_min, 0, ..., 0] with half-width delta * (range / 2) per
/// dimension, intersected with bounds_high.
NarrowedBox narrowed_box(std::span<const double> c_min, double delta, const Bounds& bounds_high,
                         std::size_t d_high);

struct KnowledgeBase {
  std::optional<Sample> best_low;
  Dataset exchanged_to_high;  // [c, 0] samples, Low fidelity
  Dataset exchanged_to_low;   // c' samples, Low fidelity
};

/// Transfers every High sample of each space into the other as a Low sample,
/// skipping points that already exist there as Low samples.
KnowledgeBase exchange_samples(const Dataset& high_ds, const Dataset& low_ds, const LatentSpacePair& pair);

struct RunRecord {
  std::size_t evaluation = 0;  // 1-based
  std::size_t iteration = 0;   // 0 for the design of experiments
  SubTask subtask = SubTask::High;
  Origin origin = Origin::DoE;
  Vector x;  // coordinates in the sub-task's own space
  double y = 0.0;
  double best_so_far = 0.0;
  std::optional<NarrowedBox> box;  // narrowed queries only
  double wall_seconds = 0.0;       // not part of the JSON/CSV serialization
};

/// Complete history of one optimization run. JSON and CSV exclude wall time
/// so reruns serialize byte-identically.
struct RunLog {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<RunRecord> records;
  /// Set when the run aborted; records hold everything up to the failure.
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
  std::size_t evaluations() const { return records.size(); }
  double final_best() const;
  /// Best value after the first `evaluations` records.
  double best_after(std::size_t evaluations) const;
  /// Evaluations consumed per loop iteration, indexed by iteration (entry 0 is the DoE).
  std::vector<std::size_t> evaluations_per_iteration() const;

  std::string to_json() const;
  static RunLog from_json(std::string_view text);
  void write_csv(std::ostream& os) const;
  void write_timing_csv(std::ostream& os) const;
};

/// Latent space searched by a single-space optimizer: a box and the decoder
/// mapping latent points to designs.
struct SearchSpace {
  Bounds bounds;
  std::function<Vector(std::span<const double>)> decode;
  SubTask subtask = SubTask::High;
};

struct BoConfig {
  std::size_t budget = 0;
  std::size_t doe_size = 0;
  std::size_t ei_restarts = 0;  // 0 selects 10 * dimension
  RngSeed seed;
  FitOptions fit;
};

/// LHS design, then fit GP -> maximize EI -> evaluate -> append until the
/// budget is spent.
RunLog run_standard_bo(const Problem& problem, const SearchSpace& space, const BoConfig& config,
                       std::string algorithm = "bo");

/// Uniform random draws over the space, `budget` of them.
RunLog run_random_search(const Problem& problem, const SearchSpace& space, std::size_t budget, RngSeed seed,
                         std::string algorithm = "random-search");

struct GmfooConfig {
  double delta = 0.15;
  std::size_t budget = 0;
  /// Total design-of-experiments size, split in halves across the two
  /// spaces (high space gets the larger half). 0 selects 11 * d_low.
  std::size_t doe_size = 0;
  std::size_t ei_restarts = 0;  // 0 selects 10 * dimension per space
  RngSeed seed;
  /// Store C->Z transfers as High samples, since g([c, 0]) is the evaluated design.
  bool exchange_exact_fidelity = false;
  FitOptions fit;

  std::size_t resolved_doe(std::size_t d_low) const { return doe_size ? doe_size : 11 * d_low; }
  std::size_t evaluations_per_iteration() const { return delta > 0.0 ? 3 : 2; }
  void validate(const LatentSpacePair& pair) const;
};

RunLog run_gmfoo(const Problem& problem, const LatentSpacePair& pair, const GmfooConfig& config);

struct ComparisonSettings {
  std::size_t budget = 0;
  std::size_t doe_size = 0;  // 0 selects 11 * d_low
  double delta = 0.15;
  std::size_t ei_restarts = 0;
  bool exchange_exact_fidelity = false;
  FitOptions fit;
  /// Linear baseline generator (latent -> design); required by svd-bo.
  std::optional<Network> svd_generator;
};

inline constexpr std::string_view kAlgorithms[] = {"gmfoo", "gmo-high", "gmo-low", "svd-bo", "random-search"};
bool is_known_algorithm(std::string_view name);

/// Seed of one (algorithm, seed) run. Streams of different algorithms are
/// independent.
RngSeed algorithm_seed(std::string_view algorithm, std::uint64_t seed);

RunLog run_algorithm(const Problem& problem, const LatentSpacePair& pair, std::string_view algorithm,
                     std::uint64_t seed, const ComparisonSettings& settings);

/// One log per (algorithm, seed), algorithm-major.
std::vector<RunLog> run_comparison(const Problem& problem, const LatentSpacePair& pair,
                                   const std::vector<std::string>& algorithms,
                                   const std::vector<std::uint64_t>& seeds, const ComparisonSettings& settings);

}  // namespace gmfoo
