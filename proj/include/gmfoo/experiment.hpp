// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmfoo/engine.hpp"
#include "gmfoo/latent.hpp"
#include "gmfoo/problems.hpp"

namespace gmfoo {

enum class ConfigFormat { Toml, Json };

/// Experiment recipe. Paths are stored already resolved against the
/// directory of the config file.
struct ExperimentConfig {
  std::string source;  // config path, informational

  std::string problem = "fourier-quadratic";
  std::size_t design_dim = 384;
  std::size_t d_high = 16;
  std::size_t d_low = 4;
  bool d_high_given = false;  // set when the file names it; checked against networks
  bool d_low_given = false;
  CorbelConfig corbel;
  std::string generator_output;  // "unit", "tanh" or empty (from the output activation)

  std::string generator = "analytic";
  std::string encoder = "analytic";
  std::optional<std::string> svd_generator;

  std::vector<std::string> algorithms = {"gmfoo", "gmo-high"};
  std::vector<std::uint64_t> seeds;
  std::size_t budget = 120;
  double delta = 0.15;
  std::size_t doe_size = 0;
  std::size_t ei_restarts = 0;
  bool exchange_exact_fidelity = false;
  std::string out_dir = "results";

  std::size_t diagnose_n = 1000;
  std::uint64_t diagnose_seed = 0;
};

/// Parses TOML or its JSON mirror. Throws ConfigError listing every schema
/// violation as "section.key: message".
ExperimentConfig parse_experiment_config(std::string_view text, ConfigFormat format,
                                         const std::string& base_dir = ".");
/// Format chosen by extension: .json is JSON, anything else TOML.
ExperimentConfig load_experiment_config(const std::string& path);

/// Problem and latent pair an experiment runs on.
struct ResolvedExperiment {
  Problem problem;
  LatentSpacePair pair;
  ComparisonSettings settings;
};

/// Loads networks and checks cross-field invariants. Throws ConfigError
/// (bad values, missing files) or LoadError (malformed network files).
ResolvedExperiment resolve_experiment(const ExperimentConfig& cfg);

/// Human-readable summary of the resolved configuration.
std::string validate_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string algorithm;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double median_final_best = 0.0;
  double min_final_best = 0.0;
  double max_final_best = 0.0;
};

struct RunOutcome {
  std::vector<std::string> files;
  std::vector<SummaryRow> summary;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;  // "algorithm seed: message"
};

std::string runlog_basename(std::string_view algorithm, std::uint64_t seed);

/// Runs every (algorithm, seed) pair with up to `jobs` threads and writes
/// per-run logs plus summary.csv into out_dir.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::size_t jobs = 1,
                          std::uint64_t seed_offset = 0);

/// Median of the values (mean of the middle pair for even counts).
double median(std::vector<double> values);

struct DiagnoseOutcome {
  PearsonReport report;
  std::string pairs_csv;
  std::string summary_json;
};

/// Correlation diagnostic; n = 0 selects cfg.diagnose_n.
DiagnoseOutcome diagnose_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::size_t n = 0);

/// Applies GMFOO_LOG (error|info|debug) to the library logger.
void configure_logging();

}  // namespace gmfoo
