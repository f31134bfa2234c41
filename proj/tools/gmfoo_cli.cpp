// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0
//
// gmfoo validate|run|diagnose --config PATH [--out DIR] [--jobs N] [--seed-offset K]
// Exit codes: 0 success, 1 config error, 2 runtime error.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gmfoo/gmfoo.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(gmfoo_status status) {
  switch (status) {
    case GMFOO_OK: return kExitOk;
    case GMFOO_ERR_CONFIG:
    case GMFOO_ERR_LOAD: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report_failure(gmfoo_status status) {
  std::fprintf(stderr, "gmfoo: %s error: %s\n", gmfoo_status_name(status), gmfoo_last_error());
  return exit_code_for(status);
}

struct ExperimentHandle {
  gmfoo_experiment* ptr = nullptr;
  ~ExperimentHandle() { gmfoo_experiment_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative multi-form Bayesian optimization"};
  app.set_version_flag("--version", gmfoo_version());
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::size_t jobs = 1;
  std::uint64_t seed_offset = 0;
  std::size_t n = 0;

  auto* validate = app.add_subcommand("validate", "Check a config and print the resolved experiment");
  auto* run = app.add_subcommand("run", "Run every (algorithm, seed) pair and write logs");
  auto* diagnose = app.add_subcommand("diagnose", "Correlation between the high and low latent spaces");
  for (auto* sub : {validate, run, diagnose}) sub->add_option("--config", config, "Experiment TOML or JSON")->required();
  for (auto* sub : {run, diagnose}) sub->add_option("--out", out, "Output directory (default: [run].out)");
  run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--seed-offset", seed_offset, "Added to every configured seed");
  diagnose->add_option("--n", n, "Number of pairs (default: [diagnose].n, minimum 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  ExperimentHandle exp;
  if (auto st = gmfoo_experiment_load(config.c_str(), &exp.ptr); st != GMFOO_OK) return report_failure(st);
  const char* out_dir = out.empty() ? nullptr : out.c_str();

  if (*validate) {
    char* report = nullptr;
    if (auto st = gmfoo_experiment_validate(exp.ptr, &report); st != GMFOO_OK) return report_failure(st);
    std::fputs(report, stdout);
    gmfoo_string_free(report);
    return kExitOk;
  }

  if (*run) {
    gmfoo_run_result result{};
    if (auto st = gmfoo_experiment_run(exp.ptr, out_dir, jobs, seed_offset, &result); st != GMFOO_OK)
      return report_failure(st);
    std::printf("%zu runs, %zu failed\n", result.runs, result.failed);
    if (result.failed) std::fprintf(stderr, "gmfoo: %s\n", gmfoo_last_error());
    return result.failed == result.runs ? kExitRuntime : kExitOk;
  }

  double pearson = 0.0;
  if (diagnose->count("--n") && n < 3) {
    std::fprintf(stderr, "gmfoo: --n must be at least 3\n");
    return kExitConfig;
  }
  if (auto st = gmfoo_experiment_diagnose(exp.ptr, out_dir, n, &pearson); st != GMFOO_OK) return report_failure(st);
  std::printf("pearson %.12f\n", pearson);
  return kExitOk;
}
