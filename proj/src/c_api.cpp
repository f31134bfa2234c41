// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/gmfoo.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "gmfoo/acquisition.hpp"
#include "gmfoo/core.hpp"
#include "gmfoo/experiment.hpp"
#include "gmfoo/latent.hpp"
#include "gmfoo/problems.hpp"

struct gmfoo_experiment {
  gmfoo::ExperimentConfig config;
};

struct gmfoo_network {
  gmfoo::Network net;
};

namespace {

thread_local std::string g_last_error;

gmfoo_status fail(gmfoo_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Maps the C++ exception hierarchy onto status codes.
template <typename F>
gmfoo_status guarded(F&& body) {
  try {
    body();
    return GMFOO_OK;
  } catch (const gmfoo::ConfigError& e) {
    return fail(GMFOO_ERR_CONFIG, e.what());
  } catch (const gmfoo::LoadError& e) {
    return fail(GMFOO_ERR_LOAD, e.what());
  } catch (const gmfoo::ArgumentError& e) {
    return fail(GMFOO_ERR_ARGUMENT, e.what());
  } catch (const gmfoo::NumericalError& e) {
    return fail(GMFOO_ERR_NUMERICAL, e.what());
  } catch (const gmfoo::GeometryError& e) {
    return fail(GMFOO_ERR_GEOMETRY, e.what());
  } catch (const gmfoo::EvaluationError& e) {
    return fail(GMFOO_ERR_EVALUATION, e.what());
  } catch (const gmfoo::IoError& e) {
    return fail(GMFOO_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GMFOO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GMFOO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GMFOO_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool cond, const char* msg) {
  if (!cond) throw gmfoo::ArgumentError(msg);
}

}  // namespace

extern "C" {

const char* gmfoo_version(void) { return "1.0.0"; }

const char* gmfoo_last_error(void) { return g_last_error.c_str(); }

const char* gmfoo_status_name(gmfoo_status status) {
  switch (status) {
    case GMFOO_OK: return "ok";
    case GMFOO_ERR_ARGUMENT: return "argument";
    case GMFOO_ERR_CONFIG: return "config";
    case GMFOO_ERR_LOAD: return "load";
    case GMFOO_ERR_NUMERICAL: return "numerical";
    case GMFOO_ERR_GEOMETRY: return "geometry";
    case GMFOO_ERR_EVALUATION: return "evaluation";
    case GMFOO_ERR_IO: return "io";
    case GMFOO_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void gmfoo_string_free(char* s) { std::free(s); }

gmfoo_status gmfoo_experiment_load(const char* path, gmfoo_experiment** out) {
  return guarded([&] {
    require(path && out, "gmfoo_experiment_load: null argument");
    *out = nullptr;
    auto cfg = gmfoo::load_experiment_config(path);
    *out = new gmfoo_experiment{std::move(cfg)};
  });
}

void gmfoo_experiment_free(gmfoo_experiment* exp) { delete exp; }

gmfoo_status gmfoo_experiment_validate(const gmfoo_experiment* exp, char** report) {
  return guarded([&] {
    require(exp, "gmfoo_experiment_validate: null experiment");
    const std::string text = gmfoo::validate_experiment(exp->config);
    if (report) *report = dup_string(text);
  });
}

gmfoo_status gmfoo_experiment_run(const gmfoo_experiment* exp, const char* out_dir, size_t jobs,
                                  uint64_t seed_offset, gmfoo_run_result* result) {
  return guarded([&] {
    require(exp, "gmfoo_experiment_run: null experiment");
    const std::string dir = out_dir ? out_dir : exp->config.out_dir;
    const auto outcome = gmfoo::run_experiment(exp->config, dir, jobs, seed_offset);
    if (result) *result = {outcome.runs, outcome.failed};
    if (outcome.failed) {
      std::string msg = std::to_string(outcome.failed) + " of " + std::to_string(outcome.runs) + " runs failed";
      for (const auto& f : outcome.failures) msg += "\n  " + f;
      g_last_error = msg;
    }
  });
}

gmfoo_status gmfoo_experiment_diagnose(const gmfoo_experiment* exp, const char* out_dir, size_t n,
                                       double* pearson) {
  return guarded([&] {
    require(exp, "gmfoo_experiment_diagnose: null experiment");
    const std::string dir = out_dir ? out_dir : exp->config.out_dir;
    const auto outcome = gmfoo::diagnose_experiment(exp->config, dir, n);
    if (pearson) *pearson = outcome.report.pearson;
  });
}

gmfoo_status gmfoo_network_load(const char* path, gmfoo_network** out) {
  return guarded([&] {
    require(path && out, "gmfoo_network_load: null argument");
    *out = nullptr;
    *out = new gmfoo_network{gmfoo::load_network(path)};
  });
}

void gmfoo_network_free(gmfoo_network* net) { delete net; }

gmfoo_status gmfoo_network_dims(const gmfoo_network* net, size_t* input_dim, size_t* output_dim) {
  return guarded([&] {
    require(net, "gmfoo_network_dims: null network");
    if (input_dim) *input_dim = net->net.input_dim();
    if (output_dim) *output_dim = net->net.output_dim();
  });
}

gmfoo_status gmfoo_network_forward(const gmfoo_network* net, const double* x, size_t n, double* y, size_t m) {
  return guarded([&] {
    require(net && x && y, "gmfoo_network_forward: null argument");
    require(m == net->net.output_dim(), "gmfoo_network_forward: output buffer length differs from output_dim");
    const auto out = gmfoo::forward(net->net, std::span<const double>(x, n));
    std::copy(out.begin(), out.end(), y);
  });
}

gmfoo_status gmfoo_expected_improvement(double mean, double variance, double f_min, double* out) {
  return guarded([&] {
    require(out, "gmfoo_expected_improvement: null output");
    *out = gmfoo::expected_improvement(mean, variance, f_min);
  });
}

gmfoo_status gmfoo_corbel_objective(const double* xy, size_t n, double w1, double w2, double target_x,
                                    double target_y, double density, double gravity, double* out) {
  return guarded([&] {
    require(xy && out, "gmfoo_corbel_objective: null argument");
    gmfoo::CorbelConfig cfg;
    cfg.w1 = w1;
    cfg.w2 = w2;
    cfg.target_centroid = {target_x, target_y};
    cfg.density = density;
    cfg.gravity = gravity;
    cfg.validate();
    const auto curve = gmfoo::CurveProfile::from_interleaved(std::span<const double>(xy, n));
    *out = gmfoo::corbel_objective(curve, cfg);
  });
}

gmfoo_status gmfoo_area_objective(const double* image, size_t n, double threshold, double* out) {
  return guarded([&] {
    require(image && out, "gmfoo_area_objective: null argument");
    *out = gmfoo::area_objective(std::span<const double>(image, n), threshold);
  });
}

gmfoo_status gmfoo_lhs(size_t n, size_t dim, const double* lower, const double* upper, uint64_t seed,
                       double* out) {
  return guarded([&] {
    require(lower && upper && out, "gmfoo_lhs: null argument");
    gmfoo::Bounds bounds(gmfoo::Vector(lower, lower + dim), gmfoo::Vector(upper, upper + dim));
    const auto points = gmfoo::lhs_sample(n, bounds, gmfoo::RngSeed{seed});
    for (std::size_t i = 0; i < points.size(); ++i) std::copy(points[i].begin(), points[i].end(), out + i * dim);
  });
}

}  // extern "C"
