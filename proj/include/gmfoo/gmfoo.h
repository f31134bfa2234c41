/* Copyright 2026 The gmfoo Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the gmfoo toolkit. Functions return a gmfoo_status; on
 * failure gmfoo_last_error() describes the most recent error on the calling
 * thread. Strings returned through out-parameters are owned by the caller and
 * released with gmfoo_string_free.
 */
#ifndef GMFOO_GMFOO_H_
#define GMFOO_GMFOO_H_

#include <stddef.h>
#include <stdint.h>

#if defined(GMFOO_BUILDING_LIBRARY)
#define GMFOO_API __attribute__((visibility("default")))
#else
#define GMFOO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gmfoo_status {
  GMFOO_OK = 0,
  GMFOO_ERR_ARGUMENT = 1,
  GMFOO_ERR_CONFIG = 2,
  GMFOO_ERR_LOAD = 3,
  GMFOO_ERR_NUMERICAL = 4,
  GMFOO_ERR_GEOMETRY = 5,
  GMFOO_ERR_EVALUATION = 6,
  GMFOO_ERR_IO = 7,
  GMFOO_ERR_INTERNAL = 99
} gmfoo_status;

typedef struct gmfoo_experiment gmfoo_experiment;
typedef struct gmfoo_network gmfoo_network;

typedef struct gmfoo_run_result {
  size_t runs;
  size_t failed;
} gmfoo_run_result;

GMFOO_API const char* gmfoo_version(void);
/* Thread-local; valid until the next failing call on the same thread. */
GMFOO_API const char* gmfoo_last_error(void);
GMFOO_API const char* gmfoo_status_name(gmfoo_status status);
GMFOO_API void gmfoo_string_free(char* s);

/* Experiments (TOML, or JSON when the path ends in .json). */
GMFOO_API gmfoo_status gmfoo_experiment_load(const char* path, gmfoo_experiment** out);
GMFOO_API void gmfoo_experiment_free(gmfoo_experiment* exp);
GMFOO_API gmfoo_status gmfoo_experiment_validate(const gmfoo_experiment* exp, char** report);
/* out_dir NULL selects the configured [run].out. */
GMFOO_API gmfoo_status gmfoo_experiment_run(const gmfoo_experiment* exp, const char* out_dir, size_t jobs,
                                            uint64_t seed_offset, gmfoo_run_result* result);
/* n 0 selects the configured [diagnose].n. */
GMFOO_API gmfoo_status gmfoo_experiment_diagnose(const gmfoo_experiment* exp, const char* out_dir, size_t n,
                                                 double* pearson);

/* gmfoo-net-v1 networks. */
GMFOO_API gmfoo_status gmfoo_network_load(const char* path, gmfoo_network** out);
GMFOO_API void gmfoo_network_free(gmfoo_network* net);
GMFOO_API gmfoo_status gmfoo_network_dims(const gmfoo_network* net, size_t* input_dim, size_t* output_dim);
GMFOO_API gmfoo_status gmfoo_network_forward(const gmfoo_network* net, const double* x, size_t n, double* y,
                                             size_t m);

/* Stateless helpers. */
GMFOO_API gmfoo_status gmfoo_expected_improvement(double mean, double variance, double f_min, double* out);
/* xy holds 192 interleaved (x, y) profile points. */
GMFOO_API gmfoo_status gmfoo_corbel_objective(const double* xy, size_t n, double w1, double w2, double target_x,
                                              double target_y, double density, double gravity, double* out);
GMFOO_API gmfoo_status gmfoo_area_objective(const double* image, size_t n, double threshold, double* out);
/* Row-major n x dim design written to out (n * dim doubles). */
GMFOO_API gmfoo_status gmfoo_lhs(size_t n, size_t dim, const double* lower, const double* upper, uint64_t seed,
                                 double* out);

#ifdef __cplusplus
}
#endif

#endif /* GMFOO_GMFOO_H_ */
