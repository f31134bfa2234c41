// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmfoo/core.hpp"

namespace gmfoo {

/// Hyperparameters of the ARD squared-exponential kernel plus the two noise
/// levels and the cross-fidelity correlation.
struct KernelParams {
  double signal_variance = 1.0;
  Vector length_scales;
  double noise_variance_high = 0.0;
  double noise_variance_low = 0.0;
  double rho = 0.0;

  /// Throws ArgumentError on a violated positivity/interval constraint or a
  /// length-scale count different from dim.
  void validate(std::size_t dim) const;

  static KernelParams isotropic(std::size_t dim, double length_scale, double signal_variance = 1.0,
                                double noise = 0.0);
};

/// sigma_f^2 * exp(-1/2 sum_i (x_i - x2_i)^2 / l_i^2)
double kernel(std::span<const double> x, std::span<const double> x2, const KernelParams& params);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

using Predictor = std::function<Prediction(std::span<const double>)>;

/// Posterior queries for searches that change one coordinate at a time.
/// Model-backed evaluators update squared distances in O(n) per trial and
/// reference the model, which must outlive them.
class CoordinateEvaluator {
 public:
  virtual ~CoordinateEvaluator() = default;
  virtual std::size_t dimension() const = 0;
  /// Moves the base point to x and predicts there.
  virtual Prediction reset(std::span<const double> x) = 0;
  /// Prediction at the base point with coordinate i replaced by v.
  virtual Prediction trial(std::size_t i, double v) = 0;
  /// Makes the most recent trial point the base point.
  virtual void accept() = 0;
};

/// Pointwise fallback: every trial is a full predictor call.
std::unique_ptr<CoordinateEvaluator> make_coordinate_evaluator(Predictor predict, std::size_t dim);

/// Diagonal jitter ladder tried after a failed Cholesky: 1e-10, 1e-9, ..., 1e-4.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterCeiling = 1e-4;

/// Cholesky factor of a symmetric matrix, retrying with growing diagonal
/// jitter. Throws NumericalError once the ceiling is exhausted.
struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};
Factorization factorize_with_jitter(const Eigen::MatrixXd& a);

/// -1/2 y^T (K + s_n^2 I)^{-1} y - 1/2 log det(K + s_n^2 I) - n/2 log 2 pi
/// on raw (unstandardized) outputs, single fidelity.
double log_marginal_likelihood(const std::vector<Vector>& X, std::span<const double> y,
                               const KernelParams& params);

/// Single-fidelity GP posterior. Outputs are standardized internally unless
/// disabled; kernel params always refer to the (possibly) standardized scale.
class GpModel {
 public:
  GpModel(std::vector<Vector> X, Vector y, KernelParams params, bool standardize = true);

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return X_.size(); }
  const KernelParams& params() const { return params_; }
  const std::vector<Vector>& inputs() const { return X_; }
  const Vector& outputs() const { return y_; }
  bool standardized() const { return standardize_; }
  double output_mean() const { return scale_.mean; }
  double output_std() const { return scale_.std; }
  double jitter() const { return jitter_; }

  /// Posterior mean and variance (noise term included) in the raw output scale.
  Prediction predict(std::span<const double> x) const;
  /// Column-wise predict over a dim x m matrix.
  void predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;
  std::unique_ptr<CoordinateEvaluator> coordinate_evaluator() const;
  /// Log marginal likelihood of the standardized outputs.
  double log_likelihood() const { return log_likelihood_; }

  std::string to_json() const;
  static GpModel from_json(std::string_view text);

 private:
  std::size_t dim_;
  std::vector<Vector> X_;
  Vector y_;
  KernelParams params_;
  bool standardize_;
  Standardized scale_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd scaled_inputs_;  // n x dim, inputs divided by the length scales
  Eigen::VectorXd inv_length_;
  Eigen::MatrixXd inv_factor_;  // L^-1, dense with a zero upper triangle
  double jitter_ = 0.0;
  double log_likelihood_ = 0.0;
};

/// Two-fidelity GP with intrinsic coregionalization: the joint prior over
/// [high; low] outputs is [[1, rho], [rho, 1]] (x) K plus per-fidelity noise.
/// Predictions target the high fidelity.
class MfgpModel {
 public:
  MfgpModel(std::vector<Vector> X_high, Vector y_high, std::vector<Vector> X_low, Vector y_low,
            KernelParams params, bool standardize = true);

  std::size_t dimension() const { return dim_; }
  std::size_t size_high() const { return n_high_; }
  std::size_t size_low() const { return X_.size() - n_high_; }
  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }
  double log_likelihood() const { return log_likelihood_; }

  Prediction predict(std::span<const double> x) const;
  /// Column-wise predict over a dim x m matrix.
  void predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;
  std::unique_ptr<CoordinateEvaluator> coordinate_evaluator() const;

  std::string to_json() const;
  static MfgpModel from_json(std::string_view text);

 private:
  std::size_t dim_;
  std::size_t n_high_;
  std::vector<Vector> X_;  // high rows first, then low rows
  Vector y_;
  KernelParams params_;
  bool standardize_;
  Standardized scale_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd scaled_inputs_;  // n x dim, inputs divided by the length scales
  Eigen::VectorXd inv_length_;
  Eigen::MatrixXd inv_factor_;  // L^-1, dense with a zero upper triangle
  Eigen::VectorXd cross_weight_;  // 1 for high rows, rho for low rows
  double jitter_ = 0.0;
  double log_likelihood_ = 0.0;
};

/// Multi-start likelihood maximization settings. Defaults: 5 starts in
/// log-parameter space, 200 likelihood evaluations per start.
struct FitOptions {
  std::size_t starts = 5;
  std::size_t evaluations_per_start = 200;
  /// Pins both noise variances instead of fitting them.
  std::optional<double> fixed_noise;
  /// Pins rho (two-fidelity fits only).
  std::optional<double> fixed_rho;
};

/// Search box of the log-parameters.
struct HyperparameterRanges {
  double log_length_min = -4.605170185988091;  // log 0.01
  double log_length_max = 2.302585092994046;   // log 10
  double log_signal_min = -6.907755278982137;  // log 1e-3
  double log_signal_max = 6.907755278982137;   // log 1e3
  double log_noise_min = -18.420680743952367;  // log 1e-8
  double log_noise_max = -2.302585092994046;   // log 1e-1
  double atanh_rho_min = -3.0;
  double atanh_rho_max = 3.0;
};

GpModel fit_gp(const std::vector<Vector>& X, std::span<const double> y, std::size_t dim, RngSeed seed,
               const FitOptions& options = {});

MfgpModel fit_mfgp(const Dataset& high, const Dataset& low, RngSeed seed,
                   const FitOptions& options = {});

/// Bounded Nelder-Mead minimizer used for the hyperparameter search. Points
/// are clamped into [lower, upper]. Returns the best point and value seen.
struct SimplexResult {
  Vector x;
  double value = 0.0;
  std::size_t evaluations = 0;
};
SimplexResult minimize_simplex(const std::function<double(const Vector&)>& f, Vector start,
                               const Vector& lower, const Vector& upper, std::size_t max_evaluations,
                               double initial_step_fraction = 0.2);

}  // namespace gmfoo
