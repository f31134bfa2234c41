// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "flush_denormals.hpp"

namespace gmfoo {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2 pi) / 2

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_inputs(const std::vector<Vector>& X, std::size_t dim, const char* who) {
  for (const auto& x : X) {
    if (x.size() != dim)
      throw ArgumentError(std::string(who) + ": input of length " + std::to_string(x.size()) +
                          ", expected " + std::to_string(dim));
  }
}

double sq_scaled_distance(std::span<const double> a, std::span<const double> b, const Vector& ls) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / ls[i];
    s += d * d;
  }
  return s;
}

void scale_inputs(const std::vector<Vector>& X, const KernelParams& p, MatrixXd& scaled, VectorXd& inv_length) {
  const auto d = static_cast<Eigen::Index>(p.length_scales.size());
  inv_length.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) inv_length(i) = 1.0 / p.length_scales[static_cast<std::size_t>(i)];
  scaled.resize(static_cast<Eigen::Index>(X.size()), d);
  for (std::size_t j = 0; j < X.size(); ++j)
    scaled.row(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const VectorXd>(X[j].data(), d).cwiseProduct(inv_length).transpose();
}

// sigma_f^2 exp(-r^2 / 2) between every stored column and every query
// column; n x m.
MatrixXd cross_covariance(const MatrixXd& points, const MatrixXd& scaled, const VectorXd& inv_length,
                          double signal_variance) {
  MatrixXd k(scaled.rows(), points.cols());
  Eigen::ArrayXd r2(scaled.rows());
  VectorXd q(inv_length.size());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    q = points.col(c).cwiseProduct(inv_length);
    r2.setZero();
    for (Eigen::Index d = 0; d < scaled.cols(); ++d) r2 += (scaled.col(d).array() - q(d)).square();
    k.col(c) = signal_variance * (-0.5 * r2).exp();
  }
  return k;
}

// Posterior given L^-1, weights alpha, prior variance and the noise term
// added to every prediction.
struct PosteriorView {
  const MatrixXd& inv_factor;
  const VectorXd& alpha;
  double prior;
  double noise;
  const Standardized& scale;

  Prediction finish(double mean, double explained) const {
    const double var = std::max(prior - explained, 0.0) + noise;
    return {scale.restore(mean), var * scale.std * scale.std};
  }
};

void posterior(const MatrixXd& k, const PosteriorView& view, VectorXd& mean, VectorXd& variance) {
  mean = k.transpose() * view.alpha;
  const MatrixXd v = view.inv_factor * k;
  variance = v.colwise().squaredNorm().transpose();
  for (Eigen::Index c = 0; c < mean.size(); ++c) {
    const auto p = view.finish(mean(c), variance(c));
    mean(c) = p.mean;
    variance(c) = p.variance;
  }
}

// out = L * k for lower-triangular L, in column panels so the zero upper
// triangle is mostly skipped while each panel stays a dense product.
void lower_times(const MatrixXd& lower, const VectorXd& k, VectorXd& out) {
  constexpr Eigen::Index kPanel = 16;
  const Eigen::Index n = k.size();
  out.setZero(n);
  for (Eigen::Index j = 0; j < n; j += kPanel) {
    const Eigen::Index b = std::min(kPanel, n - j);
    out.tail(n - j).noalias() += lower.block(j, j, n - j, b) * k.segment(j, b);
  }
}

Prediction point_posterior(const VectorXd& k, const PosteriorView& view, VectorXd& work) {
  lower_times(view.inv_factor, k, work);
  return view.finish(k.dot(view.alpha), work.squaredNorm());
}

// Squared scaled distances from x to every stored row.
void squared_distances(std::span<const double> x, const MatrixXd& scaled, const VectorXd& inv_length,
                       Eigen::ArrayXd& r2) {
  r2.setZero(scaled.rows());
  for (Eigen::Index d = 0; d < scaled.cols(); ++d)
    r2 += (scaled.col(d).array() - x[static_cast<std::size_t>(d)] * inv_length(d)).square();
}

class KernelCursor final : public CoordinateEvaluator {
 public:
  KernelCursor(const MatrixXd& scaled, const VectorXd& inv_length, const VectorXd* weight, double signal_variance,
               PosteriorView view)
      : scaled_(scaled), inv_length_(inv_length), weight_(weight), signal_variance_(signal_variance), view_(view),
        x_(static_cast<std::size_t>(scaled.cols()), 0.0) {}

  std::size_t dimension() const override { return x_.size(); }

  Prediction reset(std::span<const double> x) override {
    if (x.size() != x_.size()) throw ArgumentError("CoordinateEvaluator: point of wrong dimension");
    std::copy(x.begin(), x.end(), x_.begin());
    squared_distances(x_, scaled_, inv_length_, r2_);
    trial_i_ = kNoTrial;
    return predict_from(r2_);
  }

  Prediction trial(std::size_t i, double v) override {
    if (i >= x_.size()) throw ArgumentError("CoordinateEvaluator: coordinate out of range");
    const auto c = static_cast<Eigen::Index>(i);
    const auto col = scaled_.col(c).array();
    trial_r2_ = r2_ + (col - v * inv_length_(c)).square() - (col - x_[i] * inv_length_(c)).square();
    trial_i_ = i;
    trial_v_ = v;
    return predict_from(trial_r2_);
  }

  void accept() override {
    if (trial_i_ == kNoTrial) throw ArgumentError("CoordinateEvaluator: no trial to accept");
    x_[trial_i_] = trial_v_;
    // recomputed rather than taken from the trial so rounding does not
    // accumulate along a search path
    squared_distances(x_, scaled_, inv_length_, r2_);
    trial_i_ = kNoTrial;
  }

 private:
  static constexpr std::size_t kNoTrial = std::numeric_limits<std::size_t>::max();

  Prediction predict_from(const Eigen::ArrayXd& r2) {
    k_ = (signal_variance_ * (-0.5 * r2.max(0.0)).exp()).matrix();
    if (weight_) k_.array() *= weight_->array();
    return point_posterior(k_, view_, work_);
  }

  const MatrixXd& scaled_;
  const VectorXd& inv_length_;
  const VectorXd* weight_;
  double signal_variance_;
  PosteriorView view_;
  Vector x_;
  Eigen::ArrayXd r2_, trial_r2_;
  VectorXd k_, work_;
  std::size_t trial_i_ = kNoTrial;
  double trial_v_ = 0.0;
};

class PredictorCursor final : public CoordinateEvaluator {
 public:
  PredictorCursor(Predictor predict, std::size_t dim) : predict_(std::move(predict)), x_(dim, 0.0), trial_(dim) {}

  std::size_t dimension() const override { return x_.size(); }

  Prediction reset(std::span<const double> x) override {
    if (x.size() != x_.size()) throw ArgumentError("CoordinateEvaluator: point of wrong dimension");
    std::copy(x.begin(), x.end(), x_.begin());
    has_trial_ = false;
    return predict_(x_);
  }

  Prediction trial(std::size_t i, double v) override {
    if (i >= x_.size()) throw ArgumentError("CoordinateEvaluator: coordinate out of range");
    trial_ = x_;
    trial_[i] = v;
    has_trial_ = true;
    return predict_(trial_);
  }

  void accept() override {
    if (!has_trial_) throw ArgumentError("CoordinateEvaluator: no trial to accept");
    x_ = trial_;
    has_trial_ = false;
  }

 private:
  Predictor predict_;
  Vector x_, trial_;
  bool has_trial_ = false;
};

void check_batch(const MatrixXd& points, std::size_t dim, const char* who) {
  if (static_cast<std::size_t>(points.rows()) != dim)
    throw ArgumentError(std::string(who) + ": query of length " + std::to_string(points.rows()) +
                        ", model dimension " + std::to_string(dim));
}

double log_det_from_llt(const Eigen::LLT<MatrixXd>& llt) {
  const auto& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

}  // namespace

void KernelParams::validate(std::size_t dim) const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw ArgumentError("KernelParams: signal_variance must be > 0");
  if (length_scales.size() != dim)
    throw ArgumentError("KernelParams: " + std::to_string(length_scales.size()) +
                        " length scales for dimension " + std::to_string(dim));
  for (double l : length_scales) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ArgumentError("KernelParams: length scales must be > 0");
  }
  if (!(noise_variance_high >= 0.0) || !(noise_variance_low >= 0.0))
    throw ArgumentError("KernelParams: noise variances must be >= 0");
  if (!(rho >= -1.0 && rho <= 1.0)) throw ArgumentError("KernelParams: rho must lie in [-1, 1]");
}

KernelParams KernelParams::isotropic(std::size_t dim, double length_scale, double signal_variance,
                                     double noise) {
  KernelParams p;
  p.signal_variance = signal_variance;
  p.length_scales.assign(dim, length_scale);
  p.noise_variance_high = noise;
  p.noise_variance_low = noise;
  return p;
}

double kernel(std::span<const double> x, std::span<const double> x2, const KernelParams& params) {
  if (x.size() != x2.size() || x.size() != params.length_scales.size())
    throw ArgumentError("kernel: dimension mismatch");
  return params.signal_variance * std::exp(-0.5 * sq_scaled_distance(x, x2, params.length_scales));
}

Factorization factorize_with_jitter(const MatrixXd& a) {
  Factorization f;
  f.llt.compute(a);
  if (f.llt.info() == Eigen::Success) return f;
  for (double jitter = kJitterStart; jitter <= kJitterCeiling * 1.0000001; jitter *= 10.0) {
    MatrixXd b = a;
    b.diagonal().array() += jitter;
    f.llt.compute(b);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      return f;
    }
  }
  throw NumericalError("covariance matrix not positive definite after diagonal jitter up to 1e-4");
}

double log_marginal_likelihood(const std::vector<Vector>& X, std::span<const double> y,
                               const KernelParams& params) {
  if (X.empty() || X.size() != y.size())
    throw ArgumentError("log_marginal_likelihood: need matching non-empty X and y");
  const std::size_t dim = X.front().size();
  check_inputs(X, dim, "log_marginal_likelihood");
  params.validate(dim);
  const auto n = static_cast<Eigen::Index>(X.size());
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = kernel(X[i], X[j], params);
    }
    k(i, i) += params.noise_variance_high;
  }
  auto f = factorize_with_jitter(k);
  const VectorXd yv = Eigen::Map<const VectorXd>(y.data(), n);
  const VectorXd alpha = f.llt.solve(yv);
  return -0.5 * yv.dot(alpha) - 0.5 * log_det_from_llt(f.llt) - static_cast<double>(n) * kHalfLog2Pi;
}

// GpModel --------------------------------------------------------------------

GpModel::GpModel(std::vector<Vector> X, Vector y, KernelParams params, bool standardize)
    : X_(std::move(X)), y_(std::move(y)), params_(std::move(params)), standardize_(standardize) {
  if (X_.empty()) throw ArgumentError("GpModel: no training data");
  if (X_.size() != y_.size()) throw ArgumentError("GpModel: X and y sizes differ");
  dim_ = X_.front().size();
  check_inputs(X_, dim_, "GpModel");
  params_.validate(dim_);
  if (standardize_) {
    scale_ = standardize_outputs(y_);
  } else {
    scale_.values = y_;
  }
  const auto n = static_cast<Eigen::Index>(X_.size());
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i) = kernel(X_[i], X_[j], params_);
    k(i, i) = params_.signal_variance + params_.noise_variance_high;
  }
  scale_inputs(X_, params_, scaled_inputs_, inv_length_);
  auto f = factorize_with_jitter(k);
  chol_ = std::move(f.llt);
  jitter_ = f.jitter;
  inv_factor_ = chol_.matrixL().solve(MatrixXd::Identity(n, n));
  const VectorXd yv = Eigen::Map<const VectorXd>(scale_.values.data(), n);
  alpha_ = chol_.solve(yv);
  log_likelihood_ =
      -0.5 * yv.dot(alpha_) - 0.5 * log_det_from_llt(chol_) - static_cast<double>(n) * kHalfLog2Pi;
}

Prediction GpModel::predict(std::span<const double> x) const {
  if (x.size() != dim_)
    throw ArgumentError("gp_predict: query of length " + std::to_string(x.size()) + ", model dimension " +
                        std::to_string(dim_));
  Eigen::ArrayXd r2;
  squared_distances(x, scaled_inputs_, inv_length_, r2);
  const VectorXd k = (params_.signal_variance * (-0.5 * r2).exp()).matrix();
  VectorXd work;
  return point_posterior(k, PosteriorView{inv_factor_, alpha_, params_.signal_variance, params_.noise_variance_high, scale_}, work);
}

void GpModel::predict_batch(const MatrixXd& points, VectorXd& mean, VectorXd& variance) const {
  check_batch(points, dim_, "gp_predict");
  posterior(cross_covariance(points, scaled_inputs_, inv_length_, params_.signal_variance), PosteriorView{inv_factor_, alpha_, params_.signal_variance, params_.noise_variance_high, scale_}, mean,
            variance);
}

std::unique_ptr<CoordinateEvaluator> GpModel::coordinate_evaluator() const {
  return std::make_unique<KernelCursor>(scaled_inputs_, inv_length_, nullptr, params_.signal_variance, PosteriorView{inv_factor_, alpha_, params_.signal_variance, params_.noise_variance_high, scale_});
}

namespace {

nlohmann::json params_to_json(const KernelParams& p) {
  return {{"signal_variance", p.signal_variance},
          {"length_scales", p.length_scales},
          {"noise_variance_high", p.noise_variance_high},
          {"noise_variance_low", p.noise_variance_low},
          {"rho", p.rho}};
}

KernelParams params_from_json(const nlohmann::json& j) {
  KernelParams p;
  p.signal_variance = j.at("signal_variance").get<double>();
  p.length_scales = j.at("length_scales").get<Vector>();
  p.noise_variance_high = j.at("noise_variance_high").get<double>();
  p.noise_variance_low = j.at("noise_variance_low").get<double>();
  p.rho = j.at("rho").get<double>();
  return p;
}

template <typename F>
auto parse_model_json(std::string_view text, const char* who, F&& build) {
  try {
    return build(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string(who) + ": " + e.what());
  }
}

}  // namespace

std::unique_ptr<CoordinateEvaluator> make_coordinate_evaluator(Predictor predict, std::size_t dim) {
  if (!predict) throw ArgumentError("make_coordinate_evaluator: empty predictor");
  return std::make_unique<PredictorCursor>(std::move(predict), dim);
}

std::string GpModel::to_json() const {
  nlohmann::json j = {{"kind", "gp"},
                      {"params", params_to_json(params_)},
                      {"standardize", standardize_},
                      {"X", X_},
                      {"y", y_}};
  return j.dump();
}

GpModel GpModel::from_json(std::string_view text) {
  return parse_model_json(text, "GpModel::from_json", [](const nlohmann::json& j) {
    if (j.at("kind") != "gp") throw LoadError("GpModel::from_json: not a gp model");
    return GpModel(j.at("X").get<std::vector<Vector>>(), j.at("y").get<Vector>(),
                   params_from_json(j.at("params")), j.at("standardize").get<bool>());
  });
}

// MfgpModel ------------------------------------------------------------------

MfgpModel::MfgpModel(std::vector<Vector> X_high, Vector y_high, std::vector<Vector> X_low, Vector y_low,
                     KernelParams params, bool standardize)
    : n_high_(X_high.size()), params_(std::move(params)), standardize_(standardize) {
  if (X_high.empty()) throw ArgumentError("MfgpModel: no high-fidelity data");
  if (X_high.size() != y_high.size() || X_low.size() != y_low.size())
    throw ArgumentError("MfgpModel: X and y sizes differ");
  dim_ = X_high.front().size();
  check_inputs(X_high, dim_, "MfgpModel");
  check_inputs(X_low, dim_, "MfgpModel");
  params_.validate(dim_);
  X_ = std::move(X_high);
  X_.insert(X_.end(), std::make_move_iterator(X_low.begin()), std::make_move_iterator(X_low.end()));
  y_ = std::move(y_high);
  y_.insert(y_.end(), y_low.begin(), y_low.end());
  if (standardize_) {
    scale_ = standardize_outputs(y_);
  } else {
    scale_.values = y_;
  }
  const auto n = static_cast<Eigen::Index>(X_.size());
  const auto nh = static_cast<Eigen::Index>(n_high_);
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double b = ((i < nh) == (j < nh)) ? 1.0 : params_.rho;
      k(i, j) = k(j, i) = b * kernel(X_[i], X_[j], params_);
    }
    k(i, i) = params_.signal_variance + (i < nh ? params_.noise_variance_high : params_.noise_variance_low);
  }
  scale_inputs(X_, params_, scaled_inputs_, inv_length_);
  cross_weight_ = VectorXd::Ones(n);
  cross_weight_.tail(n - nh).setConstant(params_.rho);
  auto f = factorize_with_jitter(k);
  chol_ = std::move(f.llt);
  jitter_ = f.jitter;
  inv_factor_ = chol_.matrixL().solve(MatrixXd::Identity(n, n));
  const VectorXd yv = Eigen::Map<const VectorXd>(scale_.values.data(), n);
  alpha_ = chol_.solve(yv);
  log_likelihood_ =
      -0.5 * yv.dot(alpha_) - 0.5 * log_det_from_llt(chol_) - static_cast<double>(n) * kHalfLog2Pi;
}

Prediction MfgpModel::predict(std::span<const double> x) const {
  if (x.size() != dim_)
    throw ArgumentError("mfgp_predict: query of length " + std::to_string(x.size()) + ", model dimension " +
                        std::to_string(dim_));
  Eigen::ArrayXd r2;
  squared_distances(x, scaled_inputs_, inv_length_, r2);
  const VectorXd k = (params_.signal_variance * (-0.5 * r2).exp() * cross_weight_.array()).matrix();
  VectorXd work;
  return point_posterior(k, PosteriorView{inv_factor_, alpha_, params_.signal_variance, params_.noise_variance_high, scale_}, work);
}

void MfgpModel::predict_batch(const MatrixXd& points, VectorXd& mean, VectorXd& variance) const {
  check_batch(points, dim_, "mfgp_predict");
  MatrixXd k = cross_covariance(points, scaled_inputs_, inv_length_, params_.signal_variance);
  k.array().colwise() *= cross_weight_.array();
  posterior(k, PosteriorView{inv_factor_, alpha_, params_.signal_variance, params_.noise_variance_high, scale_}, mean, variance);
}

std::unique_ptr<CoordinateEvaluator> MfgpModel::coordinate_evaluator() const {
  return std::make_unique<KernelCursor>(scaled_inputs_, inv_length_, &cross_weight_, params_.signal_variance,
                                        PosteriorView{inv_factor_, alpha_, params_.signal_variance, params_.noise_variance_high, scale_});
}

std::string MfgpModel::to_json() const {
  std::vector<Vector> xh(X_.begin(), X_.begin() + static_cast<std::ptrdiff_t>(n_high_));
  std::vector<Vector> xl(X_.begin() + static_cast<std::ptrdiff_t>(n_high_), X_.end());
  Vector yh(y_.begin(), y_.begin() + static_cast<std::ptrdiff_t>(n_high_));
  Vector yl(y_.begin() + static_cast<std::ptrdiff_t>(n_high_), y_.end());
  nlohmann::json j = {{"kind", "mfgp"},
                      {"params", params_to_json(params_)},
                      {"standardize", standardize_},
                      {"X_high", xh},
                      {"y_high", yh},
                      {"X_low", xl},
                      {"y_low", yl}};
  return j.dump();
}

MfgpModel MfgpModel::from_json(std::string_view text) {
  return parse_model_json(text, "MfgpModel::from_json", [](const nlohmann::json& j) {
    if (j.at("kind") != "mfgp") throw LoadError("MfgpModel::from_json: not an mfgp model");
    return MfgpModel(j.at("X_high").get<std::vector<Vector>>(), j.at("y_high").get<Vector>(),
                     j.at("X_low").get<std::vector<Vector>>(), j.at("y_low").get<Vector>(),
                     params_from_json(j.at("params")), j.at("standardize").get<bool>());
  });
}

// Hyperparameter search --------------------------------------------------------

SimplexResult minimize_simplex(const std::function<double(const Vector&)>& f, Vector start,
                               const Vector& lower, const Vector& upper, std::size_t max_evaluations,
                               double initial_step_fraction) {
  const std::size_t n = start.size();
  SimplexResult best{start, std::numeric_limits<double>::infinity(), 0};
  auto clamp = [&](Vector& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };
  auto eval = [&](Vector& x) {
    clamp(x);
    double v = f(x);
    if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
    ++best.evaluations;
    if (v < best.value) {
      best.value = v;
      best.x = x;
    }
    return v;
  };
  auto budget_left = [&] { return best.evaluations < max_evaluations; };

  std::vector<Vector> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  vals[0] = eval(pts[0]);
  for (std::size_t i = 0; i < n && budget_left(); ++i) {
    const double step = initial_step_fraction * (upper[i] - lower[i]);
    pts[i + 1][i] += (pts[i + 1][i] + step <= upper[i]) ? step : -step;
    vals[i + 1] = eval(pts[i + 1]);
  }
  if (!budget_left()) return best;

  std::vector<std::size_t> order(n + 1);
  while (budget_left()) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t worst = order[n];
    const std::size_t second = order[n - 1];
    const std::size_t lowest = order[0];
    Vector centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);
    auto along = [&](double t) {
      Vector x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + t * (pts[worst][i] - centroid[i]);
      return x;
    };
    Vector xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < vals[lowest]) {
      if (!budget_left()) break;
      Vector xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = std::move(xr);
      vals[worst] = fr;
      continue;
    }
    if (!budget_left()) break;
    const bool outside = fr < vals[worst];
    Vector xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = std::move(xc);
      vals[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t k = 0; k <= n && budget_left(); ++k) {
      if (k == lowest) continue;
      for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[lowest][i] + 0.5 * (pts[k][i] - pts[lowest][i]);
      vals[k] = eval(pts[k]);
    }
  }
  return best;
}

namespace {

/// Caches pairwise squared coordinate differences so each likelihood
/// evaluation costs one pass over n^2 d values plus a Cholesky.
class LikelihoodSurface {
 public:
  LikelihoodSurface(const std::vector<Vector>& X, std::size_t n_high, Vector y_std, bool two_fidelity)
      : n_(X.size()), n_high_(n_high), dim_(X.front().size()), two_fidelity_(two_fidelity),
        y_(Eigen::Map<const VectorXd>(y_std.data(), static_cast<Eigen::Index>(y_std.size()))),
        k_(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_)),
        llt_(static_cast<Eigen::Index>(n_)) {
    // column p holds the squared coordinate differences of the p-th pair (i > j)
    diffs_.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(n_ * (n_ - 1) / 2));
    Eigen::Index col = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < i; ++j, ++col) {
        for (std::size_t d = 0; d < dim_; ++d) {
          const double v = X[i][d] - X[j][d];
          diffs_(static_cast<Eigen::Index>(d), col) = v * v;
        }
      }
    }
  }

  std::size_t parameter_count() const { return dim_ + 2 + (two_fidelity_ ? 2 : 0); }

  KernelParams decode(const Vector& theta) const {
    KernelParams p;
    p.length_scales.resize(dim_);
    for (std::size_t d = 0; d < dim_; ++d) p.length_scales[d] = std::exp(theta[d]);
    p.signal_variance = std::exp(theta[dim_]);
    p.noise_variance_high = std::exp(theta[dim_ + 1]);
    if (two_fidelity_) {
      p.noise_variance_low = std::exp(theta[dim_ + 2]);
      p.rho = std::tanh(theta[dim_ + 3]);
    } else {
      p.noise_variance_low = p.noise_variance_high;
      p.rho = 0.0;
    }
    return p;
  }

  /// Median pairwise Euclidean distance, 1 when all inputs coincide.
  double median_distance() const {
    if (diffs_.cols() == 0) return 1.0;
    std::vector<double> d(static_cast<std::size_t>(diffs_.cols()));
    for (Eigen::Index c = 0; c < diffs_.cols(); ++c) d[static_cast<std::size_t>(c)] = std::sqrt(diffs_.col(c).sum());
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0.0 ? *mid : 1.0;
  }

  double log_likelihood(const KernelParams& p) {
    VectorXd inv(static_cast<Eigen::Index>(dim_));
    for (std::size_t d = 0; d < dim_; ++d)
      inv(static_cast<Eigen::Index>(d)) = -0.5 / (p.length_scales[d] * p.length_scales[d]);
    pair_cov_ = p.signal_variance * (inv.transpose() * diffs_).array().exp();
    const auto nh = static_cast<Eigen::Index>(n_high_);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n_); ++i) {
      for (Eigen::Index j = 0; j < i; ++j, ++col) {
        const double b = ((i < nh) == (j < nh)) ? 1.0 : p.rho;
        k_(i, j) = b * pair_cov_(col);
      }
      k_(i, i) = p.signal_variance + (i < nh ? p.noise_variance_high : p.noise_variance_low);
    }
    llt_.compute(k_);  // reads the lower triangle only
    if (llt_.info() != Eigen::Success) {
      try {
        MatrixXd full = k_.selfadjointView<Eigen::Lower>();
        auto f = factorize_with_jitter(full);
        llt_ = std::move(f.llt);
      } catch (const NumericalError&) {
        return -std::numeric_limits<double>::infinity();
      }
    }
    const VectorXd alpha = llt_.solve(y_);
    return -0.5 * y_.dot(alpha) - 0.5 * log_det_from_llt(llt_) - static_cast<double>(n_) * kHalfLog2Pi;
  }

 private:
  std::size_t n_;
  std::size_t n_high_;
  std::size_t dim_;
  bool two_fidelity_;
  VectorXd y_;
  MatrixXd diffs_;
  Eigen::ArrayXd pair_cov_;
  MatrixXd k_;
  Eigen::LLT<MatrixXd> llt_;
};

KernelParams search_hyperparameters(LikelihoodSurface& surface, std::size_t dim, bool two_fidelity,
                                    RngSeed seed, const FitOptions& options) {
  const detail::FlushDenormals ftz;
  const HyperparameterRanges r;
  Vector lo, hi;
  for (std::size_t d = 0; d < dim; ++d) {
    lo.push_back(r.log_length_min);
    hi.push_back(r.log_length_max);
  }
  lo.push_back(r.log_signal_min);
  hi.push_back(r.log_signal_max);
  lo.push_back(r.log_noise_min);
  hi.push_back(r.log_noise_max);
  if (two_fidelity) {
    lo.push_back(r.log_noise_min);
    hi.push_back(r.log_noise_max);
    lo.push_back(r.atanh_rho_min);
    hi.push_back(r.atanh_rho_max);
  }
  // Pinned parameters are removed from the search vector.
  std::vector<std::size_t> free_index;
  const std::size_t total = lo.size();
  auto pinned = [&](std::size_t i) {
    if (options.fixed_noise && (i == dim + 1 || (two_fidelity && i == dim + 2))) return true;
    if (options.fixed_rho && two_fidelity && i == dim + 3) return true;
    return false;
  };
  Vector free_lo, free_hi;
  for (std::size_t i = 0; i < total; ++i) {
    if (!pinned(i)) {
      free_index.push_back(i);
      free_lo.push_back(lo[i]);
      free_hi.push_back(hi[i]);
    }
  }
  auto to_params = [&](const Vector& free) {
    Vector theta(total, 0.0);
    for (std::size_t k = 0; k < free_index.size(); ++k) theta[free_index[k]] = free[k];
    KernelParams p = surface.decode(theta);
    if (options.fixed_noise) {
      p.noise_variance_high = *options.fixed_noise;
      p.noise_variance_low = *options.fixed_noise;
    }
    if (two_fidelity && options.fixed_rho) p.rho = *options.fixed_rho;
    return p;
  };
  auto objective = [&](const Vector& free) { return -surface.log_likelihood(to_params(free)); };

  // Start 0 is the median-distance heuristic: isotropic length scale equal to
  // the median pairwise distance, unit signal variance. In higher dimensions
  // most box points have some tiny length scale, which makes every start
  // a flat white-noise fit; the heuristic start avoids that plateau.
  Vector heuristic(total);
  for (std::size_t d = 0; d < dim; ++d) heuristic[d] = std::log(surface.median_distance());
  heuristic[dim] = 0.0;
  heuristic[dim + 1] = std::log(1e-4);
  if (two_fidelity) {
    heuristic[dim + 2] = std::log(1e-4);
    heuristic[dim + 3] = 0.5;
  }
  std::vector<Vector> starts;
  Vector h0;
  for (std::size_t k = 0; k < free_index.size(); ++k)
    h0.push_back(std::clamp(heuristic[free_index[k]], free_lo[k], free_hi[k]));
  starts.push_back(std::move(h0));
  if (options.starts > 1) {
    auto rest = lhs_sample(options.starts - 1, Bounds(free_lo, free_hi), seed);
    starts.insert(starts.end(), rest.begin(), rest.end());
  }
  SimplexResult best{starts.front(), std::numeric_limits<double>::infinity(), 0};
  for (const auto& s : starts) {
    auto res = minimize_simplex(objective, s, free_lo, free_hi, options.evaluations_per_start);
    if (res.value < best.value) best = std::move(res);
  }
  if (!std::isfinite(best.value) || best.value >= std::numeric_limits<double>::max())
    throw NumericalError("hyperparameter search: no start produced a factorizable covariance "
                         "(jitter ceiling 1e-4)");
  return to_params(best.x);
}

}  // namespace

GpModel fit_gp(const std::vector<Vector>& X, std::span<const double> y, std::size_t dim, RngSeed seed,
               const FitOptions& options) {
  if (X.size() < 2) throw ArgumentError("fit_gp: need at least 2 samples");
  if (X.size() != y.size()) throw ArgumentError("fit_gp: X and y sizes differ");
  check_inputs(X, dim, "fit_gp");
  auto scaled = standardize_outputs(y);
  LikelihoodSurface surface(X, X.size(), scaled.values, false);
  KernelParams p = search_hyperparameters(surface, dim, false, seed, options);
  return GpModel(X, Vector(y.begin(), y.end()), p, true);
}

MfgpModel fit_mfgp(const Dataset& high, const Dataset& low, RngSeed seed, const FitOptions& options) {
  if (high.size() < 2) throw ArgumentError("fit_mfgp: need at least 2 high-fidelity samples");
  if (high.dimension() != low.dimension()) throw ArgumentError("fit_mfgp: dimension mismatch");
  const std::size_t dim = high.dimension();
  std::vector<Vector> xh, xl;
  Vector yh, yl;
  for (const auto& s : high.samples()) {
    xh.push_back(s.x);
    yh.push_back(s.y);
  }
  for (const auto& s : low.samples()) {
    xl.push_back(s.x);
    yl.push_back(s.y);
  }
  std::vector<Vector> all = xh;
  all.insert(all.end(), xl.begin(), xl.end());
  Vector ys = yh;
  ys.insert(ys.end(), yl.begin(), yl.end());
  auto scaled = standardize_outputs(ys);
  const bool two = !xl.empty();
  LikelihoodSurface surface(all, xh.size(), scaled.values, two);
  KernelParams p = search_hyperparameters(surface, dim, two, seed, options);
  return MfgpModel(std::move(xh), std::move(yh), std::move(xl), std::move(yl), p, true);
}

}  // namespace gmfoo
