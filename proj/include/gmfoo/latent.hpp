// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmfoo/core.hpp"

namespace gmfoo {

enum class Activation { Relu, Tanh, Sigmoid, Identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

struct DenseLayer {
  Eigen::MatrixXd weights;  // rows = outputs
  Eigen::VectorXd bias;
  Activation activation = Activation::Identity;
};

/// Immutable feed-forward network, as exported by the trainer in the
/// `gmfoo-net-v1` JSON format.
class Network {
 public:
  /// Validates that layer shapes chain; throws LoadError naming the layers.
  Network(std::size_t input_dim, std::size_t output_dim, std::vector<DenseLayer> layers);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  Activation output_activation() const { return layers_.back().activation; }

  std::string to_json() const;
  void save(const std::string& path) const;

 private:
  std::size_t input_dim_;
  std::size_t output_dim_;
  std::vector<DenseLayer> layers_;
};

Network parse_network(std::string_view json_text);
Network load_network(const std::string& path);

/// Affine + activation per layer. Throws ArgumentError on a length mismatch
/// and NumericalError on non-finite output.
Vector forward(const Network& net, std::span<const double> input);

/// Generator/encoder pair over one high- and one low-dimensional latent space.
/// The low space is the leading d_low coordinates of z = [c, z*].
class LatentSpacePair {
 public:
  LatentSpacePair(Network generator, Network encoder);
  LatentSpacePair(Network generator, Network encoder, Bounds bounds_high, Bounds bounds_low);

  std::size_t d_high() const { return generator_.input_dim(); }
  std::size_t d_low() const { return encoder_.output_dim(); }
  std::size_t design_dim() const { return generator_.output_dim(); }
  const Network& generator() const { return generator_; }
  const Network& encoder() const { return encoder_; }
  const Bounds& bounds_high() const { return bounds_high_; }
  const Bounds& bounds_low() const { return bounds_low_; }

  Vector generate(std::span<const double> z) const { return forward(generator_, z); }
  /// g([c, 0]).
  Vector generate_low(std::span<const double> c) const;

 private:
  Network generator_;
  Network encoder_;
  Bounds bounds_high_;
  Bounds bounds_low_;
};

/// z = [c, 0, ..., 0] of length d_high.
Vector embed_low_to_high(std::span<const double> c, std::size_t d_high);

/// c' = encoder(generator(z)), clamped into bounds_low.
Vector project_high_to_low(std::span<const double> z, const LatentSpacePair& pair);

using Objective = std::function<double(std::span<const double>)>;

struct PearsonReport {
  std::size_t n_pairs = 0;
  double pearson = 0.0;
  std::vector<std::pair<double, double>> pairs;  // (y(z), y(c'))
};

/// Product-moment correlation; throws NumericalError on zero variance.
double pearson(std::span<const std::pair<double, double>> pairs);

/// Draws n z uniformly in bounds_high and pairs y(z) = f(g(z)) with
/// y(c') = f(g([c', 0])), c' the projection of z.
PearsonReport correlation_report(const LatentSpacePair& pair, const Objective& objective, std::size_t n,
                                 RngSeed seed);

}  // namespace gmfoo
