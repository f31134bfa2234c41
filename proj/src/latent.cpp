// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/latent.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gmfoo {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "identity") return Activation::Identity;
  throw LoadError("unknown activation '" + std::string(s) + "'");
}

Network::Network(std::size_t input_dim, std::size_t output_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), output_dim_(output_dim), layers_(std::move(layers)) {
  if (layers_.empty()) throw LoadError("network has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0)
      throw LoadError("layer " + std::to_string(i) + " has an empty weight matrix");
    if (l.bias.size() != l.weights.rows())
      throw LoadError("layer " + std::to_string(i) + ": bias length " + std::to_string(l.bias.size()) +
                      " does not match " + std::to_string(l.weights.rows()) + " rows");
    if (i > 0 && layers_[i - 1].weights.rows() != l.weights.cols()) {
      throw LoadError("dimension mismatch between layer " + std::to_string(i - 1) + " (" +
                      std::to_string(layers_[i - 1].weights.cols()) + "->" +
                      std::to_string(layers_[i - 1].weights.rows()) + ") and layer " + std::to_string(i) +
                      " (" + std::to_string(l.weights.cols()) + "->" + std::to_string(l.weights.rows()) + ")");
    }
  }
  if (static_cast<std::size_t>(layers_.front().weights.cols()) != input_dim_)
    throw LoadError("declared input_dim " + std::to_string(input_dim_) + " does not match layer 0 (" +
                    std::to_string(layers_.front().weights.cols()) + " columns)");
  if (static_cast<std::size_t>(layers_.back().weights.rows()) != output_dim_)
    throw LoadError("declared output_dim " + std::to_string(output_dim_) + " does not match layer " +
                    std::to_string(layers_.size() - 1) + " (" + std::to_string(layers_.back().weights.rows()) +
                    " rows)");
}

std::string Network::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())},
                      {"activation", std::string(to_string(l.activation))}});
  }
  nlohmann::json j = {{"format", "gmfoo-net-v1"},
                      {"input_dim", input_dim_},
                      {"output_dim", output_dim_},
                      {"layers", layers}};
  return j.dump();
}

void Network::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << to_json() << '\n';
}

Network parse_network(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(std::string("network JSON parse error: ") + e.what());
  }
  try {
    if (!j.is_object()) throw LoadError("network JSON: top level must be an object");
    if (!j.contains("format") || j.at("format") != "gmfoo-net-v1")
      throw LoadError("network JSON: missing or unsupported \"format\" (expected gmfoo-net-v1)");
    const auto in = j.at("input_dim").get<std::size_t>();
    const auto out = j.at("output_dim").get<std::size_t>();
    std::vector<DenseLayer> layers;
    std::size_t idx = 0;
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("weights").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      if (rows <= 0 || cols <= 0) throw LoadError("layer " + std::to_string(idx) + ": rows/cols must be positive");
      if (w.size() != static_cast<std::size_t>(rows * cols))
        throw LoadError("layer " + std::to_string(idx) + ": expected " + std::to_string(rows * cols) +
                        " weights, found " + std::to_string(w.size()));
      DenseLayer layer;
      layer.weights.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
      layer.activation = activation_from_string(lj.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
      ++idx;
    }
    return Network(in, out, std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("network JSON schema error: ") + e.what());
  }
}

Network load_network(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open network file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_network(ss.str());
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

Vector forward(const Network& net, std::span<const double> input) {
  if (input.size() != net.input_dim())
    throw ArgumentError("forward: input of length " + std::to_string(input.size()) + ", network expects " +
                        std::to_string(net.input_dim()));
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (const auto& l : net.layers()) {
    Eigen::VectorXd a = l.weights * h + l.bias;
    switch (l.activation) {
      case Activation::Relu: a = a.cwiseMax(0.0); break;
      case Activation::Tanh: a = a.array().tanh(); break;
      case Activation::Sigmoid: a = (1.0 + (-a.array()).exp()).inverse(); break;
      case Activation::Identity: break;
    }
    h = std::move(a);
  }
  if (!h.allFinite()) throw NumericalError("forward: non-finite network output");
  return Vector(h.data(), h.data() + h.size());
}

LatentSpacePair::LatentSpacePair(Network generator, Network encoder)
    : LatentSpacePair(generator, encoder, Bounds::uniform(generator.input_dim()),
                      Bounds::uniform(encoder.output_dim())) {}

LatentSpacePair::LatentSpacePair(Network generator, Network encoder, Bounds bounds_high, Bounds bounds_low)
    : generator_(std::move(generator)), encoder_(std::move(encoder)), bounds_high_(std::move(bounds_high)),
      bounds_low_(std::move(bounds_low)) {
  if (!(d_low() < d_high()))
    throw ArgumentError("LatentSpacePair: d_low (" + std::to_string(d_low()) + ") must be < d_high (" +
                        std::to_string(d_high()) + ")");
  if (encoder_.input_dim() != generator_.output_dim())
    throw ArgumentError("LatentSpacePair: encoder input " + std::to_string(encoder_.input_dim()) +
                        " does not match generator output " + std::to_string(generator_.output_dim()));
  if (bounds_high_.dim() != d_high() || bounds_low_.dim() != d_low())
    throw ArgumentError("LatentSpacePair: bounds dimensions do not match the networks");
}

Vector LatentSpacePair::generate_low(std::span<const double> c) const {
  return generate(embed_low_to_high(c, d_high()));
}

Vector embed_low_to_high(std::span<const double> c, std::size_t d_high) {
  if (c.empty()) throw ArgumentError("embed_low_to_high: empty low-dimensional vector");
  if (c.size() >= d_high)
    throw ArgumentError("embed_low_to_high: low vector of length " + std::to_string(c.size()) +
                        " must be shorter than d_high " + std::to_string(d_high));
  Vector z(d_high, 0.0);
  std::copy(c.begin(), c.end(), z.begin());
  return z;
}

Vector project_high_to_low(std::span<const double> z, const LatentSpacePair& pair) {
  if (z.size() != pair.d_high())
    throw ArgumentError("project_high_to_low: z of length " + std::to_string(z.size()) + ", expected " +
                        std::to_string(pair.d_high()));
  const auto c = forward(pair.encoder(), pair.generate(z));
  return pair.bounds_low().clamp(c);
}

double pearson(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw ArgumentError("pearson: need at least 2 pairs");
  const double n = static_cast<double>(pairs.size());
  double ma = 0.0, mb = 0.0;
  for (const auto& [a, b] : pairs) {
    ma += a;
    mb += b;
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (const auto& [a, b] : pairs) {
    sab += (a - ma) * (b - mb);
    saa += (a - ma) * (a - ma);
    sbb += (b - mb) * (b - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) throw NumericalError("pearson: zero variance in one pair member");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

PearsonReport correlation_report(const LatentSpacePair& pair, const Objective& objective, std::size_t n,
                                 RngSeed seed) {
  if (n < 3) throw ArgumentError("correlation_report: n must be >= 3");
  Rng rng(seed);
  PearsonReport report;
  report.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector z = rng.uniform_point(pair.bounds_high());
    const double yz = objective(pair.generate(z));
    const Vector c = project_high_to_low(z, pair);
    const double yc = objective(pair.generate_low(c));
    report.pairs.emplace_back(yz, yc);
  }
  report.n_pairs = n;
  report.pearson = pearson(report.pairs);
  return report;
}

}  // namespace gmfoo
