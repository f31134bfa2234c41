// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace gmfoo {

CurveProfile::CurveProfile(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() != kProfilePoints)
    throw ArgumentError("CurveProfile: expected " + std::to_string(kProfilePoints) + " points, got " +
                        std::to_string(points_.size()));
  for (const auto& p : points_) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) throw ArgumentError("CurveProfile: non-finite coordinate");
  }
}

CurveProfile CurveProfile::from_interleaved(std::span<const double> xy) {
  if (xy.size() != 2 * kProfilePoints)
    throw ArgumentError("CurveProfile: interleaved design must have " + std::to_string(2 * kProfilePoints) +
                        " values, got " + std::to_string(xy.size()));
  std::vector<Point2> pts(kProfilePoints);
  for (std::size_t i = 0; i < kProfilePoints; ++i) pts[i] = {xy[2 * i], xy[2 * i + 1]};
  return CurveProfile(std::move(pts));
}

void CurveProfile::write_csv(std::ostream& os) const {
  os << "x,y\n" << std::setprecision(17);
  for (const auto& p : points_) os << p[0] << ',' << p[1] << '\n';
}

CurveProfile CurveProfile::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,y") throw LoadError("profile CSV: expected header 'x,y'");
  std::vector<Point2> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw LoadError("profile CSV: malformed row '" + line + "'");
    try {
      pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw LoadError("profile CSV: malformed row '" + line + "'");
    }
  }
  try {
    return CurveProfile(std::move(pts));
  } catch (const ArgumentError& e) {
    throw LoadError(e.what());
  }
}

void CorbelConfig::validate() const {
  if (!(w1 >= 0.0) || !(w2 >= 0.0) || !(w1 + w2 > 0.0))
    throw ArgumentError("CorbelConfig: weights must be >= 0 with w1 + w2 > 0");
  if (!(density > 0.0) || !(gravity > 0.0)) throw ArgumentError("CorbelConfig: density and gravity must be > 0");
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool on_segment(const Point2& p, const Point2& a, const Point2& b) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
         p[1] <= std::max(a[1], b[1]);
}

int sign(double v, double tol) { return (v > tol) - (v < -tol); }

bool segments_touch(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  // Orientation tests within rounding of zero count as collinear; straight
  // profiles would otherwise report spurious crossings between their own edges.
  double scale = 0.0;
  for (const auto* p : {&b, &c, &d}) scale = std::max({scale, std::abs((*p)[0] - a[0]), std::abs((*p)[1] - a[1])});
  const double tol = 1e-12 * scale * scale;
  const int d1 = sign(cross(c, d, a), tol);
  const int d2 = sign(cross(c, d, b), tol);
  const int d3 = sign(cross(a, b, c), tol);
  const int d4 = sign(cross(a, b, d), tol);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

std::vector<Point2> closed_region(const CurveProfile& curve) {
  const auto& pts = curve.points();
  std::vector<Point2> ring(pts.begin(), pts.end());
  ring.push_back({0.0, pts.back()[1]});
  ring.push_back({0.0, pts.front()[1]});
  // Drop zero-length edges (curve endpoints already on the wall).
  std::vector<Point2> out;
  for (const auto& p : ring) {
    if (out.empty() || out.back() != p) out.push_back(p);
  }
  while (out.size() > 1 && out.back() == out.front()) out.pop_back();
  return out;
}

}  // namespace

PolygonProperties corbel_region(const CurveProfile& curve) {
  const auto ring = closed_region(curve);
  const std::size_t n = ring.size();
  if (n < 3) throw GeometryError("corbel region: degenerate polygon (area <= 1e-12)");
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % n];
    const double c = p[0] * q[1] - q[0] * p[1];
    a2 += c;
    cx += (p[0] + q[0]) * c;
    cy += (p[1] + q[1]) * c;
  }
  const double area = 0.5 * a2;
  if (std::abs(area) <= 1e-12) throw GeometryError("corbel region: degenerate polygon (area <= 1e-12)");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap-around
      if (segments_touch(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
        throw GeometryError("corbel region: boundary self-intersects (edges " + std::to_string(i) + " and " +
                            std::to_string(j) + ")");
    }
  }
  return {std::abs(area), cx / (3.0 * a2), cy / (3.0 * a2)};
}

double corbel_objective(const CurveProfile& curve, const CorbelConfig& cfg) {
  cfg.validate();
  const auto r = corbel_region(curve);
  const double mass = cfg.density * r.area;
  const double dx = r.cx - cfg.target_centroid[0];
  const double dy = r.cy - cfg.target_centroid[1];
  return cfg.w1 * mass * cfg.gravity * r.cx + cfg.w2 * (dx * dx + dy * dy);
}

double area_objective(std::span<const double> image, double threshold) {
  if (image.size() != kImagePixels)
    throw ArgumentError("area_objective: expected " + std::to_string(kImagePixels) + " pixels, got " +
                        std::to_string(image.size()));
  return -static_cast<double>(std::count_if(image.begin(), image.end(), [&](double v) { return v > threshold; }));
}

double area_threshold_for(Activation output_activation) {
  return output_activation == Activation::Tanh ? 0.0 : 0.5;
}

double Problem::evaluate(std::span<const double> design) const {
  if (design.size() != input_dim)
    throw ArgumentError("problem '" + name + "': design of length " + std::to_string(design.size()) +
                        ", expected " + std::to_string(input_dim));
  double v;
  try {
    v = objective(design);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError("problem '" + name + "': " + e.what());
  }
  if (!std::isfinite(v)) throw EvaluationError("problem '" + name + "': non-finite objective value");
  return v;
}

Problem make_corbel_problem(const CorbelConfig& cfg) {
  cfg.validate();
  return {"corbel", 2 * kProfilePoints, [cfg](std::span<const double> xy) {
            return corbel_objective(CurveProfile::from_interleaved(xy), cfg);
          }};
}

Problem make_area_problem(double threshold) {
  return {"area", kImagePixels, [threshold](std::span<const double> img) { return area_objective(img, threshold); }};
}

Vector fourier_target_coefficients(std::size_t d_high) {
  Vector t(d_high);
  for (std::size_t k = 0; k < d_high; ++k) t[k] = 0.6 * std::sin(1.7 * static_cast<double>(k) + 0.5);
  return t;
}

FourierPair fourier_pair(std::size_t D, std::size_t d_high, std::size_t d_low, FourierObjective objective) {
  if (d_low == 0 || !(d_low < d_high) || 2 * d_high > D)
    throw ArgumentError("fourier_pair: need 0 < d_low < d_high <= D/2 (got D=" + std::to_string(D) +
                        ", d_high=" + std::to_string(d_high) + ", d_low=" + std::to_string(d_low) + ")");
  if (objective == FourierObjective::Corbel && D != 2 * kProfilePoints)
    throw ArgumentError("fourier_pair: the corbel objective needs D = " + std::to_string(2 * kProfilePoints));
  const double pi = std::numbers::pi;
  const double Dp1 = static_cast<double>(D + 1);
  auto mode = [&](std::size_t k, std::size_t j) {
    return std::sin(static_cast<double>(k + 1) * pi * static_cast<double>(j + 1) / Dp1);
  };
  auto amplitude = [](std::size_t k) { return std::ldexp(1.0, -static_cast<int>(k)); };

  DenseLayer gen;
  gen.weights.resize(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(d_high));
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < d_high; ++k)
      gen.weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = amplitude(k) * mode(k, j);
  gen.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(D));
  gen.activation = Activation::Identity;

  // sum_j sin(p pi t_j) sin(q pi t_j) = (D+1)/2 delta_pq on this grid.
  DenseLayer enc;
  enc.weights.resize(static_cast<Eigen::Index>(d_low), static_cast<Eigen::Index>(D));
  for (std::size_t k = 0; k < d_low; ++k)
    for (std::size_t j = 0; j < D; ++j)
      enc.weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          2.0 / Dp1 * mode(k, j) / amplitude(k);
  enc.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_low));
  enc.activation = Activation::Identity;

  const Eigen::MatrixXd projection = enc.weights;
  Network generator(d_high, D, {std::move(gen)});
  Network encoder(D, d_low, {std::move(enc)});
  LatentSpacePair pair(std::move(generator), std::move(encoder));

  FourierPair out{std::move(pair), {}, {}};
  if (objective == FourierObjective::QuadraticTarget) {
    const Vector coeffs = fourier_target_coefficients(d_high);
    Vector target(D, 0.0);
    for (std::size_t j = 0; j < D; ++j) {
      for (std::size_t k = 0; k < d_high; ++k) target[j] += amplitude(k) * coeffs[k] * mode(k, j);
      // component outside the generator's span keeps the minimum above zero
      target[j] += 0.05 * mode(d_high, j);
    }
    out.target = target;
    out.problem = {"fourier-quadratic", D, [target](std::span<const double> y) {
                     double s = 0.0;
                     for (std::size_t j = 0; j < y.size(); ++j) s += (y[j] - target[j]) * (y[j] - target[j]);
                     return s / static_cast<double>(y.size());
                   }};
  } else if (objective == FourierObjective::Subspace) {
    const Vector coeffs = fourier_target_coefficients(d_low);
    out.target = coeffs;
    out.problem = {"fourier-subspace", D, [proj = projection, coeffs](std::span<const double> y) {
                     const Eigen::VectorXd c = proj * Eigen::Map<const Eigen::VectorXd>(y.data(), proj.cols());
                     double s = 0.0;
                     for (std::size_t k = 0; k < coeffs.size(); ++k) {
                       const double d = c(static_cast<Eigen::Index>(k)) - coeffs[k];
                       s += d * d;
                     }
                     return s;
                   }};
  } else {
    const CorbelConfig cfg;
    out.problem = {"fourier-corbel", D, [cfg](std::span<const double> v) {
                     std::vector<Point2> pts(kProfilePoints);
                     for (std::size_t i = 0; i < kProfilePoints; ++i) {
                       pts[i] = {1.5 + 0.5 * v[2 * i], 2.0 * static_cast<double>(i) / (kProfilePoints - 1)};
                     }
                     return corbel_objective(CurveProfile(std::move(pts)), cfg);
                   }};
  }
  return out;
}

void write_pgm(std::ostream& os, std::span<const double> image, std::size_t width, std::size_t height, double lo,
               double hi) {
  if (image.size() != width * height) throw ArgumentError("write_pgm: image size does not match width*height");
  os << "P2\n" << width << ' ' << height << "\n255\n";
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double t = std::clamp((image[r * width + c] - lo) / (hi - lo), 0.0, 1.0);
      os << static_cast<int>(std::lround(t * 255.0)) << (c + 1 == width ? '\n' : ' ');
    }
  }
}

Vector read_pgm(std::istream& is, std::size_t& width, std::size_t& height, double lo, double hi) {
  std::string magic;
  int maxval = 0;
  if (!(is >> magic) || magic != "P2") throw LoadError("PGM: expected P2 header");
  if (!(is >> width >> height >> maxval) || maxval <= 0) throw LoadError("PGM: bad header");
  Vector img(width * height);
  for (auto& v : img) {
    int px;
    if (!(is >> px)) throw LoadError("PGM: truncated pixel data");
    v = lo + (hi - lo) * static_cast<double>(px) / static_cast<double>(maxval);
  }
  return img;
}

}  // namespace gmfoo
