// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace gmfoo {

Bounds::Bounds(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw ArgumentError("Bounds: dimension must be >= 1");
  if (lower_.size() != upper_.size())
    throw ArgumentError("Bounds: lower has " + std::to_string(lower_.size()) +
                        " entries but upper has " + std::to_string(upper_.size()));
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i]))
      throw ArgumentError("Bounds: need lower < upper in dimension " + std::to_string(i));
  }
}

Bounds Bounds::uniform(std::size_t dim, double lo, double hi) {
  return Bounds(Vector(dim, lo), Vector(dim, hi));
}

bool Bounds::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  }
  return true;
}

Vector Bounds::clamp(std::span<const double> x) const {
  if (x.size() != dim()) throw ArgumentError("Bounds::clamp: dimension mismatch");
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = std::clamp(out[i], lower_[i], upper_[i]);
  return out;
}

std::string_view to_string(Fidelity f) { return f == Fidelity::High ? "high" : "low"; }

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::DoE: return "doe";
    case Origin::EiQuery: return "ei";
    case Origin::NarrowedQuery: return "narrowed";
    case Origin::Exchanged: return "exchanged";
  }
  return "doe";
}

Fidelity fidelity_from_string(std::string_view s) {
  if (s == "high") return Fidelity::High;
  if (s == "low") return Fidelity::Low;
  throw ArgumentError("unknown fidelity '" + std::string(s) + "'");
}

Origin origin_from_string(std::string_view s) {
  if (s == "doe") return Origin::DoE;
  if (s == "ei") return Origin::EiQuery;
  if (s == "narrowed") return Origin::NarrowedQuery;
  if (s == "exchanged") return Origin::Exchanged;
  throw ArgumentError("unknown origin '" + std::string(s) + "'");
}

bool same_point(std::span<const double> a, std::span<const double> b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

// Dataset --------------------------------------------------------------------

Dataset::Dataset(Bounds bounds) : bounds_(std::move(bounds)) {}

void Dataset::add(Sample s) {
  if (s.x.size() != dimension())
    throw ArgumentError("Dataset::add: sample has " + std::to_string(s.x.size()) +
                        " coordinates, dataset dimension is " + std::to_string(dimension()));
  if (!std::isfinite(s.y)) throw ArgumentError("Dataset::add: non-finite objective value");
  if (!bounds_.contains(s.x)) throw ArgumentError("Dataset::add: sample outside bounds");
  if (s.fidelity == Fidelity::High && contains(s.x, Fidelity::High))
    throw ArgumentError("Dataset::add: duplicate high-fidelity point");
  samples_.push_back(std::move(s));
}

bool Dataset::contains(std::span<const double> x, Fidelity fidelity) const {
  return std::any_of(samples_.begin(), samples_.end(), [&](const Sample& s) {
    return s.fidelity == fidelity && same_point(s.x, x);
  });
}

std::size_t Dataset::count(Fidelity f) const {
  return static_cast<std::size_t>(std::count_if(
      samples_.begin(), samples_.end(), [f](const Sample& s) { return s.fidelity == f; }));
}

Dataset Dataset::filter(Fidelity f) const {
  Dataset out(bounds_);
  for (const auto& s : samples_) {
    if (s.fidelity == f) out.samples_.push_back(s);
  }
  return out;
}

std::optional<Sample> Dataset::best(Fidelity f) const {
  std::optional<Sample> out;
  for (const auto& s : samples_) {
    if (s.fidelity == f && (!out || s.y < out->y)) out = s;
  }
  return out;
}

std::optional<double> Dataset::min_y() const {
  std::optional<double> out;
  for (const auto& s : samples_) {
    if (!out || s.y < *out) out = s.y;
  }
  return out;
}

void Dataset::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < dimension(); ++i) os << 'x' << i << ',';
  os << "y,fidelity,origin\n";
  os << std::setprecision(17);
  for (const auto& s : samples_) {
    for (double v : s.x) os << v << ',';
    os << s.y << ',' << to_string(s.fidelity) << ',' << to_string(s.origin) << '\n';
  }
}

void Dataset::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_csv(os);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw LoadError("dataset CSV row " + std::to_string(row) + ": bad number '" + s + "'");
  }
}

}  // namespace

Dataset Dataset::read_csv(std::istream& is, const Bounds& bounds) {
  Dataset ds(bounds);
  const std::size_t d = bounds.dim();
  std::string line;
  if (!std::getline(is, line)) throw LoadError("dataset CSV: missing header");
  auto header = split_csv_line(line);
  if (header.size() != d + 3) throw LoadError("dataset CSV: header does not match dimension");
  for (std::size_t i = 0; i < d; ++i) {
    if (header[i] != "x" + std::to_string(i)) throw LoadError("dataset CSV: bad header column " + header[i]);
  }
  if (header[d] != "y" || header[d + 1] != "fidelity" || header[d + 2] != "origin")
    throw LoadError("dataset CSV: bad header");
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != d + 3) throw LoadError("dataset CSV row " + std::to_string(row) + ": wrong column count");
    Sample s;
    s.x.resize(d);
    for (std::size_t i = 0; i < d; ++i) s.x[i] = parse_double(cells[i], row);
    s.y = parse_double(cells[d], row);
    try {
      s.fidelity = fidelity_from_string(cells[d + 1]);
      s.origin = origin_from_string(cells[d + 2]);
      ds.add(std::move(s));
    } catch (const ArgumentError& e) {
      throw LoadError("dataset CSV row " + std::to_string(row) + ": " + e.what());
    }
  }
  return ds;
}

Dataset Dataset::load_csv(const std::string& path, const Bounds& bounds) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_csv(is, bounds);
}

// RNG ------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_tag(std::string_view tag) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngSeed derive_seed(RngSeed base, std::string_view tag, std::uint64_t index) {
  return RngSeed{mix_seed(mix_seed(base.value, hash_tag(tag)), index)};
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(RngSeed seed) {
  std::uint64_t x = seed.value;
  for (auto& s : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    s = z ^ (z >> 31);
  }
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ArgumentError("Rng::below: n must be positive");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t r;
  do {
    r = next();
  } while (r >= limit);
  return r % n;
}

Vector Rng::uniform_point(const Bounds& bounds) {
  Vector x(bounds.dim());
  for (std::size_t i = 0; i < bounds.dim(); ++i) x[i] = uniform(bounds.lower()[i], bounds.upper()[i]);
  return x;
}

// Design of experiments --------------------------------------------------------

std::vector<Vector> lhs_sample(std::size_t n, const Bounds& bounds, RngSeed seed) {
  if (n == 0) throw ArgumentError("lhs_sample: n must be >= 1");
  const std::size_t d = bounds.dim();
  Rng rng(seed);
  std::vector<Vector> points(n, Vector(d));
  std::vector<std::size_t> perm(n);
  // Offsets stay this far inside each bin so round-off never moves a point
  // across a bin edge.
  constexpr double kEdge = 1e-9;
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    const double lo = bounds.lower()[j];
    const double w = bounds.width(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = kEdge + (1.0 - 2.0 * kEdge) * rng.uniform();
      const double t = (static_cast<double>(perm[i]) + u) / static_cast<double>(n);
      points[i][j] = lo + w * t;
    }
  }
  return points;
}

Standardized standardize_outputs(std::span<const double> ys) {
  if (ys.empty()) throw ArgumentError("standardize_outputs: empty input");
  const double n = static_cast<double>(ys.size());
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= n;
  double var = 0.0;
  for (double y : ys) var += (y - mean) * (y - mean);
  var /= n;
  Standardized out;
  out.mean = mean;
  out.std = std::max(std::sqrt(var), kMinStd);
  out.values.reserve(ys.size());
  for (double y : ys) out.values.push_back((y - mean) / out.std);
  return out;
}

}  // namespace gmfoo
