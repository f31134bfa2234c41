// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace gmfoo {

std::string_view to_string(SubTask t) {
  switch (t) {
    case SubTask::High: return "high";
    case SubTask::Low: return "low";
    case SubTask::Narrowed: return "narrowed";
  }
  return "high";
}

SubTask subtask_from_string(std::string_view s) {
  if (s == "high") return SubTask::High;
  if (s == "low") return SubTask::Low;
  if (s == "narrowed") return SubTask::Narrowed;
  throw ArgumentError("unknown sub-task '" + std::string(s) + "'");
}

// Narrowed box ---------------------------------------------------------------

bool NarrowedBox::degenerate() const {
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) return true;
  }
  return false;
}

bool NarrowedBox::contains(std::span<const double> x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

Bounds NarrowedBox::bounds() const {
  if (degenerate()) throw ArgumentError("NarrowedBox: degenerate box has no interior");
  return Bounds(lower, upper);
}

NarrowedBox narrowed_box(std::span<const double> c_min, double delta, const Bounds& bounds_high,
                         std::size_t d_high) {
  if (bounds_high.dim() != d_high) throw ArgumentError("narrowed_box: bounds do not match d_high");
  if (!(delta >= 0.0)) throw ArgumentError("narrowed_box: delta must be >= 0");
  const Vector center = embed_low_to_high(c_min, d_high);
  NarrowedBox box{Vector(d_high), Vector(d_high)};
  for (std::size_t i = 0; i < d_high; ++i) {
    const double half = delta * bounds_high.width(i) / 2.0;
    box.lower[i] = std::max(bounds_high.lower()[i], center[i] - half);
    box.upper[i] = std::min(bounds_high.upper()[i], center[i] + half);
  }
  return box;
}

// Sample exchange ---------------------------------------------------------------

KnowledgeBase exchange_samples(const Dataset& high_ds, const Dataset& low_ds, const LatentSpacePair& pair) {
  if (high_ds.dimension() != pair.d_high() || low_ds.dimension() != pair.d_low())
    throw ArgumentError("exchange_samples: dataset dimensions do not match the latent pair");
  KnowledgeBase kb{low_ds.best(Fidelity::High), Dataset(high_ds.bounds()), Dataset(low_ds.bounds())};
  for (const auto& s : low_ds.samples()) {
    if (s.fidelity != Fidelity::High) continue;
    Vector z = embed_low_to_high(s.x, pair.d_high());
    if (high_ds.contains(z, Fidelity::Low) || kb.exchanged_to_high.contains(z, Fidelity::Low)) continue;
    kb.exchanged_to_high.add({std::move(z), s.y, Fidelity::Low, Origin::Exchanged});
  }
  for (const auto& s : high_ds.samples()) {
    if (s.fidelity != Fidelity::High) continue;
    Vector c = project_high_to_low(s.x, pair);
    if (low_ds.contains(c, Fidelity::Low) || kb.exchanged_to_low.contains(c, Fidelity::Low)) continue;
    kb.exchanged_to_low.add({std::move(c), s.y, Fidelity::Low, Origin::Exchanged});
  }
  return kb;
}

// RunLog ------------------------------------------------------------------------

double RunLog::final_best() const {
  if (records.empty()) return std::numeric_limits<double>::infinity();
  return records.back().best_so_far;
}

double RunLog::best_after(std::size_t evaluations) const {
  if (evaluations == 0 || records.empty()) return std::numeric_limits<double>::infinity();
  return records[std::min(evaluations, records.size()) - 1].best_so_far;
}

std::vector<std::size_t> RunLog::evaluations_per_iteration() const {
  std::vector<std::size_t> out;
  for (const auto& r : records) {
    if (r.iteration >= out.size()) out.resize(r.iteration + 1, 0);
    ++out[r.iteration];
  }
  return out;
}

std::string RunLog::to_json() const {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j = {{"evaluation", r.evaluation}, {"iteration", r.iteration},
                        {"subtask", std::string(to_string(r.subtask))},
                        {"origin", std::string(to_string(r.origin))},
                        {"x", r.x}, {"y", r.y}, {"best_so_far", r.best_so_far}};
    if (r.box) j["box"] = {{"lower", r.box->lower}, {"upper", r.box->upper}};
    recs.push_back(std::move(j));
  }
  nlohmann::json j = {{"algorithm", algorithm}, {"seed", seed}, {"config", cfg}, {"records", recs}};
  j["error"] = error ? nlohmann::json(*error) : nlohmann::json(nullptr);
  return j.dump(1);
}

RunLog RunLog::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunLog log;
    log.algorithm = j.at("algorithm").get<std::string>();
    log.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("config").items()) log.config.emplace_back(k, v.get<std::string>());
    for (const auto& rj : j.at("records")) {
      RunRecord r;
      r.evaluation = rj.at("evaluation").get<std::size_t>();
      r.iteration = rj.at("iteration").get<std::size_t>();
      r.subtask = subtask_from_string(rj.at("subtask").get<std::string>());
      r.origin = origin_from_string(rj.at("origin").get<std::string>());
      r.x = rj.at("x").get<Vector>();
      r.y = rj.at("y").get<double>();
      r.best_so_far = rj.at("best_so_far").get<double>();
      if (rj.contains("box"))
        r.box = NarrowedBox{rj["box"].at("lower").get<Vector>(), rj["box"].at("upper").get<Vector>()};
      log.records.push_back(std::move(r));
    }
    if (!j.at("error").is_null()) log.error = j.at("error").get<std::string>();
    return log;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("run log JSON: ") + e.what());
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("run log JSON: ") + e.what());
  }
}

void RunLog::write_csv(std::ostream& os) const {
  os << "iteration,subtask,y,best_so_far\n" << std::setprecision(17);
  for (const auto& r : records) os << r.iteration << ',' << to_string(r.subtask) << ',' << r.y << ',' << r.best_so_far << '\n';
}

void RunLog::write_timing_csv(std::ostream& os) const {
  os << "evaluation,iteration,subtask,wall_seconds\n" << std::setprecision(9);
  for (const auto& r : records)
    os << r.evaluation << ',' << r.iteration << ',' << to_string(r.subtask) << ',' << r.wall_seconds << '\n';
}

// Shared run machinery -----------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

/// Appends records, enforces the budget and keeps best-so-far.
class Recorder {
 public:
  Recorder(RunLog& log, std::size_t budget) : log_(log), budget_(budget), last_(Clock::now()) {}

  bool budget_left() const { return log_.records.size() < budget_; }

  void record(std::size_t iteration, SubTask subtask, Origin origin, const Vector& x, double y,
              std::optional<NarrowedBox> box = std::nullopt) {
    const auto now = Clock::now();
    RunRecord r;
    r.evaluation = log_.records.size() + 1;
    r.iteration = iteration;
    r.subtask = subtask;
    r.origin = origin;
    r.x = x;
    r.y = y;
    r.best_so_far = log_.records.empty() ? y : std::min(y, log_.records.back().best_so_far);
    r.box = std::move(box);
    r.wall_seconds = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    log_.records.push_back(std::move(r));
  }

 private:
  using Clock = std::chrono::steady_clock;
  RunLog& log_;
  std::size_t budget_;
  Clock::time_point last_;
};

/// Replaces a proposal that coincides with an evaluated point by a uniform
/// draw, since a repeated input would make the covariance singular.
Vector deduplicate(Vector x, const Dataset& ds, Rng& rng, const Vector& lo, const Vector& hi) {
  for (int attempt = 0; attempt < 100 && ds.contains(x, Fidelity::High); ++attempt) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
  }
  return x;
}

struct Columns {
  std::vector<Vector> X;
  Vector y;
};

Columns columns(const Dataset& ds, Fidelity f) {
  Columns c;
  for (const auto& s : ds.samples()) {
    if (s.fidelity != f) continue;
    c.X.push_back(s.x);
    c.y.push_back(s.y);
  }
  return c;
}

MfgpModel condition_mfgp(const Dataset& ds, const KernelParams& params) {
  auto hi = columns(ds, Fidelity::High);
  auto lo = columns(ds, Fidelity::Low);
  return MfgpModel(std::move(hi.X), std::move(hi.y), std::move(lo.X), std::move(lo.y), params, true);
}

std::size_t resolve_restarts(std::size_t configured, std::size_t dim) {
  return configured ? configured : default_restarts(dim);
}

}  // namespace

RunLog run_standard_bo(const Problem& problem, const SearchSpace& space, const BoConfig& config,
                       std::string algorithm) {
  if (!space.decode) throw ArgumentError("run_standard_bo: search space has no decoder");
  if (config.doe_size < 1) throw ArgumentError("run_standard_bo: doe_size must be >= 1");
  if (config.budget < config.doe_size) throw ArgumentError("run_standard_bo: budget smaller than the DoE");
  if (config.budget > config.doe_size && config.doe_size < 2)
    throw ArgumentError("run_standard_bo: need a DoE of at least 2 points to fit a surrogate");
  const std::size_t dim = space.bounds.dim();
  const std::size_t restarts = resolve_restarts(config.ei_restarts, dim);

  RunLog log;
  log.algorithm = std::move(algorithm);
  log.seed = config.seed.value;
  log.config = {{"budget", std::to_string(config.budget)},
                {"dimension", std::to_string(dim)},
                {"doe_size", std::to_string(config.doe_size)},
                {"ei_restarts", std::to_string(restarts)},
                {"problem", problem.name}};
  Recorder rec(log, config.budget);
  Dataset ds(space.bounds);
  Rng fallback(derive_seed(config.seed, "fallback"));
  auto evaluate = [&](const Vector& x) { return problem.evaluate(space.decode(x)); };

  try {
    for (const auto& x : lhs_sample(config.doe_size, space.bounds, derive_seed(config.seed, "doe"))) {
      const double y = evaluate(x);
      ds.add({x, y, Fidelity::High, Origin::DoE});
      rec.record(0, space.subtask, Origin::DoE, x, y);
    }
    for (std::size_t iter = 1; rec.budget_left(); ++iter) {
      const auto cols = columns(ds, Fidelity::High);
      const auto model = fit_gp(cols.X, cols.y, dim, derive_seed(config.seed, "fit", iter), config.fit);
      const double f_min = *ds.min_y();
      const auto q = maximize_ei(*model.coordinate_evaluator(), space.bounds, f_min,
                                 restarts, derive_seed(config.seed, "ei", iter));
      const Vector x = deduplicate(q.point, ds, fallback, space.bounds.lower(), space.bounds.upper());
      const double y = evaluate(x);
      ds.add({x, y, Fidelity::High, Origin::EiQuery});
      rec.record(iter, space.subtask, Origin::EiQuery, x, y);
    }
  } catch (const Error& e) {
    log.error = e.what();
  }
  return log;
}

RunLog run_random_search(const Problem& problem, const SearchSpace& space, std::size_t budget, RngSeed seed,
                         std::string algorithm) {
  if (!space.decode) throw ArgumentError("run_random_search: search space has no decoder");
  if (budget < 1) throw ArgumentError("run_random_search: budget must be >= 1");
  RunLog log;
  log.algorithm = std::move(algorithm);
  log.seed = seed.value;
  log.config = {{"budget", std::to_string(budget)},
                {"dimension", std::to_string(space.bounds.dim())},
                {"problem", problem.name}};
  Recorder rec(log, budget);
  Rng rng(derive_seed(seed, "random-search"));
  try {
    while (rec.budget_left()) {
      const Vector x = rng.uniform_point(space.bounds);
      rec.record(1, space.subtask, Origin::DoE, x, problem.evaluate(space.decode(x)));
    }
  } catch (const Error& e) {
    log.error = e.what();
  }
  return log;
}

void GmfooConfig::validate(const LatentSpacePair& pair) const {
  if (!(delta >= 0.0 && delta <= 1.0)) throw ArgumentError("GmfooConfig: delta must lie in [0, 1]");
  const std::size_t doe = resolved_doe(pair.d_low());
  if (doe < 4) throw ArgumentError("GmfooConfig: DoE must hold at least 2 points per space");
  if (budget < doe + evaluations_per_iteration())
    throw ArgumentError("GmfooConfig: budget " + std::to_string(budget) + " leaves no full iteration after a DoE of " +
                        std::to_string(doe));
}

RunLog run_gmfoo(const Problem& problem, const LatentSpacePair& pair, const GmfooConfig& config) {
  config.validate(pair);
  const std::size_t doe = config.resolved_doe(pair.d_low());
  const std::size_t doe_low = doe / 2;
  const std::size_t doe_high = doe - doe_low;
  const std::size_t restarts_high = resolve_restarts(config.ei_restarts, pair.d_high());
  const std::size_t restarts_low = resolve_restarts(config.ei_restarts, pair.d_low());

  RunLog log;
  log.algorithm = "gmfoo";
  log.seed = config.seed.value;
  log.config = {{"budget", std::to_string(config.budget)},
                {"d_high", std::to_string(pair.d_high())},
                {"d_low", std::to_string(pair.d_low())},
                {"delta", fmt_double(config.delta)},
                {"doe_high", std::to_string(doe_high)},
                {"doe_low", std::to_string(doe_low)},
                {"ei_restarts_high", std::to_string(restarts_high)},
                {"ei_restarts_low", std::to_string(restarts_low)},
                {"exchange_exact_fidelity", config.exchange_exact_fidelity ? "true" : "false"},
                {"problem", problem.name}};
  Recorder rec(log, config.budget);
  Dataset high_ds(pair.bounds_high());
  Dataset low_ds(pair.bounds_low());
  Rng fallback(derive_seed(config.seed, "fallback"));
  auto eval_high = [&](const Vector& z) { return problem.evaluate(pair.generate(z)); };
  auto eval_low = [&](const Vector& c) { return problem.evaluate(pair.generate_low(c)); };

  try {
    for (const auto& z : lhs_sample(doe_high, pair.bounds_high(), derive_seed(config.seed, "doe-high"))) {
      const double y = eval_high(z);
      high_ds.add({z, y, Fidelity::High, Origin::DoE});
      rec.record(0, SubTask::High, Origin::DoE, z, y);
    }
    for (const auto& c : lhs_sample(doe_low, pair.bounds_low(), derive_seed(config.seed, "doe-low"))) {
      const double y = eval_low(c);
      low_ds.add({c, y, Fidelity::High, Origin::DoE});
      rec.record(0, SubTask::Low, Origin::DoE, c, y);
    }

    for (std::size_t iter = 1; rec.budget_left(); ++iter) {
      // High-dimensional space, then low-dimensional space.
      const auto high_model = fit_mfgp(high_ds.filter(Fidelity::High), high_ds.filter(Fidelity::Low),
                                       derive_seed(config.seed, "fit-high", iter), config.fit);
      {
        const auto q = maximize_ei(*high_model.coordinate_evaluator(),
                                   pair.bounds_high(), *high_ds.min_y(), restarts_high,
                                   derive_seed(config.seed, "ei-high", iter));
        const Vector z = deduplicate(q.point, high_ds, fallback, pair.bounds_high().lower(), pair.bounds_high().upper());
        const double y = eval_high(z);
        high_ds.add({z, y, Fidelity::High, Origin::EiQuery});
        rec.record(iter, SubTask::High, Origin::EiQuery, z, y);
      }
      if (!rec.budget_left()) break;
      {
        const auto low_model = fit_mfgp(low_ds.filter(Fidelity::High), low_ds.filter(Fidelity::Low),
                                        derive_seed(config.seed, "fit-low", iter), config.fit);
        const auto q = maximize_ei(*low_model.coordinate_evaluator(), pair.bounds_low(),
                                   *low_ds.min_y(), restarts_low, derive_seed(config.seed, "ei-low", iter));
        const Vector c = deduplicate(q.point, low_ds, fallback, pair.bounds_low().lower(), pair.bounds_low().upper());
        const double y = eval_low(c);
        low_ds.add({c, y, Fidelity::High, Origin::EiQuery});
        rec.record(iter, SubTask::Low, Origin::EiQuery, c, y);
      }
      if (!rec.budget_left()) break;

      if (config.delta > 0.0) {
        const auto c_min = low_ds.best(Fidelity::High)->x;
        const NarrowedBox box = narrowed_box(c_min, config.delta, pair.bounds_high(), pair.d_high());
        // Same hyperparameters, conditioned on this iteration's new high point.
        const auto model = condition_mfgp(high_ds, high_model.params());
        const auto q = maximize_ei(*model.coordinate_evaluator(), box.bounds(),
                                   *high_ds.min_y(), restarts_high, derive_seed(config.seed, "ei-narrowed", iter));
        const Vector z = deduplicate(q.point, high_ds, fallback, box.lower, box.upper);
        const double y = eval_high(z);
        high_ds.add({z, y, Fidelity::High, Origin::NarrowedQuery});
        rec.record(iter, SubTask::Narrowed, Origin::NarrowedQuery, z, y, box);
      }

      auto kb = exchange_samples(high_ds, low_ds, pair);
      for (auto s : kb.exchanged_to_high.samples()) {
        if (config.exchange_exact_fidelity) {
          if (high_ds.contains(s.x, Fidelity::High)) continue;
          s.fidelity = Fidelity::High;
        }
        high_ds.add(std::move(s));
      }
      for (const auto& s : kb.exchanged_to_low.samples()) low_ds.add(s);
    }
  } catch (const Error& e) {
    log.error = e.what();
  }
  return log;
}

bool is_known_algorithm(std::string_view name) {
  return std::find(std::begin(kAlgorithms), std::end(kAlgorithms), name) != std::end(kAlgorithms);
}

RngSeed algorithm_seed(std::string_view algorithm, std::uint64_t seed) {
  return derive_seed(RngSeed{seed}, algorithm);
}

RunLog run_algorithm(const Problem& problem, const LatentSpacePair& pair, std::string_view algorithm,
                     std::uint64_t seed, const ComparisonSettings& settings) {
  if (!is_known_algorithm(algorithm)) throw ArgumentError("unknown algorithm '" + std::string(algorithm) + "'");
  const RngSeed stream = algorithm_seed(algorithm, seed);
  const std::size_t doe = settings.doe_size ? settings.doe_size : 11 * pair.d_low();
  RunLog log;
  if (algorithm == "gmfoo") {
    GmfooConfig cfg;
    cfg.delta = settings.delta;
    cfg.budget = settings.budget;
    cfg.doe_size = doe;
    cfg.ei_restarts = settings.ei_restarts;
    cfg.seed = stream;
    cfg.exchange_exact_fidelity = settings.exchange_exact_fidelity;
    cfg.fit = settings.fit;
    log = run_gmfoo(problem, pair, cfg);
  } else if (algorithm == "random-search") {
    SearchSpace space{pair.bounds_high(), [&pair](std::span<const double> z) { return pair.generate(z); },
                      SubTask::High};
    log = run_random_search(problem, space, settings.budget, stream, std::string(algorithm));
  } else {
    BoConfig cfg{settings.budget, doe, settings.ei_restarts, stream, settings.fit};
    if (algorithm == "gmo-high") {
      SearchSpace space{pair.bounds_high(), [&pair](std::span<const double> z) { return pair.generate(z); },
                        SubTask::High};
      log = run_standard_bo(problem, space, cfg, std::string(algorithm));
    } else if (algorithm == "gmo-low") {
      SearchSpace space{pair.bounds_low(), [&pair](std::span<const double> c) { return pair.generate_low(c); },
                        SubTask::Low};
      log = run_standard_bo(problem, space, cfg, std::string(algorithm));
    } else {
      if (!settings.svd_generator) throw ArgumentError("svd-bo needs an svd_generator network");
      const Network& net = *settings.svd_generator;
      SearchSpace space{Bounds::uniform(net.input_dim()),
                        [&net](std::span<const double> z) { return forward(net, z); }, SubTask::High};
      log = run_standard_bo(problem, space, cfg, std::string(algorithm));
    }
  }
  log.seed = seed;
  return log;
}

std::vector<RunLog> run_comparison(const Problem& problem, const LatentSpacePair& pair,
                                   const std::vector<std::string>& algorithms,
                                   const std::vector<std::uint64_t>& seeds, const ComparisonSettings& settings) {
  for (const auto& a : algorithms) {
    if (!is_known_algorithm(a)) throw ArgumentError("unknown algorithm '" + a + "'");
    if (a == "svd-bo" && !settings.svd_generator) throw ArgumentError("svd-bo needs an svd_generator network");
  }
  std::vector<RunLog> logs;
  for (const auto& a : algorithms)
    for (auto s : seeds) logs.push_back(run_algorithm(problem, pair, a, s, settings));
  return logs;
}

}  // namespace gmfoo
