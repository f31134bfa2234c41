// Copyright 2026 The gmfoo Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmfoo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <toml.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace gmfoo {

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> log;
  std::call_once(once, [] {
    log = spdlog::get("gmfoo");
    if (!log) log = spdlog::stderr_color_mt("gmfoo");
    log->set_pattern("[%l] %v");
    log->set_level(spdlog::level::info);
  });
  return log;
}

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  return nullptr;
}

/// Typed access to one config document, collecting every violation.
class ConfigReader {
 public:
  explicit ConfigReader(const json& root) : root_(root) {
    if (!root_.is_object()) errors_.push_back("<root>: expected a table");
  }

  const std::vector<std::string>& errors() const { return errors_; }
  void error(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

  const json* find(const std::string& section, const std::string& key) {
    seen_.insert(section + "." + key);
    if (!root_.is_object() || !root_.contains(section)) return nullptr;
    const auto& s = root_.at(section);
    if (!s.is_object()) return nullptr;
    auto it = s.find(key);
    return it == s.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& section, const std::string& key, T& out) {
    const json* v = find(section, key);
    if (!v) return;
    const std::string path = section + "." + key;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) return error(path, "expected a string");
      out = v->get<std::string>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) return error(path, "expected a boolean");
      out = v->get<bool>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v->is_number()) return error(path, "expected a number");
      out = v->get<double>();
    } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
        return error(path, "expected a non-negative integer");
      out = v->get<T>();
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v->is_array()) return error(path, "expected an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) return error(path, "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
      if (!v->is_array()) return error(path, "expected an array of non-negative integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer() || (!e.is_number_unsigned() && e.get<std::int64_t>() < 0))
          return error(path, "expected an array of non-negative integers");
        out.push_back(e.get<std::uint64_t>());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  bool has(const std::string& section, const std::string& key) {
    return find(section, key) != nullptr;
  }

  void reject_unknown() {
    if (!root_.is_object()) return;
    static const std::set<std::string> sections = {"problem", "networks", "run", "diagnose"};
    for (const auto& [s, body] : root_.items()) {
      if (!sections.count(s)) {
        error(s, "unknown section");
        continue;
      }
      if (!body.is_object()) {
        error(s, "expected a table");
        continue;
      }
      for (const auto& [k, _] : body.items()) {
        if (!seen_.count(s + "." + k)) error(s + "." + k, "unknown key");
      }
    }
  }

 private:
  const json& root_;
  std::vector<std::string> errors_;
  std::set<std::string> seen_;
};

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  if (p == "analytic" || p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (fs::path(base_dir) / path).lexically_normal().string();
}

[[noreturn]] void throw_config(const std::vector<std::string>& errors) {
  std::string msg = "invalid experiment configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

bool is_fourier(const std::string& problem) { return problem.starts_with("fourier-"); }

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void configure_logging() {
  auto log = logger();
  const char* env = std::getenv("GMFOO_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    log->set_level(spdlog::level::err);
  } else if (level == "debug") {
    log->set_level(spdlog::level::debug);
  } else {
    log->set_level(spdlog::level::info);
  }
}

ExperimentConfig parse_experiment_config(std::string_view text, ConfigFormat format, const std::string& base_dir) {
  json doc;
  try {
    if (format == ConfigFormat::Json) {
      doc = json::parse(text);
    } else {
      doc = toml_to_json(toml::parse(text));
    }
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config JSON parse error: ") + e.what());
  } catch (const toml::parse_error& e) {
    std::ostringstream ss;
    ss << "config TOML parse error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(ss.str());
  }

  ExperimentConfig cfg;
  ConfigReader r(doc);
  r.read("problem", "name", cfg.problem);
  r.read("problem", "design_dim", cfg.design_dim);
  cfg.d_high_given = r.has("problem", "d_high");
  cfg.d_low_given = r.has("problem", "d_low");
  r.read("problem", "d_high", cfg.d_high);
  r.read("problem", "d_low", cfg.d_low);
  r.read("problem", "w1", cfg.corbel.w1);
  r.read("problem", "w2", cfg.corbel.w2);
  r.read("problem", "density", cfg.corbel.density);
  r.read("problem", "gravity", cfg.corbel.gravity);
  if (const json* t = r.find("problem", "target_centroid")) {
    if (!t->is_array() || t->size() != 2 || !(*t)[0].is_number() || !(*t)[1].is_number()) {
      r.error("problem.target_centroid", "expected [x, y]");
    } else {
      cfg.corbel.target_centroid = {(*t)[0].get<double>(), (*t)[1].get<double>()};
    }
  }
  r.read("problem", "generator_output", cfg.generator_output);

  r.read("networks", "generator", cfg.generator);
  r.read("networks", "encoder", cfg.encoder);
  std::string svd;
  r.read("networks", "svd_generator", svd);
  if (!svd.empty()) cfg.svd_generator = resolve_path(base_dir, svd);
  cfg.generator = resolve_path(base_dir, cfg.generator);
  cfg.encoder = resolve_path(base_dir, cfg.encoder);

  r.read("run", "algorithms", cfg.algorithms);
  r.read("run", "seeds", cfg.seeds);
  r.read("run", "budget", cfg.budget);
  r.read("run", "delta", cfg.delta);
  r.read("run", "doe_size", cfg.doe_size);
  r.read("run", "ei_restarts", cfg.ei_restarts);
  r.read("run", "exchange_exact_fidelity", cfg.exchange_exact_fidelity);
  std::string out;
  r.read("run", "out", out);
  if (!out.empty()) cfg.out_dir = resolve_path(base_dir, out);

  r.read("diagnose", "n", cfg.diagnose_n);
  r.read("diagnose", "seed", cfg.diagnose_seed);
  r.reject_unknown();

  std::vector<std::string> errors = r.errors();
  static const std::set<std::string> problems = {"fourier-quadratic", "fourier-corbel", "fourier-subspace",
                                                   "corbel", "area"};
  if (!problems.count(cfg.problem))
    errors.push_back("problem.name: unknown problem '" + cfg.problem +
                     "' (expected fourier-quadratic, fourier-corbel, fourier-subspace, corbel or area)");
  if (!cfg.generator_output.empty() && cfg.generator_output != "unit" && cfg.generator_output != "tanh")
    errors.push_back("problem.generator_output: expected \"unit\" or \"tanh\"");
  if (cfg.seeds.empty()) errors.push_back("run.seeds: must list at least one seed");
  if (cfg.algorithms.empty()) errors.push_back("run.algorithms: must list at least one algorithm");
  for (const auto& a : cfg.algorithms) {
    if (!is_known_algorithm(a))
      errors.push_back("run.algorithms: unknown algorithm '" + a +
                       "' (expected gmfoo, gmo-high, gmo-low, svd-bo or random-search)");
  }
  if (!(cfg.delta >= 0.0 && cfg.delta <= 1.0)) errors.push_back("run.delta: must lie in [0, 1]");
  if (cfg.diagnose_n < 3) errors.push_back("diagnose.n: must be >= 3");
  try {
    cfg.corbel.validate();
  } catch (const ArgumentError& e) {
    errors.push_back(std::string("problem: ") + e.what());
  }
  if (!errors.empty()) throw_config(errors);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  const fs::path p(path);
  const auto format = p.extension() == ".json" ? ConfigFormat::Json : ConfigFormat::Toml;
  auto cfg = parse_experiment_config(ss.str(), format, p.parent_path().empty() ? "." : p.parent_path().string());
  cfg.source = path;
  return cfg;
}

namespace {

Network load_network_checked(const std::string& key, const std::string& path) {
  if (path == "analytic")
    throw ConfigError(key + ": 'analytic' is only available for the fourier problems");
  if (!fs::exists(path)) throw ConfigError(key + ": network file '" + path + "' does not exist");
  try {
    return load_network(path);
  } catch (const LoadError& e) {
    throw LoadError(key + ": " + e.what());
  }
}

}  // namespace

ResolvedExperiment resolve_experiment(const ExperimentConfig& cfg) {
  std::optional<Problem> problem;
  std::optional<LatentSpacePair> pair;
  if (is_fourier(cfg.problem)) {
    if (cfg.generator != "analytic" || cfg.encoder != "analytic")
      throw ConfigError("networks: the " + cfg.problem + " problem uses the analytic pair; set generator and "
                        "encoder to \"analytic\"");
    if (!(cfg.d_low < cfg.d_high))
      throw ConfigError("problem.d_low: LatentSpacePair invariant d_low < d_high violated (d_low = " +
                        std::to_string(cfg.d_low) + ", d_high = " + std::to_string(cfg.d_high) + ")");
    try {
      const auto objective = cfg.problem == "fourier-corbel"     ? FourierObjective::Corbel
                             : cfg.problem == "fourier-subspace" ? FourierObjective::Subspace
                                                                 : FourierObjective::QuadraticTarget;
      auto fp = fourier_pair(cfg.design_dim, cfg.d_high, cfg.d_low, objective);
      problem = std::move(fp.problem);
      pair = std::move(fp.pair);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("problem: ") + e.what());
    }
  } else {
    Network gen = load_network_checked("networks.generator", cfg.generator);
    Network enc = load_network_checked("networks.encoder", cfg.encoder);
    if (!(enc.output_dim() < gen.input_dim()))
      throw ConfigError("networks: LatentSpacePair invariant d_low < d_high violated (encoder output " +
                        std::to_string(enc.output_dim()) + ", generator input " + std::to_string(gen.input_dim()) +
                        ")");
    if (cfg.problem == "corbel") {
      problem = make_corbel_problem(cfg.corbel);
    } else {
      double threshold = area_threshold_for(gen.output_activation());
      if (cfg.generator_output == "unit") threshold = 0.5;
      if (cfg.generator_output == "tanh") threshold = 0.0;
      problem = make_area_problem(threshold);
    }
    if (gen.output_dim() != problem->input_dim)
      throw ConfigError("networks.generator: output dimension " + std::to_string(gen.output_dim()) +
                        " does not match the " + cfg.problem + " design size " + std::to_string(problem->input_dim));
    try {
      pair.emplace(std::move(gen), std::move(enc));
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("networks: LatentSpacePair invariant: ") + e.what());
    }
    if (cfg.d_high_given && cfg.d_high != pair->d_high())
      throw ConfigError("problem.d_high: " + std::to_string(cfg.d_high) + " does not match the generator input " +
                        std::to_string(pair->d_high()));
    if (cfg.d_low_given && cfg.d_low != pair->d_low())
      throw ConfigError("problem.d_low: " + std::to_string(cfg.d_low) + " does not match the encoder output " +
                        std::to_string(pair->d_low()));
  }

  ComparisonSettings s;
  s.budget = cfg.budget;
  s.doe_size = cfg.doe_size;
  s.delta = cfg.delta;
  s.ei_restarts = cfg.ei_restarts;
  s.exchange_exact_fidelity = cfg.exchange_exact_fidelity;
  if (cfg.svd_generator) {
    Network svd = load_network_checked("networks.svd_generator", *cfg.svd_generator);
    if (svd.output_dim() != problem->input_dim)
      throw ConfigError("networks.svd_generator: output dimension does not match the design size");
    s.svd_generator = std::move(svd);
  }
  const bool wants_svd = std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "svd-bo") != cfg.algorithms.end();
  if (wants_svd && !s.svd_generator) throw ConfigError("networks.svd_generator: required by algorithm svd-bo");

  const std::size_t doe = s.doe_size ? s.doe_size : 11 * pair->d_low();
  for (const auto& a : cfg.algorithms) {
    if (a == "gmfoo") {
      GmfooConfig g;
      g.delta = s.delta;
      g.budget = s.budget;
      g.doe_size = doe;
      try {
        g.validate(*pair);
      } catch (const ArgumentError& e) {
        throw ConfigError(std::string("run.budget: ") + e.what());
      }
    } else if (a != "random-search" && s.budget < doe) {
      throw ConfigError("run.budget: " + std::to_string(s.budget) + " is smaller than the DoE size " +
                        std::to_string(doe) + " needed by " + a);
    } else if (s.budget < 1) {
      throw ConfigError("run.budget: must be >= 1");
    }
  }
  return {std::move(*problem), std::move(*pair), std::move(s)};
}

std::string validate_experiment(const ExperimentConfig& cfg) {
  const auto r = resolve_experiment(cfg);
  const std::size_t doe = r.settings.doe_size ? r.settings.doe_size : 11 * r.pair.d_low();
  std::ostringstream ss;
  if (!cfg.source.empty()) ss << "config: " << cfg.source << '\n';
  ss << "problem: " << r.problem.name << " (design dimension " << r.problem.input_dim << ")\n";
  ss << "generator: " << cfg.generator << " (" << r.pair.generator().input_dim() << " -> "
     << r.pair.generator().output_dim() << ")\n";
  ss << "encoder: " << cfg.encoder << " (" << r.pair.encoder().input_dim() << " -> " << r.pair.encoder().output_dim()
     << ")\n";
  if (cfg.svd_generator)
    ss << "svd_generator: " << *cfg.svd_generator << " (" << r.settings.svd_generator->input_dim() << " -> "
       << r.settings.svd_generator->output_dim() << ")\n";
  ss << "d_high: " << r.pair.d_high() << '\n';
  ss << "d_low: " << r.pair.d_low() << '\n';
  ss << "algorithms:";
  for (const auto& a : cfg.algorithms) ss << ' ' << a;
  ss << "\nseeds:";
  for (auto s : cfg.seeds) ss << ' ' << s;
  ss << "\nbudget: " << cfg.budget << '\n';
  ss << "delta: " << cfg.delta << '\n';
  ss << "doe: " << doe << (r.settings.doe_size ? "" : " (11 * d_low)") << "; gmfoo split " << (doe - doe / 2)
     << " high / " << doe / 2 << " low\n";
  ss << "ei_restarts: "
     << (cfg.ei_restarts ? std::to_string(cfg.ei_restarts) : "10 * dimension") << '\n';
  ss << "exchange_exact_fidelity: " << (cfg.exchange_exact_fidelity ? "true" : "false") << '\n';
  ss << "out: " << cfg.out_dir << '\n';
  return ss.str();
}

double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string runlog_basename(std::string_view algorithm, std::uint64_t seed) {
  return std::string(algorithm) + "_" + std::to_string(seed);
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::size_t jobs,
                          std::uint64_t seed_offset) {
  configure_logging();
  const auto resolved = resolve_experiment(cfg);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

  struct Job {
    std::string algorithm;
    std::uint64_t seed;
    std::optional<RunLog> log;
    std::string failure;
  };
  std::vector<Job> work;
  for (const auto& a : cfg.algorithms)
    for (auto s : cfg.seeds) work.push_back({a, s + seed_offset, std::nullopt, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      auto& job = work[i];
      logger()->info("run {} seed {}", job.algorithm, job.seed);
      try {
        job.log = run_algorithm(resolved.problem, resolved.pair, job.algorithm, job.seed, resolved.settings);
        if (!job.log->ok()) job.failure = *job.log->error;
      } catch (const Error& e) {
        job.failure = e.what();
      }
      if (!job.failure.empty()) logger()->error("{} seed {} failed: {}", job.algorithm, job.seed, job.failure);
      else logger()->debug("{} seed {} final best {}", job.algorithm, job.seed, job.log->final_best());
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(work.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  RunOutcome outcome;
  const fs::path dir(out_dir);
  for (const auto& job : work) {
    ++outcome.runs;
    if (!job.failure.empty()) {
      ++outcome.failed;
      outcome.failures.push_back(job.algorithm + " " + std::to_string(job.seed) + ": " + job.failure);
    }
    if (!job.log) continue;
    const std::string base = runlog_basename(job.algorithm, job.seed);
    write_file(dir / (base + ".runlog.json"), job.log->to_json() + "\n");
    std::ostringstream csv, timing;
    job.log->write_csv(csv);
    job.log->write_timing_csv(timing);
    write_file(dir / (base + ".runlog.csv"), csv.str());
    write_file(dir / (base + ".timing.csv"), timing.str());
    outcome.files.push_back((dir / (base + ".runlog.json")).string());
    outcome.files.push_back((dir / (base + ".runlog.csv")).string());
  }

  std::ostringstream summary;
  summary << "algorithm,runs,failed,median_final_best,min_final_best,max_final_best\n";
  for (const auto& a : cfg.algorithms) {
    SummaryRow row;
    row.algorithm = a;
    std::vector<double> finals;
    for (const auto& job : work) {
      if (job.algorithm != a) continue;
      ++row.runs;
      if (!job.failure.empty()) {
        ++row.failed;
        continue;
      }
      finals.push_back(job.log->final_best());
    }
    summary << a << ',' << row.runs << ',' << row.failed << ',';
    if (finals.empty()) {
      summary << ",,\n";
    } else {
      row.median_final_best = median(finals);
      row.min_final_best = *std::min_element(finals.begin(), finals.end());
      row.max_final_best = *std::max_element(finals.begin(), finals.end());
      summary << fmt(row.median_final_best) << ',' << fmt(row.min_final_best) << ',' << fmt(row.max_final_best)
              << '\n';
    }
    outcome.summary.push_back(row);
  }
  write_file(dir / "summary.csv", summary.str());
  outcome.files.push_back((dir / "summary.csv").string());
  return outcome;
}

DiagnoseOutcome diagnose_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::size_t n) {
  configure_logging();
  const std::size_t pairs = n ? n : cfg.diagnose_n;
  if (pairs < 3) throw ArgumentError("diagnose: n must be >= 3");
  const auto resolved = resolve_experiment(cfg);
  const Problem& problem = resolved.problem;
  DiagnoseOutcome out;
  out.report = correlation_report(
      resolved.pair, [&problem](std::span<const double> x) { return problem.evaluate(x); }, pairs,
      RngSeed{cfg.diagnose_seed});
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  std::ostringstream csv;
  csv << "y_z,y_cprime\n" << std::setprecision(17);
  for (const auto& [a, b] : out.report.pairs) csv << a << ',' << b << '\n';
  const json summary = {{"n_pairs", out.report.n_pairs}, {"pearson", out.report.pearson}, {"seed", cfg.diagnose_seed}};
  out.pairs_csv = (fs::path(out_dir) / "correlation.csv").string();
  out.summary_json = (fs::path(out_dir) / "correlation.json").string();
  write_file(out.pairs_csv, csv.str());
  write_file(out.summary_json, summary.dump(1) + "\n");
  logger()->info("pearson {} over {} pairs", out.report.pearson, out.report.n_pairs);
  return out;
}

}  // namespace gmfoo
