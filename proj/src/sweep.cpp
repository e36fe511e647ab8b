#include "vralab/harness/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "vralab/errors.hpp"
#include "vralab/rng.hpp"

namespace vralab::harness {

namespace {

using nlohmann::json;

ParameterSpec parse_parameter(const json& j, std::size_t index) {
  const std::string where = "sweep parameter #" + std::to_string(index);
  check_keys(j, where, {"path", "distribution", "min", "max", "values"});
  ParameterSpec p;
  if (!j.contains("path") || !j.at("path").is_string())
    throw ConfigError(where + ": needs a string 'path'");
  p.path = j.at("path").get<std::string>();
  if (p.path.empty() || p.path.front() != '/')
    throw ConfigError(where + ": 'path' must be a JSON pointer starting with '/'");
  if (!j.contains("distribution") || !j.at("distribution").is_string())
    throw ConfigError(where + ": needs a string 'distribution'");
  const std::string dist = j.at("distribution").get<std::string>();

  auto need_range = [&] {
    if (!j.contains("min") || !j.contains("max") || !j.at("min").is_number() ||
        !j.at("max").is_number())
      throw ConfigError(where + ": needs numeric 'min' and 'max'");
    p.lo = j.at("min").get<double>();
    p.hi = j.at("max").get<double>();
  };

  if (dist == "log_uniform") {
    p.dist = ParameterSpec::Dist::LogUniform;
    need_range();
    if (!(p.lo > 0.0 && p.hi > p.lo)) throw ConfigError(where + ": needs 0 < min < max");
  } else if (dist == "uniform") {
    p.dist = ParameterSpec::Dist::Uniform;
    need_range();
    if (!(p.hi > p.lo)) throw ConfigError(where + ": needs min < max");
  } else if (dist == "integer_uniform") {
    p.dist = ParameterSpec::Dist::IntegerUniform;
    if (!j.contains("min") || !j.contains("max") || !j.at("min").is_number_integer() ||
        !j.at("max").is_number_integer())
      throw ConfigError(where + ": needs integer 'min' and 'max'");
    p.lo = j.at("min").get<double>();
    p.hi = j.at("max").get<double>();
    if (!(p.hi > p.lo)) throw ConfigError(where + ": needs min < max");
  } else if (dist == "choice") {
    p.dist = ParameterSpec::Dist::Choice;
    if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty())
      throw ConfigError(where + ": needs a nonempty 'values' array");
    for (const auto& v : j.at("values")) p.values.push_back(v);
  } else {
    throw ConfigError(where + ": unknown distribution '" + dist + "'");
  }
  return p;
}

json sample_value(const ParameterSpec& p, Rng& rng) {
  switch (p.dist) {
    case ParameterSpec::Dist::LogUniform: return log_uniform(rng, p.lo, p.hi);
    case ParameterSpec::Dist::Uniform: return uniform(rng, p.lo, p.hi);
    case ParameterSpec::Dist::IntegerUniform:
      return integer_uniform(rng, static_cast<long>(p.lo), static_cast<long>(p.hi));
    case ParameterSpec::Dist::Choice:
      return p.values[static_cast<std::size_t>(
          integer_uniform(rng, 0, static_cast<long>(p.values.size()) - 1))];
  }
  throw ConfigError("sweep: unknown distribution");
}

}  // namespace

SweepSpec parse_sweep_spec(const json& j) {
  check_keys(j, "sweep", {"seed", "trials", "base", "parameters", "out_dir"});
  SweepSpec spec;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw ConfigError("sweep: 'seed' must be an integer");
    spec.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("trials")) {
    if (!j.at("trials").is_number_integer()) throw ConfigError("sweep: 'trials' must be an integer");
    spec.trials = j.at("trials").get<int>();
  }
  if (spec.trials < 1) throw ConfigError("sweep: 'trials' must be at least 1");
  if (!j.contains("base")) throw ConfigError("sweep: missing 'base' experiment config");
  // Parse then reserialize so pointer mutations land on the canonical layout.
  spec.base = experiment_config_to_json(parse_experiment_config(j.at("base")));
  if (j.contains("parameters")) {
    if (!j.at("parameters").is_array()) throw ConfigError("sweep: 'parameters' must be an array");
    std::size_t i = 0;
    for (const auto& item : j.at("parameters")) spec.parameters.push_back(parse_parameter(item, i++));
  }
  if (j.contains("out_dir")) {
    if (!j.at("out_dir").is_string()) throw ConfigError("sweep: 'out_dir' must be a string");
    spec.out_dir = j.at("out_dir").get<std::string>();
  }
  return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
  return parse_sweep_spec(load_json_file(path));
}

std::vector<TrialResult> random_search(const SweepSpec& spec) {
  if (spec.trials < 1) throw ConfigError("sweep: 'trials' must be at least 1");
  std::vector<TrialResult> results;
  results.reserve(static_cast<std::size_t>(spec.trials));

  for (int t = 0; t < spec.trials; ++t) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(t)));
    TrialResult trial;
    trial.index = t;
    trial.config = spec.base;
    for (const ParameterSpec& p : spec.parameters) {
      const json value = sample_value(p, rng);
      try {
        trial.config[json::json_pointer(p.path)] = value;
      } catch (const json::exception& e) {
        throw ConfigError("sweep: cannot apply '" + p.path + "': " + e.what());
      }
    }
    if (!spec.out_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "trial_%03d", t);
      const std::string fmt =
          trial.config.contains("output") ? trial.config["output"].value("format", "csv") : "csv";
      trial.trace_path = spec.out_dir + "/" + name + (fmt == "jsonl" ? ".jsonl" : ".csv");
      trial.config["output"] = {{"path", trial.trace_path}, {"format", fmt}};
    }

    trial.metric = std::numeric_limits<double>::infinity();
    try {
      const ExperimentConfig cfg = parse_experiment_config(trial.config);
      const RunResult run = run_experiment(cfg);
      trial.summary = run.summary;
      if (!run.summary.diverged && std::isfinite(run.summary.best_val_loss))
        trial.metric = run.summary.best_val_loss;
    } catch (const ConfigError& e) {
      trial.error = e.what();
    } catch (const DivergenceError& e) {
      trial.error = e.what();
    }
    results.push_back(std::move(trial));
  }

  std::stable_sort(results.begin(), results.end(),
                   [](const TrialResult& a, const TrialResult& b) { return a.metric < b.metric; });
  return results;
}

nlohmann::json sweep_manifest(const std::vector<TrialResult>& ranked) {
  json trials = json::array();
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    const TrialResult& t = ranked[rank];
    json entry;
    entry["rank"] = rank;
    entry["trial"] = t.index;
    entry["metric_best_val_loss"] =
        std::isfinite(t.metric) ? json(t.metric) : json();  // null when unusable
    entry["final_val_loss"] = t.summary.final_val_loss;
    entry["diverged"] = t.summary.diverged;
    entry["config"] = t.config;
    if (!t.trace_path.empty()) entry["trace"] = t.trace_path;
    if (!t.error.empty()) entry["error"] = t.error;
    entry["summary"] = summary_to_json(t.summary);
    trials.push_back(std::move(entry));
  }
  json manifest;
  manifest["trials"] = trials;
  return manifest;
}

}  // namespace vralab::harness
