#pragma once

// Random hyperparameter search. A sweep spec names a base experiment config
// plus per-parameter sampling distributions addressed by JSON pointer; each
// trial mutates the base, runs it, and is ranked by its best validation
// loss. Divergent or failed trials are recorded and ranked last, never
// fatal. The sweep seed fully determines every sampled value.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vralab/harness/experiment.hpp"

namespace vralab::harness {

struct ParameterSpec {
  enum class Dist { LogUniform, Uniform, IntegerUniform, Choice };
  std::string path;  // JSON pointer into the experiment config, e.g. /optimizer/alpha0
  Dist dist = Dist::Uniform;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<nlohmann::json> values;  // choice only
};

struct SweepSpec {
  std::uint64_t seed = 0;
  int trials = 1;
  nlohmann::json base;  // canonical serialization of the base config
  std::vector<ParameterSpec> parameters;
  std::string out_dir;  // trial traces land here when nonempty
};

SweepSpec parse_sweep_spec(const nlohmann::json& j);
SweepSpec load_sweep_spec(const std::string& path);

struct TrialResult {
  int index = 0;               // sampling order
  nlohmann::json config;       // fully mutated config
  RunSummary summary;
  double metric = 0.0;         // best validation loss; +inf when unusable
  std::string trace_path;      // empty when no trace was written
  std::string error;           // nonempty when the trial failed to run
};

// Samples `trials` configs, runs them, and returns them ranked by metric
// (ascending, ties in sampling order).
std::vector<TrialResult> random_search(const SweepSpec& spec);

// Manifest linking every ranked trial to its config, metric, and trace.
nlohmann::json sweep_manifest(const std::vector<TrialResult>& ranked);

}  // namespace vralab::harness
