#pragma once

// Experiment configuration. Configs load from JSON with strict schema
// checking: unknown keys are rejected by name, values are range checked,
// and referenced data files must exist. A config plus a seed fully
// determines a run.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vralab/harness/trace.hpp"
#include "vralab/mlp.hpp"
#include "vralab/optimizers.hpp"
#include "vralab/scheduler.hpp"
#include "vralab/types.hpp"

namespace vralab::harness {

struct DatasetSpec {
  enum class Kind { Blobs, TwoMoons, Idx } kind = Kind::TwoMoons;
  // blobs
  Index n = 200;
  int classes = 2;
  Index dim = 2;
  std::uint64_t seed = 0;
  // two_moons
  double noise = 0.1;
  // idx
  std::string images;
  std::string labels;
  // shared split controls
  double val_fraction = 0.2;
  double test_fraction = 0.0;
  std::uint64_t split_seed = 0;
};

struct ObjectiveSpec {
  enum class Kind { Quadratic, Rosenbrock, Mlp } kind = Kind::Rosenbrock;
  Vector<double> quadratic_diag;  // diagonal of A
  models::MlpSpec mlp;
  DatasetSpec dataset;  // mlp only
};

struct ProbeSettings {
  bool enabled = false;
  int every_k = 50;
  double tol = 1e-4;
  int max_iters = 100;
  std::uint64_t seed = 0;
  std::optional<double> eps;  // preconditioner floor; defaults per variant
  double hvp_step = -1.0;     // <= 0 picks the default finite-difference step
};

struct StopRules {
  std::optional<double> train_loss_below;
  std::optional<double> train_accuracy_above;
};

struct OutputSpec {
  std::string path;  // empty: keep the trace in memory only
  TraceFormat format = TraceFormat::Csv;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  ObjectiveSpec objective;
  std::optional<Vector<double>> init;  // starting point for analytic objectives
  optim::OptimizerConfig<double> optimizer;
  optim::SchedulerConfig<double> scheduler;
  long max_steps = 0;  // 0 means bounded by epochs only
  int epochs = 0;      // 0 means bounded by max_steps only
  Index batch_size = 0;  // 0 means full batch
  StopRules stop;
  ProbeSettings probe;
  int validate_every = 100;  // validation cadence in steps for analytic objectives
  OutputSpec output;
};

// Throws ConfigError naming the offending key or value.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
void validate_experiment_config(const ExperimentConfig& cfg);

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
nlohmann::json optimizer_config_to_json(const optim::OptimizerConfig<double>& cfg);
nlohmann::json scheduler_config_to_json(const optim::SchedulerConfig<double>& cfg);
optim::OptimizerConfig<double> parse_optimizer_config(const nlohmann::json& j);
optim::SchedulerConfig<double> parse_scheduler_config(const nlohmann::json& j);

// FNV-1a over the canonical serialization; stable across runs and builds.
std::string config_hash(const ExperimentConfig& cfg);

// Strict-schema helper: rejects keys outside `allowed`.
void check_keys(const nlohmann::json& obj, const std::string& where,
                const std::vector<std::string>& allowed);

nlohmann::json load_json_file(const std::string& path);

}  // namespace vralab::harness
