#pragma once

// Seeded training driver. Builds the objective a config names, runs the
// optimizer under the schedule with probes and stop rules, and returns the
// trace plus a summary. Identical configs produce byte-identical traces;
// non-finite values mark the run divergent and end it gracefully.

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "vralab/datasets.hpp"
#include "vralab/harness/config.hpp"
#include "vralab/harness/trace.hpp"
#include "vralab/mlp.hpp"
#include "vralab/objectives.hpp"

namespace vralab::harness {

// Objective plus the data splits and start point the driver needs.
struct BuiltObjective {
  models::Objective train;
  Vector<double> init;
  models::MlpSpec mlp;  // valid only for dataset objectives
  std::shared_ptr<const models::Dataset> train_data;  // null for analytic objectives
  std::shared_ptr<const models::Dataset> val_data;
  std::shared_ptr<const models::Dataset> test_data;
  bool classification = false;
};

BuiltObjective build_objective(const ExperimentConfig& cfg);

// Momentum coefficient the stability threshold uses for this optimizer.
double stability_momentum(const optim::OptimizerConfig<double>& cfg);

struct RunSummary {
  double final_train_loss = std::numeric_limits<double>::quiet_NaN();
  double best_train_loss = std::numeric_limits<double>::quiet_NaN();
  double final_val_loss = std::numeric_limits<double>::quiet_NaN();
  double best_val_loss = std::numeric_limits<double>::quiet_NaN();
  double final_test_loss = std::numeric_limits<double>::quiet_NaN();
  double best_test_loss = std::numeric_limits<double>::quiet_NaN();
  long steps_executed = 0;
  double wall_seconds = 0.0;  // reported on stdout only, never written to files
  bool diverged = false;
  std::string config_hash;
};

struct RunResult {
  RunSummary summary;
  std::vector<TraceRecord> trace;
};

// Runs the config end to end; writes the trace to cfg.output.path when set.
RunResult run_experiment(const ExperimentConfig& cfg);

// Summary as JSON. Wall-clock time is excluded so written bytes depend only
// on (config, platform).
nlohmann::json summary_to_json(const RunSummary& s);

}  // namespace vralab::harness
