#pragma once

// Named training recipes: optimizer plus scheduler settings tuned per task
// family. Each preset also ships as a JSON file under presets/ so external
// tools can read the same values; a test keeps code and files in sync.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vralab/optimizers.hpp"
#include "vralab/scheduler.hpp"
#include "vralab/types.hpp"

namespace vralab::harness {

struct Preset {
  std::string name;
  std::string note;
  optim::OptimizerConfig<double> optimizer;
  optim::SchedulerConfig<double> scheduler;
  int epochs = 0;  // 0 when the recipe does not pin a budget
  long steps = 0;
  Index batch_size = 0;
  std::uint64_t seed = 0;
};

const std::vector<Preset>& presets();

// nullptr when no preset has that name.
const Preset* find_preset(const std::string& name);

nlohmann::json preset_to_json(const Preset& p);

}  // namespace vralab::harness
