#include "vralab/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vralab/errors.hpp"

namespace vralab::harness {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double get_number(const json& j, const std::string& where, const char* key, double fallback,
                  bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(where + ": missing required key '" + key + "'");
    return fallback;
  }
  if (!j.at(key).is_number()) fail(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

long get_integer(const json& j, const std::string& where, const char* key, long fallback,
                 bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(where + ": missing required key '" + key + "'");
    return fallback;
  }
  if (!j.at(key).is_number_integer()) fail(where + ": '" + key + "' must be an integer");
  return j.at(key).get<long>();
}

bool get_bool(const json& j, const std::string& where, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(where + ": '" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& where, const char* key,
                       const std::string& fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(where + ": missing required key '" + key + "'");
    return fallback;
  }
  if (!j.at(key).is_string()) fail(where + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::uint64_t get_seed(const json& j, const std::string& where, const char* key,
                       std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(where + ": '" + key + "' must be an integer");
  return j.at(key).get<std::uint64_t>();
}

}  // namespace

void check_keys(const json& obj, const std::string& where, const std::vector<std::string>& allowed) {
  if (!obj.is_object()) fail(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(where + ": unknown key '" + item.key() + "'");
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

optim::OptimizerConfig<double> parse_optimizer_config(const json& j) {
  const std::string where = "optimizer";
  check_keys(j, where,
             {"variant", "alpha0", "alpha1", "beta1", "beta2", "beta3", "power", "normgrad",
              "epsilon", "weight_decay", "sgd_momentum", "sgd_nesterov", "rmsprop_alpha",
              "rmsprop_momentum"});
  optim::OptimizerConfig<double> cfg;
  const std::string variant = get_string(j, where, "variant", "", true);
  if (variant == "vradam")
    cfg.variant = optim::Variant::VRAdam;
  else if (variant == "adamw")
    cfg.variant = optim::Variant::AdamW;
  else if (variant == "sgd_nesterov")
    cfg.variant = optim::Variant::SGDNesterov;
  else if (variant == "rmsprop")
    cfg.variant = optim::Variant::RMSProp;
  else if (variant == "vrmomentum")
    cfg.variant = optim::Variant::VRMomentum;
  else if (variant == "momentum")
    cfg.variant = optim::Variant::Momentum;
  else
    fail(where + ": unknown variant '" + variant + "'");
  cfg.alpha0 = get_number(j, where, "alpha0", cfg.alpha0);
  cfg.alpha1 = get_number(j, where, "alpha1", cfg.alpha1);
  cfg.beta1 = get_number(j, where, "beta1", cfg.beta1);
  cfg.beta2 = get_number(j, where, "beta2", cfg.beta2);
  cfg.beta3 = get_number(j, where, "beta3", cfg.beta3);
  cfg.power = static_cast<int>(get_integer(j, where, "power", cfg.power));
  cfg.normgrad = get_bool(j, where, "normgrad", cfg.normgrad);
  cfg.epsilon = get_number(j, where, "epsilon", cfg.epsilon);
  cfg.weight_decay = get_number(j, where, "weight_decay", cfg.weight_decay);
  cfg.sgd_momentum = get_number(j, where, "sgd_momentum", cfg.sgd_momentum);
  cfg.sgd_nesterov = get_bool(j, where, "sgd_nesterov", cfg.sgd_nesterov);
  cfg.rmsprop_alpha = get_number(j, where, "rmsprop_alpha", cfg.rmsprop_alpha);
  cfg.rmsprop_momentum = get_number(j, where, "rmsprop_momentum", cfg.rmsprop_momentum);
  optim::validate(cfg);
  return cfg;
}

optim::SchedulerConfig<double> parse_scheduler_config(const json& j) {
  const std::string where = "scheduler";
  check_keys(j, where, {"kind", "warmup_epochs", "warmup_factor", "eta_min", "total_epochs"});
  optim::SchedulerConfig<double> sch;
  const std::string kind = get_string(j, where, "kind", "constant");
  if (kind == "constant")
    sch.kind = optim::SchedulerKind::Constant;
  else if (kind == "warmup_cosine")
    sch.kind = optim::SchedulerKind::WarmupCosine;
  else
    fail(where + ": unknown kind '" + kind + "'");
  sch.warmup_epochs = static_cast<int>(get_integer(j, where, "warmup_epochs", sch.warmup_epochs));
  sch.warmup_factor = get_number(j, where, "warmup_factor", sch.warmup_factor);
  sch.eta_min = get_number(j, where, "eta_min", sch.eta_min);
  sch.total_epochs = static_cast<int>(get_integer(j, where, "total_epochs", sch.total_epochs));
  optim::validate(sch);
  return sch;
}

namespace {

DatasetSpec parse_dataset_spec(const json& j) {
  const std::string where = "objective.dataset";
  DatasetSpec ds;
  const std::string kind = get_string(j, where, "kind", "", true);
  if (kind == "blobs") {
    ds.kind = DatasetSpec::Kind::Blobs;
    check_keys(j, where,
               {"kind", "n", "classes", "dim", "seed", "val_fraction", "test_fraction", "split_seed"});
    ds.n = get_integer(j, where, "n", ds.n);
    ds.classes = static_cast<int>(get_integer(j, where, "classes", ds.classes));
    ds.dim = get_integer(j, where, "dim", ds.dim);
    ds.seed = get_seed(j, where, "seed", ds.seed);
  } else if (kind == "two_moons") {
    ds.kind = DatasetSpec::Kind::TwoMoons;
    check_keys(j, where, {"kind", "n", "noise", "seed", "val_fraction", "test_fraction", "split_seed"});
    ds.n = get_integer(j, where, "n", ds.n);
    ds.noise = get_number(j, where, "noise", ds.noise);
    ds.seed = get_seed(j, where, "seed", ds.seed);
  } else if (kind == "idx") {
    ds.kind = DatasetSpec::Kind::Idx;
    check_keys(j, where,
               {"kind", "images", "labels", "val_fraction", "test_fraction", "split_seed"});
    ds.images = get_string(j, where, "images", "", true);
    ds.labels = get_string(j, where, "labels", "", true);
  } else {
    fail(where + ": unknown kind '" + kind + "'");
  }
  ds.val_fraction = get_number(j, where, "val_fraction", ds.val_fraction);
  ds.test_fraction = get_number(j, where, "test_fraction", ds.test_fraction);
  ds.split_seed = get_seed(j, where, "split_seed", ds.split_seed);
  if (!(ds.val_fraction >= 0.0 && ds.val_fraction < 1.0))
    fail(where + ": val_fraction must lie in [0,1)");
  if (!(ds.test_fraction >= 0.0 && ds.test_fraction < 1.0))
    fail(where + ": test_fraction must lie in [0,1)");
  if (ds.val_fraction + ds.test_fraction >= 1.0)
    fail(where + ": splits leave no training data");
  return ds;
}

ObjectiveSpec parse_objective_spec(const json& j) {
  const std::string where = "objective";
  ObjectiveSpec obj;
  const std::string kind = get_string(j, where, "kind", "", true);
  if (kind == "quadratic") {
    obj.kind = ObjectiveSpec::Kind::Quadratic;
    check_keys(j, where, {"kind", "diag"});
    if (!j.contains("diag") || !j.at("diag").is_array() || j.at("diag").empty())
      fail(where + ": quadratic needs a nonempty 'diag' array");
    obj.quadratic_diag.resize(static_cast<Index>(j.at("diag").size()));
    Index i = 0;
    for (const auto& v : j.at("diag")) {
      if (!v.is_number()) fail(where + ": 'diag' entries must be numbers");
      obj.quadratic_diag[i++] = v.get<double>();
    }
    if ((obj.quadratic_diag.array() <= 0.0).any())
      fail(where + ": 'diag' entries must be positive");
  } else if (kind == "rosenbrock") {
    obj.kind = ObjectiveSpec::Kind::Rosenbrock;
    check_keys(j, where, {"kind"});
  } else if (kind == "mlp") {
    obj.kind = ObjectiveSpec::Kind::Mlp;
    check_keys(j, where, {"kind", "layers", "activation", "loss", "init_seed", "dataset"});
    if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").size() < 2)
      fail(where + ": mlp needs a 'layers' array with at least two entries");
    for (const auto& v : j.at("layers")) {
      if (!v.is_number_integer() || v.get<long>() < 1)
        fail(where + ": 'layers' entries must be positive integers");
      obj.mlp.layer_sizes.push_back(static_cast<int>(v.get<long>()));
    }
    const std::string act = get_string(j, where, "activation", "relu");
    if (act == "relu")
      obj.mlp.activation = models::Activation::ReLU;
    else if (act == "tanh")
      obj.mlp.activation = models::Activation::Tanh;
    else
      fail(where + ": unknown activation '" + act + "'");
    const std::string loss = get_string(j, where, "loss", "cross_entropy");
    if (loss == "cross_entropy")
      obj.mlp.loss = models::Loss::CrossEntropy;
    else if (loss == "mse")
      obj.mlp.loss = models::Loss::MSE;
    else
      fail(where + ": unknown loss '" + loss + "'");
    obj.mlp.init_seed = get_seed(j, where, "init_seed", 0);
    if (!j.contains("dataset")) fail(where + ": mlp needs a 'dataset'");
    obj.dataset = parse_dataset_spec(j.at("dataset"));
  } else {
    fail(where + ": unknown kind '" + kind + "'");
  }
  return obj;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  const std::string where = "config";
  check_keys(j, where,
             {"seed", "objective", "init", "optimizer", "scheduler", "budget", "batch_size",
              "stop", "probe", "validate_every", "output"});
  ExperimentConfig cfg;
  cfg.seed = get_seed(j, where, "seed", 0);
  if (!j.contains("objective")) fail(where + ": missing 'objective'");
  cfg.objective = parse_objective_spec(j.at("objective"));
  if (j.contains("init")) {
    if (!j.at("init").is_array()) fail(where + ": 'init' must be an array");
    Vector<double> init(static_cast<Index>(j.at("init").size()));
    Index i = 0;
    for (const auto& v : j.at("init")) {
      if (!v.is_number()) fail(where + ": 'init' entries must be numbers");
      init[i++] = v.get<double>();
    }
    cfg.init = std::move(init);
  }
  if (!j.contains("optimizer")) fail(where + ": missing 'optimizer'");
  cfg.optimizer = parse_optimizer_config(j.at("optimizer"));
  if (j.contains("scheduler")) cfg.scheduler = parse_scheduler_config(j.at("scheduler"));
  if (j.contains("budget")) {
    check_keys(j.at("budget"), "budget", {"steps", "epochs"});
    cfg.max_steps = get_integer(j.at("budget"), "budget", "steps", 0);
    cfg.epochs = static_cast<int>(get_integer(j.at("budget"), "budget", "epochs", 0));
  }
  cfg.batch_size = get_integer(j, where, "batch_size", 0);
  if (j.contains("stop")) {
    check_keys(j.at("stop"), "stop", {"train_loss_below", "train_accuracy_above"});
    if (j.at("stop").contains("train_loss_below"))
      cfg.stop.train_loss_below = get_number(j.at("stop"), "stop", "train_loss_below", 0.0);
    if (j.at("stop").contains("train_accuracy_above"))
      cfg.stop.train_accuracy_above = get_number(j.at("stop"), "stop", "train_accuracy_above", 0.0);
  }
  if (j.contains("probe")) {
    const json& p = j.at("probe");
    check_keys(p, "probe", {"enabled", "every_k", "tol", "max_iters", "seed", "eps", "hvp_step"});
    cfg.probe.enabled = get_bool(p, "probe", "enabled", true);
    cfg.probe.every_k = static_cast<int>(get_integer(p, "probe", "every_k", cfg.probe.every_k));
    cfg.probe.tol = get_number(p, "probe", "tol", cfg.probe.tol);
    cfg.probe.max_iters = static_cast<int>(get_integer(p, "probe", "max_iters", cfg.probe.max_iters));
    cfg.probe.seed = get_seed(p, "probe", "seed", cfg.probe.seed);
    if (p.contains("eps")) cfg.probe.eps = get_number(p, "probe", "eps", 0.0);
    cfg.probe.hvp_step = get_number(p, "probe", "hvp_step", cfg.probe.hvp_step);
  }
  cfg.validate_every = static_cast<int>(get_integer(j, where, "validate_every", cfg.validate_every));
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"path", "format"});
    cfg.output.path = get_string(o, "output", "path", "");
    const std::string fmt = get_string(o, "output", "format", "csv");
    if (fmt == "csv")
      cfg.output.format = TraceFormat::Csv;
    else if (fmt == "jsonl")
      cfg.output.format = TraceFormat::Jsonl;
    else
      fail("output: unknown format '" + fmt + "'");
  }
  validate_experiment_config(cfg);
  return cfg;
}

void validate_experiment_config(const ExperimentConfig& cfg) {
  optim::validate(cfg.optimizer);
  optim::validate(cfg.scheduler);
  const bool analytic = cfg.objective.kind != ObjectiveSpec::Kind::Mlp;
  if (analytic) {
    if (cfg.max_steps < 1) fail("budget: analytic objectives need a positive 'steps'");
    if (cfg.epochs != 0) fail("budget: analytic objectives take 'steps', not 'epochs'");
    if (cfg.init && cfg.objective.kind == ObjectiveSpec::Kind::Rosenbrock && cfg.init->size() != 2)
      fail("init: rosenbrock is two-dimensional");
    if (cfg.init && cfg.objective.kind == ObjectiveSpec::Kind::Quadratic &&
        cfg.init->size() != cfg.objective.quadratic_diag.size())
      fail("init: size does not match the quadratic dimension");
  } else {
    if (cfg.epochs < 1) fail("budget: dataset objectives need a positive 'epochs'");
    if (cfg.max_steps < 0) fail("budget: 'steps' must be nonnegative");
    if (cfg.init) fail("init: dataset objectives initialize from the model seed");
    models::validate(cfg.objective.mlp);
    if (cfg.objective.dataset.kind == DatasetSpec::Kind::Idx) {
      for (const auto& p : {cfg.objective.dataset.images, cfg.objective.dataset.labels})
        if (!std::filesystem::exists(p)) fail("dataset: file '" + p + "' does not exist");
    }
  }
  if (cfg.batch_size < 0) fail("batch_size must be nonnegative");
  if (cfg.probe.every_k < 1) fail("probe: every_k must be positive");
  if (cfg.probe.max_iters < 1) fail("probe: max_iters must be positive");
  if (!(cfg.probe.tol > 0.0)) fail("probe: tol must be positive");
  if (cfg.probe.eps && !(*cfg.probe.eps > 0.0)) fail("probe: eps must be positive");
  if (cfg.validate_every < 1) fail("validate_every must be positive");
  if (cfg.stop.train_loss_below && !(*cfg.stop.train_loss_below > 0.0))
    fail("stop: train_loss_below must be positive");
  if (cfg.stop.train_accuracy_above &&
      !(*cfg.stop.train_accuracy_above > 0.0 && *cfg.stop.train_accuracy_above <= 1.0))
    fail("stop: train_accuracy_above must lie in (0,1]");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(load_json_file(path));
}

json optimizer_config_to_json(const optim::OptimizerConfig<double>& cfg) {
  const char* variant = nullptr;
  switch (cfg.variant) {
    case optim::Variant::VRAdam: variant = "vradam"; break;
    case optim::Variant::AdamW: variant = "adamw"; break;
    case optim::Variant::SGDNesterov: variant = "sgd_nesterov"; break;
    case optim::Variant::RMSProp: variant = "rmsprop"; break;
    case optim::Variant::VRMomentum: variant = "vrmomentum"; break;
    case optim::Variant::Momentum: variant = "momentum"; break;
  }
  json j;
  j["variant"] = variant;
  j["alpha0"] = cfg.alpha0;
  j["alpha1"] = cfg.alpha1;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["beta3"] = cfg.beta3;
  j["power"] = cfg.power;
  j["normgrad"] = cfg.normgrad;
  j["epsilon"] = cfg.epsilon;
  j["weight_decay"] = cfg.weight_decay;
  j["sgd_momentum"] = cfg.sgd_momentum;
  j["sgd_nesterov"] = cfg.sgd_nesterov;
  j["rmsprop_alpha"] = cfg.rmsprop_alpha;
  j["rmsprop_momentum"] = cfg.rmsprop_momentum;
  return j;
}

json scheduler_config_to_json(const optim::SchedulerConfig<double>& sch) {
  json j;
  j["kind"] = sch.kind == optim::SchedulerKind::Constant ? "constant" : "warmup_cosine";
  if (sch.kind == optim::SchedulerKind::WarmupCosine) {
    j["warmup_epochs"] = sch.warmup_epochs;
    j["warmup_factor"] = sch.warmup_factor;
    j["eta_min"] = sch.eta_min;
    j["total_epochs"] = sch.total_epochs;
  }
  return j;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  json obj;
  switch (cfg.objective.kind) {
    case ObjectiveSpec::Kind::Quadratic: {
      obj["kind"] = "quadratic";
      obj["diag"] = std::vector<double>(cfg.objective.quadratic_diag.begin(),
                                        cfg.objective.quadratic_diag.end());
      break;
    }
    case ObjectiveSpec::Kind::Rosenbrock: obj["kind"] = "rosenbrock"; break;
    case ObjectiveSpec::Kind::Mlp: {
      obj["kind"] = "mlp";
      obj["layers"] = cfg.objective.mlp.layer_sizes;
      obj["activation"] = cfg.objective.mlp.activation == models::Activation::ReLU ? "relu" : "tanh";
      obj["loss"] = cfg.objective.mlp.loss == models::Loss::CrossEntropy ? "cross_entropy" : "mse";
      obj["init_seed"] = cfg.objective.mlp.init_seed;
      json ds;
      const DatasetSpec& d = cfg.objective.dataset;
      switch (d.kind) {
        case DatasetSpec::Kind::Blobs:
          ds["kind"] = "blobs";
          ds["n"] = d.n;
          ds["classes"] = d.classes;
          ds["dim"] = d.dim;
          ds["seed"] = d.seed;
          break;
        case DatasetSpec::Kind::TwoMoons:
          ds["kind"] = "two_moons";
          ds["n"] = d.n;
          ds["noise"] = d.noise;
          ds["seed"] = d.seed;
          break;
        case DatasetSpec::Kind::Idx:
          ds["kind"] = "idx";
          ds["images"] = d.images;
          ds["labels"] = d.labels;
          break;
      }
      ds["val_fraction"] = d.val_fraction;
      ds["test_fraction"] = d.test_fraction;
      ds["split_seed"] = d.split_seed;
      obj["dataset"] = ds;
      break;
    }
  }
  j["objective"] = obj;
  if (cfg.init) j["init"] = std::vector<double>(cfg.init->begin(), cfg.init->end());
  j["optimizer"] = optimizer_config_to_json(cfg.optimizer);
  j["scheduler"] = scheduler_config_to_json(cfg.scheduler);
  json budget;
  if (cfg.max_steps > 0) budget["steps"] = cfg.max_steps;
  if (cfg.epochs > 0) budget["epochs"] = cfg.epochs;
  j["budget"] = budget;
  j["batch_size"] = cfg.batch_size;
  if (cfg.stop.train_loss_below || cfg.stop.train_accuracy_above) {
    json stop;
    if (cfg.stop.train_loss_below) stop["train_loss_below"] = *cfg.stop.train_loss_below;
    if (cfg.stop.train_accuracy_above) stop["train_accuracy_above"] = *cfg.stop.train_accuracy_above;
    j["stop"] = stop;
  }
  if (cfg.probe.enabled) {
    json p;
    p["enabled"] = true;
    p["every_k"] = cfg.probe.every_k;
    p["tol"] = cfg.probe.tol;
    p["max_iters"] = cfg.probe.max_iters;
    p["seed"] = cfg.probe.seed;
    if (cfg.probe.eps) p["eps"] = *cfg.probe.eps;
    if (cfg.probe.hvp_step > 0.0) p["hvp_step"] = cfg.probe.hvp_step;
    j["probe"] = p;
  }
  j["validate_every"] = cfg.validate_every;
  if (!cfg.output.path.empty()) {
    json o;
    o["path"] = cfg.output.path;
    o["format"] = cfg.output.format == TraceFormat::Csv ? "csv" : "jsonl";
    j["output"] = o;
  }
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = experiment_config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vralab::harness
