#include "vralab/harness/presets.hpp"

#include "vralab/harness/config.hpp"

namespace vralab::harness {

namespace {

using optim::OptimizerConfig;
using optim::SchedulerConfig;
using optim::SchedulerKind;
using optim::Variant;

SchedulerConfig<double> warmup_cosine_100() {
  SchedulerConfig<double> s;
  s.kind = SchedulerKind::WarmupCosine;
  s.warmup_epochs = 5;
  s.warmup_factor = 0.1;
  s.eta_min = 1e-5;
  s.total_epochs = 100;
  return s;
}

std::vector<Preset> build_presets() {
  std::vector<Preset> out;

  // CNN on CIFAR-10: 100 epochs, batch 1024, warmup-cosine schedule,
  // weight decay 1e-5 across optimizers.
  {
    Preset p;
    p.name = "cifar-vradam";
    p.note = "CNN image classification, velocity-regulated Adam";
    p.optimizer.variant = Variant::VRAdam;
    p.optimizer.alpha0 = 0.0846;
    p.optimizer.beta3 = 1.015;
    p.optimizer.normgrad = true;
    p.optimizer.alpha1 = 29;
    p.optimizer.weight_decay = 1e-5;
    p.scheduler = warmup_cosine_100();
    p.epochs = 100;
    p.batch_size = 1024;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "cifar-adamw";
    p.note = "CNN image classification, AdamW baseline";
    p.optimizer.variant = Variant::AdamW;
    p.optimizer.alpha0 = 0.0625;
    p.optimizer.weight_decay = 1e-5;
    p.scheduler = warmup_cosine_100();
    p.epochs = 100;
    p.batch_size = 1024;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "cifar-sgd";
    p.note = "CNN image classification, SGD with Nesterov momentum";
    p.optimizer.variant = Variant::SGDNesterov;
    p.optimizer.alpha0 = 0.00784;
    p.optimizer.sgd_momentum = 0.9;
    p.optimizer.sgd_nesterov = true;
    p.optimizer.weight_decay = 1e-5;
    p.scheduler = warmup_cosine_100();
    p.epochs = 100;
    p.batch_size = 1024;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "cifar-rmsprop";
    p.note = "CNN image classification, RMSProp baseline";
    p.optimizer.variant = Variant::RMSProp;
    p.optimizer.alpha0 = 1.78e-4;
    p.optimizer.rmsprop_alpha = 0.99;
    p.optimizer.weight_decay = 1e-5;
    p.scheduler = warmup_cosine_100();
    p.epochs = 100;
    p.batch_size = 1024;
    out.push_back(p);
  }

  // Transformer language modeling: 100 epochs, batch 32, seed 0,
  // warmup-cosine schedule.
  {
    Preset p;
    p.name = "wikitext-vradam";
    p.note = "transformer language modeling, velocity-regulated Adam";
    p.optimizer.variant = Variant::VRAdam;
    p.optimizer.alpha0 = 1.55e-5;
    p.optimizer.beta3 = 3.35;
    p.optimizer.normgrad = false;
    p.optimizer.alpha1 = 7;
    p.optimizer.weight_decay = 1e-5;
    p.scheduler = warmup_cosine_100();
    p.epochs = 100;
    p.batch_size = 32;
    p.seed = 0;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "wikitext-adamw";
    p.note = "transformer language modeling, AdamW baseline";
    p.optimizer.variant = Variant::AdamW;
    p.optimizer.alpha0 = 1.661e-5;
    p.optimizer.weight_decay = 1e-5;
    p.scheduler = warmup_cosine_100();
    p.epochs = 100;
    p.batch_size = 32;
    p.seed = 0;
    out.push_back(p);
  }

  // Diffusion on MNIST: 50 epochs, batch 128, seed 42, constant rate,
  // weight decay 1e-5 across optimizers.
  {
    Preset p;
    p.name = "diffusion-vradam";
    p.note = "MNIST diffusion, velocity-regulated Adam";
    p.optimizer.variant = Variant::VRAdam;
    p.optimizer.alpha0 = 3.38e-5;
    p.optimizer.beta3 = 1.99;
    p.optimizer.normgrad = true;
    p.optimizer.alpha1 = 6;
    p.optimizer.weight_decay = 1e-5;
    p.epochs = 50;
    p.batch_size = 128;
    p.seed = 42;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "diffusion-adamw";
    p.note = "MNIST diffusion, AdamW baseline";
    p.optimizer.variant = Variant::AdamW;
    p.optimizer.alpha0 = 3.24e-5;
    p.optimizer.weight_decay = 1e-5;
    p.epochs = 50;
    p.batch_size = 128;
    p.seed = 42;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "diffusion-sgd";
    p.note = "MNIST diffusion, SGD with Nesterov momentum";
    p.optimizer.variant = Variant::SGDNesterov;
    p.optimizer.alpha0 = 0.00227;
    p.optimizer.sgd_momentum = 0.2;
    p.optimizer.sgd_nesterov = true;
    p.optimizer.weight_decay = 1e-5;
    p.epochs = 50;
    p.batch_size = 128;
    p.seed = 42;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "diffusion-rmsprop";
    p.note = "MNIST diffusion, RMSProp baseline";
    p.optimizer.variant = Variant::RMSProp;
    p.optimizer.alpha0 = 1.81e-5;
    p.optimizer.rmsprop_alpha = 0.1;
    p.optimizer.rmsprop_momentum = 0.2;
    p.optimizer.weight_decay = 1e-5;
    p.epochs = 50;
    p.batch_size = 128;
    p.seed = 42;
    out.push_back(p);
  }

  // GFlowNet: reported optimizer settings only; no budget pinned.
  {
    Preset p;
    p.name = "gflownet-vradam";
    p.note = "GFlowNet sampling, velocity-regulated Adam";
    p.optimizer.variant = Variant::VRAdam;
    p.optimizer.alpha0 = 0.01;
    p.optimizer.beta3 = 1;
    p.optimizer.normgrad = false;
    p.optimizer.alpha1 = 19;
    p.optimizer.weight_decay = 1e-5;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "gflownet-adamw";
    p.note = "GFlowNet sampling, AdamW baseline";
    p.optimizer.variant = Variant::AdamW;
    p.optimizer.alpha0 = 0.01;
    p.optimizer.weight_decay = 1e-5;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "gflownet-sgd";
    p.note = "GFlowNet sampling, SGD with Nesterov momentum";
    p.optimizer.variant = Variant::SGDNesterov;
    p.optimizer.alpha0 = 0.01;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "gflownet-rmsprop";
    p.note = "GFlowNet sampling, RMSProp baseline";
    p.optimizer.variant = Variant::RMSProp;
    p.optimizer.alpha0 = 0.01;
    out.push_back(p);
  }

  // Sharpness tracking: 20000 steps of full-resolution logging on an MSE
  // objective, batch 1000, seed 0. The Adam run matches the velocity-
  // regulated rate so the comparison isolates the damping term.
  {
    Preset p;
    p.name = "eos-vradam";
    p.note = "sharpness tracking, velocity-regulated Adam";
    p.optimizer.variant = Variant::VRAdam;
    p.optimizer.alpha0 = 0.002;
    p.optimizer.beta3 = 1;
    p.optimizer.normgrad = false;
    p.optimizer.alpha1 = 19;
    p.optimizer.epsilon = 1e-7;
    p.steps = 20000;
    p.batch_size = 1000;
    p.seed = 0;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "eos-adam";
    p.note = "sharpness tracking, Adam at the matched base rate";
    p.optimizer.variant = Variant::AdamW;
    p.optimizer.alpha0 = 0.002;
    p.optimizer.epsilon = 1e-7;
    p.steps = 20000;
    p.batch_size = 1000;
    p.seed = 0;
    out.push_back(p);
  }

  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = build_presets();
  return table;
}

const Preset* find_preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

nlohmann::json preset_to_json(const Preset& p) {
  nlohmann::json j;
  j["name"] = p.name;
  j["note"] = p.note;
  j["optimizer"] = optimizer_config_to_json(p.optimizer);
  j["scheduler"] = scheduler_config_to_json(p.scheduler);
  nlohmann::json budget = nlohmann::json::object();
  if (p.steps > 0) budget["steps"] = p.steps;
  if (p.epochs > 0) budget["epochs"] = p.epochs;
  if (!budget.empty()) j["budget"] = budget;
  if (p.batch_size > 0) j["batch_size"] = p.batch_size;
  j["seed"] = p.seed;
  return j;
}

}  // namespace vralab::harness
