#include "vralab/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include "vralab/errors.hpp"
#include "vralab/idx.hpp"
#include "vralab/optimizers.hpp"
#include "vralab/probes.hpp"
#include "vralab/rng.hpp"
#include "vralab/scheduler.hpp"

namespace vralab::harness {

namespace {

models::Dataset build_raw_dataset(const DatasetSpec& ds) {
  switch (ds.kind) {
    case DatasetSpec::Kind::Blobs: return models::make_blobs(ds.n, ds.classes, ds.dim, ds.seed);
    case DatasetSpec::Kind::TwoMoons: return models::make_two_moons(ds.n, ds.noise, ds.seed);
    case DatasetSpec::Kind::Idx: return models::load_idx(ds.images, ds.labels);
  }
  throw ConfigError("dataset: unknown kind");
}

bool adam_family(optim::Variant v) {
  return v == optim::Variant::VRAdam || v == optim::Variant::AdamW ||
         v == optim::Variant::RMSProp;
}

}  // namespace

double stability_momentum(const optim::OptimizerConfig<double>& cfg) {
  switch (cfg.variant) {
    case optim::Variant::SGDNesterov: return cfg.sgd_momentum;
    case optim::Variant::RMSProp: return cfg.rmsprop_momentum;
    default: return cfg.beta1;
  }
}

BuiltObjective build_objective(const ExperimentConfig& cfg) {
  BuiltObjective built;
  switch (cfg.objective.kind) {
    case ObjectiveSpec::Kind::Quadratic: {
      const Index d = cfg.objective.quadratic_diag.size();
      Matrix<double> a = Matrix<double>::Zero(d, d);
      a.diagonal() = cfg.objective.quadratic_diag;
      built.train = models::quadratic_objective(a);
      built.init = cfg.init ? *cfg.init : Vector<double>::Ones(d);
      return built;
    }
    case ObjectiveSpec::Kind::Rosenbrock: {
      built.train = models::rosenbrock();
      built.init = cfg.init ? *cfg.init : Vector<double>::Zero(2);
      return built;
    }
    case ObjectiveSpec::Kind::Mlp: break;
  }

  const DatasetSpec& spec = cfg.objective.dataset;
  models::Dataset rest = build_raw_dataset(spec);
  models::Dataset test, val;
  if (spec.test_fraction > 0.0) {
    auto parts = models::split_dataset(rest, spec.test_fraction, spec.split_seed);
    rest = std::move(parts.first);
    test = std::move(parts.second);
  }
  if (spec.val_fraction > 0.0) {
    auto parts = models::split_dataset(rest, spec.val_fraction, mix_seed(spec.split_seed, 1));
    rest = std::move(parts.first);
    val = std::move(parts.second);
  }
  if (rest.size() == 0) throw ConfigError("dataset: splits left no training rows");

  // Weights draw from the run seed so seed replicates start from different
  // points; init_seed selects a substream within one run seed.
  models::MlpSpec mspec = cfg.objective.mlp;
  mspec.init_seed = mix_seed(cfg.seed, mspec.init_seed);

  built.train_data = std::make_shared<const models::Dataset>(std::move(rest));
  if (val.size() > 0) built.val_data = std::make_shared<const models::Dataset>(std::move(val));
  if (test.size() > 0) built.test_data = std::make_shared<const models::Dataset>(std::move(test));
  built.train = models::mlp_objective(mspec, built.train_data);
  built.init = models::mlp_init(mspec);
  built.mlp = mspec;
  built.classification = true;
  return built;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  BuiltObjective built = build_objective(cfg);
  const bool analytic = built.train_data == nullptr;

  Vector<double> theta = built.init;
  auto state = optim::make_state<double>(theta.size());

  probes::SharpnessProbe probe;
  probe.options.max_iters = cfg.probe.max_iters;
  probe.options.tol = cfg.probe.tol;
  probe.options.seed = cfg.probe.seed;
  const double probe_eps =
      cfg.probe.eps ? *cfg.probe.eps : (adam_family(cfg.optimizer.variant) ? cfg.optimizer.epsilon : 1.0);
  const double beta_for_threshold = stability_momentum(cfg.optimizer);

  RunResult result;
  result.summary.config_hash = config_hash(cfg);
  std::vector<TraceRecord>& rows = result.trace;
  bool& diverged = result.summary.diverged;

  auto full_grad = [&](const Vector<double>& th) { return built.train.grad(th, {}); };

  auto eval_split = [&](const char* split, const models::Dataset& data, long step, int epoch) {
    TraceRecord r;
    r.step = step;
    r.epoch = epoch;
    r.split = split;
    r.loss = models::mlp_forward(built.mlp, theta, data.inputs, data.labels, {}).loss;
    r.accuracy = models::mlp_accuracy(built.mlp, theta, data.inputs, data.labels, {});
    return r;
  };

  const long epoch_count = analytic ? cfg.max_steps : cfg.epochs;
  long step = 0;
  bool stop = false;

  for (long e = 0; e < epoch_count && !stop; ++e) {
    const double scale =
        optim::scheduled_lr(static_cast<int>(e), cfg.optimizer.alpha0, cfg.scheduler) /
        cfg.optimizer.alpha0;

    std::vector<std::vector<Index>> batches;
    if (analytic || cfg.batch_size == 0)
      batches.push_back({});  // empty batch = the full set
    else
      batches = models::minibatches(built.train_data->size(), cfg.batch_size, cfg.seed, e);

    for (const auto& batch : batches) {
      ++step;
      const models::BatchIndices bspan(batch);

      TraceRecord r;
      r.step = step;
      r.epoch = static_cast<int>(e);
      r.split = "train";
      r.loss = built.train.value(theta, bspan);
      if (built.classification)
        r.accuracy = models::mlp_accuracy(built.mlp, theta, built.train_data->inputs,
                                          built.train_data->labels, bspan);
      if (!std::isfinite(r.loss)) {
        diverged = true;
        rows.push_back(std::move(r));
        stop = true;
        break;
      }

      const Vector<double> g = built.train.grad(theta, bspan);
      if (!g.allFinite()) {
        diverged = true;
        rows.push_back(std::move(r));
        stop = true;
        break;
      }

      optim::StepOutcome<double> out;
      try {
        out = optim::step<double>(theta, g, state, cfg.optimizer, scale);
      } catch (const DivergenceError&) {
        diverged = true;
        rows.push_back(std::move(r));
        stop = true;
        break;
      }
      r.effective_lr = out.effective_lr;
      r.grad_norm = std::sqrt(out.grad_sq_norm);
      r.velocity_norm = std::sqrt(out.velocity_sq_norm);
      theta = std::move(out.new_params);

      // Squared norms can overflow even while the components stay finite;
      // that still counts as divergence rather than a silent inf in the trace.
      if (!std::isfinite(*r.grad_norm) || !std::isfinite(*r.velocity_norm)) {
        diverged = true;
        rows.push_back(std::move(r));
        stop = true;
        break;
      }

      if (!theta.allFinite()) {
        diverged = true;
        rows.push_back(std::move(r));
        stop = true;
        break;
      }

      // Probe the fresh iterate so the preconditioner is never stale.
      if (cfg.probe.enabled && step % cfg.probe.every_k == 0) {
        try {
          const Vector<double> pm = adam_family(cfg.optimizer.variant)
                                        ? state.m
                                        : Vector<double>(Vector<double>::Zero(theta.size()));
          const auto est = probe.measure(full_grad, theta, pm, probe_eps, cfg.probe.hvp_step);
          r.lambda_max = est.lambda_max;
          if (out.effective_lr > 0.0)
            r.aeos_threshold = probes::aeos_threshold(beta_for_threshold, out.effective_lr);
        } catch (const DivergenceError&) {
          diverged = true;
          rows.push_back(std::move(r));
          stop = true;
          break;
        }
      }

      const double train_loss = r.loss;
      const auto train_acc = r.accuracy;
      rows.push_back(std::move(r));

      if (cfg.stop.train_loss_below && train_loss < *cfg.stop.train_loss_below) stop = true;
      if (cfg.stop.train_accuracy_above && train_acc &&
          *train_acc > *cfg.stop.train_accuracy_above)
        stop = true;

      if (analytic && step % cfg.validate_every == 0) {
        TraceRecord v;
        v.step = step;
        v.epoch = static_cast<int>(e);
        v.split = "val";
        v.loss = built.train.value(theta, {});
        rows.push_back(std::move(v));
      }

      if (!analytic && cfg.max_steps > 0 && step >= cfg.max_steps) stop = true;
      if (stop) break;
    }

    if (!analytic && !diverged) {
      if (built.val_data) rows.push_back(eval_split("val", *built.val_data, step, static_cast<int>(e)));
      if (built.test_data)
        rows.push_back(eval_split("test", *built.test_data, step, static_cast<int>(e)));
    }
  }

  // Analytic runs close with a validation row unless one just landed.
  if (analytic && !diverged && step > 0 && step % cfg.validate_every != 0) {
    TraceRecord v;
    v.step = step;
    v.epoch = static_cast<int>(step - 1);
    v.split = "val";
    v.loss = built.train.value(theta, {});
    rows.push_back(std::move(v));
  }

  RunSummary& sum = result.summary;
  for (const TraceRecord& r : rows) {
    double* final_slot = nullptr;
    double* best_slot = nullptr;
    if (r.split == "train") {
      ++sum.steps_executed;
      final_slot = &sum.final_train_loss;
      best_slot = &sum.best_train_loss;
    } else if (r.split == "val") {
      final_slot = &sum.final_val_loss;
      best_slot = &sum.best_val_loss;
    } else {
      final_slot = &sum.final_test_loss;
      best_slot = &sum.best_test_loss;
    }
    *final_slot = r.loss;
    if (std::isfinite(r.loss) && !(r.loss >= *best_slot)) *best_slot = r.loss;
  }

  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.output.path.empty()) emit_trace(rows, cfg.output.path, cfg.output.format);
  return result;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["final_train_loss"] = s.final_train_loss;
  j["best_train_loss"] = s.best_train_loss;
  j["final_val_loss"] = s.final_val_loss;
  j["best_val_loss"] = s.best_val_loss;
  j["final_test_loss"] = s.final_test_loss;
  j["best_test_loss"] = s.best_test_loss;
  j["steps_executed"] = s.steps_executed;
  j["diverged"] = s.diverged;
  j["config_hash"] = s.config_hash;
  return j;
}

}  // namespace vralab::harness
