#include "vralab/harness/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vralab/dynamics.hpp"
#include "vralab/errors.hpp"
#include "vralab/harness/config.hpp"
#include "vralab/harness/experiment.hpp"
#include "vralab/harness/presets.hpp"
#include "vralab/harness/sweep.hpp"
#include "vralab/harness/trace.hpp"
#include "vralab/probes.hpp"

namespace vralab::harness {

namespace {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed while writing '" + path + "'");
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

TraceFormat parse_format(const std::string& name) {
  return name == "jsonl" ? TraceFormat::Jsonl : TraceFormat::Csv;
}

int cmd_run(const std::string& config_path, bool has_seed, std::uint64_t seed,
            const std::string& out, const std::string& format) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (has_seed) cfg.seed = seed;
  if (!out.empty()) cfg.output.path = out;
  if (!format.empty()) cfg.output.format = parse_format(format);
  const RunResult res = run_experiment(cfg);
  std::cout << summary_to_json(res.summary).dump(2) << "\n";
  std::cout << "wall_seconds " << res.summary.wall_seconds << "\n";
  return res.summary.diverged ? 2 : 0;
}

int cmd_sweep(const std::string& spec_path, bool has_seed, std::uint64_t seed,
              const std::string& out) {
  SweepSpec spec = load_sweep_spec(spec_path);
  if (has_seed) spec.seed = seed;
  if (!out.empty()) spec.out_dir = out;
  if (!spec.out_dir.empty()) ensure_directory(spec.out_dir);

  const std::vector<TrialResult> ranked = random_search(spec);
  const json manifest = sweep_manifest(ranked);
  if (spec.out_dir.empty()) {
    std::cout << manifest.dump(2) << "\n";
  } else {
    const std::string path = spec.out_dir + "/manifest.json";
    write_text_file(path, manifest.dump(2) + "\n");
    for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
      const TrialResult& t = ranked[rank];
      std::cout << "rank " << rank << "  trial " << t.index << "  best_val_loss ";
      if (std::isfinite(t.metric))
        std::cout << t.metric;
      else
        std::cout << (t.error.empty() ? "diverged" : "failed");
      std::cout << "\n";
    }
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

double json_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("portrait: '") + key + "' must be a number");
  return j.at(key).get<double>();
}

long json_integer(const json& j, const char* key, long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError(std::string("portrait: '") + key + "' must be an integer");
  return j.at(key).get<long>();
}

std::pair<double, double> json_range(const json& j, const char* key, double lo, double hi) {
  if (!j.contains(key)) return {lo, hi};
  const json& r = j.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
    throw ConfigError(std::string("portrait: '") + key + "' must be a [lo, hi] pair");
  return {r[0].get<double>(), r[1].get<double>()};
}

int cmd_portrait(const std::string& config_path, const std::string& out_dir) {
  const json j = config_path.empty() ? json::object() : load_json_file(config_path);
  check_keys(j, "portrait",
             {"mass", "beta3", "curvature", "x_range", "v_range", "grid", "trajectories", "dt",
              "steps", "integrator"});

  dynamics::KineticConfig<double> k;
  k.mass = json_number(j, "mass", 1.0);
  k.beta3 = json_number(j, "beta3", 1.0);
  dynamics::validate(k);
  const double curvature = json_number(j, "curvature", 1.0);
  if (!(curvature > 0.0)) throw ConfigError("portrait: 'curvature' must be positive");
  const auto [x_lo, x_hi] = json_range(j, "x_range", -2.0, 2.0);
  const auto [v_lo, v_hi] = json_range(j, "v_range", -2.0, 2.0);
  const int grid = static_cast<int>(json_integer(j, "grid", 17));
  const double dt = json_number(j, "dt", 0.01);
  const long steps = json_integer(j, "steps", 2000);
  if (!(dt > 0.0)) throw ConfigError("portrait: 'dt' must be positive");
  if (steps < 0) throw ConfigError("portrait: 'steps' must be nonnegative");
  const std::string integrator_name =
      j.contains("integrator") ? j.at("integrator").get<std::string>() : "rk4";
  dynamics::Integrator method;
  if (integrator_name == "rk4")
    method = dynamics::Integrator::RK4;
  else if (integrator_name == "semi_implicit")
    method = dynamics::Integrator::SemiImplicitEuler;
  else
    throw ConfigError("portrait: unknown integrator '" + integrator_name + "'");

  std::vector<std::pair<double, double>> starts;
  if (j.contains("trajectories")) {
    if (!j.at("trajectories").is_array())
      throw ConfigError("portrait: 'trajectories' must be an array of [x, v] pairs");
    for (const auto& item : j.at("trajectories")) {
      if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number())
        throw ConfigError("portrait: each trajectory start must be an [x, v] pair");
      starts.emplace_back(item[0].get<double>(), item[1].get<double>());
    }
  } else {
    starts.emplace_back(1.0, 0.0);
  }

  auto grad = [curvature](const Vector<double>& x) { return Vector<double>(curvature * x); };
  auto potential = [curvature](const Vector<double>& x) {
    return 0.5 * curvature * x.squaredNorm();
  };

  ensure_directory(out_dir);

  const auto samples = dynamics::phase_portrait(x_lo, x_hi, v_lo, v_hi, grid, grid, k, grad);
  std::string field = "x,v,dxdt,dvdt\n";
  for (const auto& s : samples)
    field += format_number(s.x) + "," + format_number(s.v) + "," + format_number(s.dx) + "," +
             format_number(s.dv) + "\n";
  write_text_file(out_dir + "/field.csv", field);
  std::cout << "wrote " << out_dir << "/field.csv (" << samples.size() << " samples)\n";

  for (std::size_t i = 0; i < starts.size(); ++i) {
    dynamics::PhaseState<double> s{Vector<double>::Constant(1, starts[i].first),
                                   Vector<double>::Constant(1, starts[i].second)};
    const auto path = dynamics::integrate_trajectory(s, dt, steps, k, grad, method);
    std::string csv = "t,x,v,energy\n";
    for (std::size_t n = 0; n < path.size(); ++n)
      csv += format_number(static_cast<double>(n) * dt) + "," + format_number(path[n].x[0]) + "," +
             format_number(path[n].v[0]) + "," +
             format_number(dynamics::energy(path[n], k, potential)) + "\n";
    const std::string traj_path = out_dir + "/trajectory_" + std::to_string(i) + ".csv";
    write_text_file(traj_path, csv);
    std::cout << "wrote " << traj_path << " (" << path.size() << " states)\n";
  }
  return 0;
}

Vector<double> read_parameter_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw ConfigError("parameter file '" + path + "' contains non-numeric data");
  if (values.empty()) throw ConfigError("parameter file '" + path + "' is empty");
  Vector<double> theta(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) theta[static_cast<Index>(i)] = values[i];
  return theta;
}

int cmd_probe(const std::string& config_path, const std::string& at_path, const std::string& out) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  const BuiltObjective built = build_objective(cfg);
  const Vector<double> theta = at_path.empty() ? built.init : read_parameter_file(at_path);
  if (theta.size() != built.train.dim)
    throw ConfigError("probe: checkpoint has " + std::to_string(theta.size()) +
                      " parameters, objective expects " + std::to_string(built.train.dim));

  probes::PowerIterationOptions<double> opt;
  opt.max_iters = cfg.probe.max_iters;
  opt.tol = cfg.probe.tol;
  opt.seed = cfg.probe.seed;
  auto grad = [&](const Vector<double>& th) { return built.train.grad(th, {}); };
  auto apply = [&](const Vector<double>& u) {
    return probes::hvp<double>(grad, theta, u, cfg.probe.hvp_step);
  };
  // No optimizer state exists at a bare checkpoint; probe the raw spectrum.
  const Vector<double> identity_m = Vector<double>::Zero(theta.size());
  const double eps = cfg.probe.eps ? *cfg.probe.eps : 1.0;
  const auto est = probes::preconditioned_power_iteration<double>(apply, identity_m, eps, opt);

  json report;
  report["lambda_max"] = est.lambda_max;
  report["iterations"] = est.iterations;
  report["residual"] = est.residual;
  report["converged"] = est.residual <= opt.tol;
  report["aeos_threshold"] =
      probes::aeos_threshold(stability_momentum(cfg.optimizer), cfg.optimizer.alpha0);
  const std::string text = report.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
  return 0;
}

int cmd_presets(const std::string& action, const std::string& name) {
  if (action == "list") {
    for (const Preset& p : presets()) std::cout << p.name << "  " << p.note << "\n";
    return 0;
  }
  const Preset* p = find_preset(name);
  if (p == nullptr) throw ConfigError("unknown preset '" + name + "'");
  std::cout << preset_to_json(*p).dump(2) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"optimization lab for velocity-regulated adaptive training"};
  app.require_subcommand(1);

  std::string run_config, run_out, run_format;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "run one experiment config");
  run_cmd->add_option("config", run_config, "experiment config JSON file")->required();
  run_cmd->add_option("--seed", run_seed, "override the config seed");
  run_cmd->add_option("--out", run_out, "override the trace output path");
  run_cmd->add_option("--format", run_format, "trace format")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  std::string sweep_spec, sweep_out;
  std::uint64_t sweep_seed = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "random hyperparameter search");
  sweep_cmd->add_option("spec", sweep_spec, "sweep spec JSON file")->required();
  sweep_cmd->add_option("--seed", sweep_seed, "override the sweep seed");
  sweep_cmd->add_option("--out", sweep_out, "directory for trial traces and the manifest");

  std::string portrait_config, portrait_out = "portrait";
  auto* portrait_cmd = app.add_subcommand("portrait", "phase-portrait field and trajectories");
  portrait_cmd->add_option("config", portrait_config, "dynamics config JSON file (optional)");
  portrait_cmd->add_option("--out", portrait_out, "output directory");

  std::string probe_config, probe_at, probe_out;
  auto* probe_cmd = app.add_subcommand("probe", "one-shot sharpness at a checkpoint");
  probe_cmd->add_option("config", probe_config, "experiment config JSON file")->required();
  probe_cmd->add_option("--at", probe_at, "parameter file (whitespace-separated doubles)");
  probe_cmd->add_option("--out", probe_out, "write the report here instead of stdout");

  auto* presets_cmd = app.add_subcommand("presets", "named training recipes");
  auto* presets_list = presets_cmd->add_subcommand("list", "list preset names");
  std::string preset_name;
  auto* presets_show = presets_cmd->add_subcommand("show", "print one preset as JSON");
  presets_show->add_option("name", preset_name, "preset name")->required();
  presets_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(run_cmd))
      return cmd_run(run_config, run_cmd->count("--seed") > 0, run_seed, run_out, run_format);
    if (app.got_subcommand(sweep_cmd))
      return cmd_sweep(sweep_spec, sweep_cmd->count("--seed") > 0, sweep_seed, sweep_out);
    if (app.got_subcommand(portrait_cmd)) return cmd_portrait(portrait_config, portrait_out);
    if (app.got_subcommand(probe_cmd)) return cmd_probe(probe_config, probe_at, probe_out);
    if (app.got_subcommand(presets_cmd))
      return cmd_presets(presets_cmd->got_subcommand(presets_list) ? "list" : "show", preset_name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace vralab::harness
