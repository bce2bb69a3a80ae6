// driftcast CLI: config-driven simulator + experiment runner.
//
//   driftcast simulate --config c.json [--seed N] [--out dir]
//   driftcast train    --config c.json [--seed N] [--models a,b] [--th 1,5] [--out dir]
//   driftcast evaluate --config c.json ...   (loads snapshots written by train/run)
//   driftcast run      --config c.json ...   (train + evaluate in one pass)
//   driftcast plots    --run dir             (re-merge prediction CSVs)
//
// Exit codes: 0 ok, 2 config error, 3 training divergence, 4 I/O failure.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "driftcast/experiment.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct CommonArgs {
  std::string config_path;
  std::string models;
  std::string th;
  std::string out;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool fail_fast = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config JSON");
  cmd->add_option("--models", args.models, "comma-separated model list override");
  cmd->add_option("--th", args.th, "comma-separated t_h list override");
  cmd->add_option("--out", args.out, "output directory override");
  cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
    args.has_seed = true;
  });
  cmd->add_flag("--fail-fast", args.fail_fast, "stop at the first failing cell");
}

int build_config(const CommonArgs& args, driftcast::ExperimentConfig& cfg) {
  try {
    if (!args.config_path.empty()) cfg = driftcast::experiment_from_json_file(args.config_path);
    if (args.has_seed) cfg.seed = args.seed;
    if (!args.out.empty()) cfg.out_dir = args.out;
    if (!args.models.empty()) cfg.models = split_list(args.models);
    if (!args.th.empty()) {
      cfg.t_h_list.clear();
      for (const auto& tok : split_list(args.th)) cfg.t_h_list.push_back(std::stoi(tok));
    }
    if (args.fail_fast) cfg.fail_fast = true;
    cfg.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return driftcast::kExitConfig;
  }
  return driftcast::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leeway drift forecasting pipeline"};
  app.require_subcommand(1);

  CommonArgs sim_args, train_args, eval_args, run_args;
  std::string plots_dir;

  auto* sim = app.add_subcommand("simulate", "generate the drift campaign CSVs");
  add_common(sim, sim_args);
  auto* train = app.add_subcommand("train", "train models and write snapshots");
  add_common(train, train_args);
  auto* eval = app.add_subcommand("evaluate", "evaluate from saved snapshots");
  add_common(eval, eval_args);
  auto* run = app.add_subcommand("run", "train and evaluate the full grid");
  add_common(run, run_args);
  auto* plots = app.add_subcommand("plots", "merge prediction CSVs into plot series");
  plots->add_option("--run", plots_dir, "completed run directory")->required();

  CLI11_PARSE(app, argc, argv);

  using driftcast::RunMode;
  try {
    if (sim->parsed()) {
      driftcast::ExperimentConfig cfg;
      if (int rc = build_config(sim_args, cfg); rc != 0) return rc;
      if (sim_args.has_seed) cfg.scenario.seed = sim_args.seed;
      return driftcast::run_simulate(cfg);
    }
    if (train->parsed()) {
      driftcast::ExperimentConfig cfg;
      if (int rc = build_config(train_args, cfg); rc != 0) return rc;
      return driftcast::run_experiment(cfg, RunMode::TrainOnly);
    }
    if (eval->parsed()) {
      driftcast::ExperimentConfig cfg;
      if (int rc = build_config(eval_args, cfg); rc != 0) return rc;
      return driftcast::run_experiment(cfg, RunMode::EvalOnly);
    }
    if (run->parsed()) {
      driftcast::ExperimentConfig cfg;
      if (int rc = build_config(run_args, cfg); rc != 0) return rc;
      return driftcast::run_experiment(cfg, RunMode::Full);
    }
    if (plots->parsed()) {
      driftcast::emit_plots(plots_dir);
      return driftcast::kExitOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return driftcast::kExitIo;
  }
  return driftcast::kExitOk;
}
