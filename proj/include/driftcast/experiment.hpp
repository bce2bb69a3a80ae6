#pragma once

// Experiment harness: builds (or loads) the drift campaign, runs the
// (t_h x held-out object x model) grid, and writes metrics, trajectory
// series, snapshots and a reproducibility manifest.

#include <cstdint>
#include <string>
#include <vector>

#include "driftcast/simulator.hpp"
#include "driftcast/training.hpp"

namespace driftcast {

// Exit codes shared by run_experiment and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitIo = 4;

enum class RunMode { Full, TrainOnly, EvalOnly };

struct ExperimentConfig {
  std::string data_source = "simulate";  // "simulate" | "csv"
  std::string series_dir;                // csv mode: <dir>/<object_id>.csv
  std::string catalog_path;              // empty = built-in catalog
  std::string text_backend = "builtin";  // "builtin" | "file"
  std::string embeddings_path;           // file backend
  std::vector<int> t_h_list = {1, 3, 5, 10};
  std::size_t l_e = 10;
  std::size_t l_d = 10;
  std::vector<std::string> models = {"curvefit", "rnn", "tcn", "mm-lstm", "mm-transformer"};
  double noise_factor = 0.05;
  std::uint64_t seed = 1;
  std::string out_dir = "runs/default";
  bool fail_fast = false;
  bool lstm_attention = true;  // "lstm" model name forces it off
  ScenarioConfig scenario;
  TrainConfig seq_train{.epochs = 18, .patience = 8, .max_batches_per_epoch = 16};
  TrainConfig baseline_train{.epochs = 12, .patience = 6, .max_batches_per_epoch = 32};

  void validate() const;
};

extern const std::vector<std::string> kKnownModels;

ExperimentConfig experiment_from_json_file(const std::string& path);
std::string experiment_to_json(const ExperimentConfig& cfg);

// Runs the grid; artifacts land under cfg.out_dir:
//   metrics.csv, manifest.json, snapshots/, predictions/, plots/
// Returns an exit code; failures are recorded per cell in the manifest and
// the run continues unless fail_fast is set.
int run_experiment(const ExperimentConfig& cfg, RunMode mode = RunMode::Full);

// Merges per-model prediction series into one plot CSV per (object, t_h):
// columns t, truth_x, truth_y, then <model>_x, <model>_y per model.
void emit_plots(const std::string& run_dir);

// Generates the campaign and writes one series CSV per object (simulate verb).
int run_simulate(const ExperimentConfig& cfg);

}  // namespace driftcast
