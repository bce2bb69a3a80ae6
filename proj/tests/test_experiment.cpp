#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "driftcast/experiment.hpp"
#include "driftcast/metrics.hpp"
#include "driftcast/snapshot.hpp"

using namespace driftcast;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig small_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.scenario.duration = 400.0;
  cfg.scenario.seed = 11;
  cfg.t_h_list = {1, 5};
  cfg.models = {"persistence", "curvefit"};
  cfg.seed = 11;
  cfg.out_dir = out_dir;
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("snapshot save/load round-trip with hash validation") {
  TempDir tmp("driftcast_snap_test");
  auto a = make_tensor({2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = make_tensor({1, 2}, {7.5, -0.25});
  auto path = (tmp.path / "s.json").string();
  save_snapshot(path, "unit", 42, "{\"k\":1}", {"a", "b"}, {a, b});

  auto snap = load_snapshot(path);
  CHECK(snap.kind == "unit");
  CHECK(snap.seed == 42);
  CHECK(snap.config_json == "{\"k\":1}");
  REQUIRE(snap.names.size() == 2);
  CHECK(snap.shapes[0] == std::vector<std::size_t>{2, 3});

  auto a2 = make_tensor({2, 3});
  auto b2 = make_tensor({1, 2});
  std::vector<TensorPtr> params = {a2, b2};
  restore_params(snap, {"a", "b"}, params);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a2->data[i] == a->data[i]);
  CHECK(b2->data[1] == -0.25);

  // name mismatch rejected
  CHECK_THROWS(restore_params(snap, {"a", "zzz"}, params));
  // shape mismatch rejected
  auto wrong = make_tensor({3, 2});
  std::vector<TensorPtr> bad = {wrong, b2};
  CHECK_THROWS(restore_params(snap, {"a", "b"}, bad));
}

TEST_CASE("tampered snapshot fails the hash check") {
  TempDir tmp("driftcast_snap_tamper");
  auto a = make_tensor({1, 1}, {1.0});
  auto path = (tmp.path / "s.json").string();
  save_snapshot(path, "unit", 1, "{}", {"a"}, {a});
  auto text = slurp(path);
  auto pos = text.find("{}");  // the embedded config string
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 2, "{ }");  // config no longer matches its stored hash
  std::ofstream(path, std::ios::binary) << text;
  CHECK_THROWS(load_snapshot(path));
}

TEST_CASE("config hash is stable and content sensitive") {
  CHECK(config_hash("abc") == config_hash("abc"));
  CHECK(config_hash("abc") != config_hash("abd"));
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg;
  cfg.models = {"not-a-model"};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.t_h_list = {0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.l_e = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.data_source = "csv";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // missing series_dir
}

TEST_CASE("experiment config JSON round-trip") {
  TempDir tmp("driftcast_cfg_test");
  ExperimentConfig cfg = small_config((tmp.path / "out").string());
  cfg.noise_factor = 0.07;
  cfg.seq_train.epochs = 33;
  auto path = (tmp.path / "cfg.json").string();
  std::ofstream(path) << experiment_to_json(cfg);
  auto loaded = experiment_from_json_file(path);
  CHECK(loaded.t_h_list == cfg.t_h_list);
  CHECK(loaded.models == cfg.models);
  CHECK(loaded.noise_factor == cfg.noise_factor);
  CHECK(loaded.seed == cfg.seed);
  CHECK(loaded.seq_train.epochs == 33);
  CHECK(loaded.scenario.duration == cfg.scenario.duration);
}

TEST_CASE("baseline-only experiment runs and writes the expected artifacts") {
  TempDir tmp("driftcast_exp_small");
  ExperimentConfig cfg = small_config((tmp.path / "run").string());
  int rc = run_experiment(cfg);
  CHECK(rc == kExitOk);
  CHECK(fs::exists(tmp.path / "run" / "metrics.csv"));
  CHECK(fs::exists(tmp.path / "run" / "manifest.json"));

  auto rows = read_metrics_csv((tmp.path / "run" / "metrics.csv").string());
  // 2 t_h values x 5 objects x 2 models
  CHECK(rows.size() == 20);
  for (const auto& row : rows) {
    CHECK(row.report.rmse >= 0.0);
    CHECK((row.model == "persistence" || row.model == "curvefit"));
  }

  // plots: one merged file per (object, t_h) with truth + both models
  std::size_t plot_files = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "run" / "plots")) {
    ++plot_files;
    std::ifstream in(e.path());
    std::string header;
    std::getline(in, header);
    CHECK(header.find("truth_x") != std::string::npos);
    CHECK(header.find("persistence_x") != std::string::npos);
    CHECK(header.find("curvefit_y") != std::string::npos);
  }
  CHECK(plot_files == 10);
}

TEST_CASE("rerun with the same config produces byte-identical metrics") {
  TempDir tmp("driftcast_exp_repro");
  ExperimentConfig cfg = small_config((tmp.path / "a").string());
  REQUIRE(run_experiment(cfg) == kExitOk);
  cfg.out_dir = (tmp.path / "b").string();
  REQUIRE(run_experiment(cfg) == kExitOk);
  CHECK(slurp((tmp.path / "a" / "metrics.csv").string()) ==
        slurp((tmp.path / "b" / "metrics.csv").string()));
}

TEST_CASE("simulate verb writes one series per object plus the scenario") {
  TempDir tmp("driftcast_sim_verb");
  ExperimentConfig cfg = small_config((tmp.path / "data").string());
  cfg.scenario.duration = 100.0;
  REQUIRE(run_simulate(cfg) == kExitOk);
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "data"))
    if (e.path().extension() == ".csv") ++csvs;
  CHECK(csvs == 5);
  CHECK(fs::exists(tmp.path / "data" / "scenario.json"));
}

TEST_CASE("csv data source reproduces the simulated campaign metrics") {
  TempDir tmp("driftcast_exp_csv");
  ExperimentConfig cfg = small_config((tmp.path / "sim").string());
  cfg.scenario.duration = 300.0;
  REQUIRE(run_simulate(cfg) == kExitOk);

  ExperimentConfig direct = cfg;
  direct.out_dir = (tmp.path / "run_direct").string();
  REQUIRE(run_experiment(direct) == kExitOk);

  ExperimentConfig via_csv = cfg;
  via_csv.data_source = "csv";
  via_csv.series_dir = (tmp.path / "sim").string();
  via_csv.out_dir = (tmp.path / "run_csv").string();
  REQUIRE(run_experiment(via_csv) == kExitOk);

  // Feature rows differ only through the finite-difference velocity
  // reconstruction, so metrics agree closely though not bitwise.
  auto a = read_metrics_csv((tmp.path / "run_direct" / "metrics.csv").string());
  auto b = read_metrics_csv((tmp.path / "run_csv" / "metrics.csv").string());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].object_id == b[i].object_id);
    CHECK(a[i].report.rmse == doctest::Approx(b[i].report.rmse).epsilon(0.25));
  }
}

TEST_CASE("train then evaluate from snapshots matches a full run") {
  TempDir tmp("driftcast_exp_snap_eval");
  ExperimentConfig cfg = small_config((tmp.path / "full").string());
  cfg.scenario.duration = 300.0;
  cfg.t_h_list = {5};
  cfg.models = {"rnn"};
  cfg.baseline_train.epochs = 3;
  cfg.baseline_train.patience = 3;
  cfg.baseline_train.max_batches_per_epoch = 5;
  REQUIRE(run_experiment(cfg, RunMode::Full) == kExitOk);

  ExperimentConfig tcfg = cfg;
  tcfg.out_dir = (tmp.path / "split").string();
  REQUIRE(run_experiment(tcfg, RunMode::TrainOnly) == kExitOk);
  CHECK(!fs::exists(tmp.path / "split" / "metrics.csv"));
  REQUIRE(run_experiment(tcfg, RunMode::EvalOnly) == kExitOk);

  CHECK(slurp((tmp.path / "full" / "metrics.csv").string()) ==
        slurp((tmp.path / "split" / "metrics.csv").string()));
}

TEST_CASE("missing snapshots in evaluate mode surface as an I/O error") {
  TempDir tmp("driftcast_exp_missing_snap");
  ExperimentConfig cfg = small_config((tmp.path / "run").string());
  cfg.t_h_list = {1};
  cfg.models = {"rnn"};
  int rc = run_experiment(cfg, RunMode::EvalOnly);
  CHECK(rc == kExitIo);
}

TEST_CASE("invalid config returns the config exit code") {
  ExperimentConfig cfg;
  cfg.models = {"bogus"};
  CHECK(run_experiment(cfg) == kExitConfig);
}
