#include "driftcast/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "driftcast/baselines.hpp"
#include "driftcast/cnn.hpp"
#include "driftcast/csv.hpp"
#include "driftcast/dataset.hpp"
#include "driftcast/kernels.hpp"
#include "driftcast/lstm.hpp"
#include "driftcast/metrics.hpp"
#include "driftcast/snapshot.hpp"
#include "driftcast/text_encoder.hpp"
#include "driftcast/transformer.hpp"

namespace fs = std::filesystem;

namespace driftcast {

const std::vector<std::string> kKnownModels = {"curvefit",       "persistence", "rnn", "tcn",
                                               "lstm",           "mm-lstm",     "mm-transformer"};

void ExperimentConfig::validate() const {
  if (data_source != "simulate" && data_source != "csv")
    throw std::invalid_argument("data_source must be 'simulate' or 'csv'");
  if (data_source == "csv" && series_dir.empty())
    throw std::invalid_argument("csv data source requires series_dir");
  if (text_backend != "builtin" && text_backend != "file")
    throw std::invalid_argument("text_backend must be 'builtin' or 'file'");
  if (text_backend == "file" && embeddings_path.empty())
    throw std::invalid_argument("file text backend requires embeddings_path");
  if (l_e < 1 || l_d < 1) throw std::invalid_argument("l_e and l_d must be >= 1");
  if (t_h_list.empty()) throw std::invalid_argument("t_h list must be non-empty");
  for (int t : t_h_list)
    if (t < 1) throw std::invalid_argument("t_h values must be positive integers");
  if (models.empty()) throw std::invalid_argument("model list must be non-empty");
  for (const auto& m : models)
    if (std::find(kKnownModels.begin(), kKnownModels.end(), m) == kKnownModels.end())
      throw std::invalid_argument("unknown model: " + m);
  if (noise_factor <= 0.0 || noise_factor >= 1.0)
    throw std::invalid_argument("noise_factor must be in (0,1)");
  if (out_dir.empty()) throw std::invalid_argument("out_dir must be set");
  scenario.validate();
}

namespace {

void train_cfg_to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"batch", c.batch},
       {"lr", c.lr},
       {"patience", c.patience},
       {"val_fraction", c.val_fraction},
       {"max_batches_per_epoch", c.max_batches_per_epoch},
       {"seed", c.seed}};
}

TrainConfig train_cfg_from_json(const nlohmann::json& j, TrainConfig base) {
  if (j.contains("epochs")) base.epochs = j.at("epochs").get<std::size_t>();
  if (j.contains("batch")) base.batch = j.at("batch").get<std::size_t>();
  if (j.contains("lr")) base.lr = j.at("lr").get<double>();
  if (j.contains("patience")) base.patience = j.at("patience").get<std::size_t>();
  if (j.contains("val_fraction")) base.val_fraction = j.at("val_fraction").get<double>();
  if (j.contains("max_batches_per_epoch"))
    base.max_batches_per_epoch = j.at("max_batches_per_epoch").get<std::size_t>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  return base;
}

}  // namespace

std::string experiment_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["data_source"] = cfg.data_source;
  j["series_dir"] = cfg.series_dir;
  j["catalog_path"] = cfg.catalog_path;
  j["text_backend"] = cfg.text_backend;
  j["embeddings_path"] = cfg.embeddings_path;
  j["t_h"] = cfg.t_h_list;
  j["l_e"] = cfg.l_e;
  j["l_d"] = cfg.l_d;
  j["models"] = cfg.models;
  j["noise_factor"] = cfg.noise_factor;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["fail_fast"] = cfg.fail_fast;
  j["lstm_attention"] = cfg.lstm_attention;
  j["scenario"] = {{"duration", cfg.scenario.duration},
                   {"timestep", cfg.scenario.timestep},
                   {"seed", cfg.scenario.seed}};
  train_cfg_to_json(j["seq_train"], cfg.seq_train);
  train_cfg_to_json(j["baseline_train"], cfg.baseline_train);
  return j.dump(2);
}

ExperimentConfig experiment_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open experiment config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad experiment config json: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  if (j.contains("data_source")) cfg.data_source = j.at("data_source").get<std::string>();
  if (j.contains("series_dir")) cfg.series_dir = j.at("series_dir").get<std::string>();
  if (j.contains("catalog_path")) cfg.catalog_path = j.at("catalog_path").get<std::string>();
  if (j.contains("text_backend")) cfg.text_backend = j.at("text_backend").get<std::string>();
  if (j.contains("embeddings_path"))
    cfg.embeddings_path = j.at("embeddings_path").get<std::string>();
  if (j.contains("t_h")) cfg.t_h_list = j.at("t_h").get<std::vector<int>>();
  if (j.contains("l_e")) cfg.l_e = j.at("l_e").get<std::size_t>();
  if (j.contains("l_d")) cfg.l_d = j.at("l_d").get<std::size_t>();
  if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
  if (j.contains("noise_factor")) cfg.noise_factor = j.at("noise_factor").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("fail_fast")) cfg.fail_fast = j.at("fail_fast").get<bool>();
  if (j.contains("lstm_attention")) cfg.lstm_attention = j.at("lstm_attention").get<bool>();
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    if (s.contains("duration")) cfg.scenario.duration = s.at("duration").get<double>();
    if (s.contains("timestep")) cfg.scenario.timestep = s.at("timestep").get<double>();
    if (s.contains("seed")) cfg.scenario.seed = s.at("seed").get<std::uint64_t>();
  }
  if (j.contains("seq_train")) cfg.seq_train = train_cfg_from_json(j.at("seq_train"), cfg.seq_train);
  if (j.contains("baseline_train"))
    cfg.baseline_train = train_cfg_from_json(j.at("baseline_train"), cfg.baseline_train);
  cfg.validate();
  return cfg;
}

namespace {

std::uint64_t fnv_mix(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t cell_seed(std::uint64_t base, int t_h, const std::string& object,
                        const std::string& model) {
  std::uint64_t h = 14695981039346656037ull;
  h = fnv_mix(h, &base, sizeof(base));
  h = fnv_mix(h, &t_h, sizeof(t_h));
  h = fnv_mix(h, object.data(), object.size());
  h = fnv_mix(h, model.data(), model.size());
  return h;
}

std::string fingerprint_examples(const std::vector<SequenceExample>& exs) {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& ex : exs) {
    h = fnv_mix(h, ex.object_id.data(), ex.object_id.size());
    h = fnv_mix(h, &ex.start_index, sizeof(ex.start_index));
    h = fnv_mix(h, ex.x_e.v.data(), ex.x_e.v.size() * sizeof(double));
    h = fnv_mix(h, ex.y_out.v.data(), ex.y_out.v.size() * sizeof(double));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ObjectData {
  ObjectSpec spec;
  Mat features;  // raw sample rate, 15 cols
  Mat targets;   // positions
};

struct CellOutput {
  Mat predictions;  // concatenated over test examples, meters
  Mat truth;
  // stitched (non-overlapping windows) series for plotting
  std::vector<double> plot_t;
  Mat plot_pred;
  Mat plot_truth;
};

// Data shared by every model within one (t_h, held-out object) cell.
struct CellContext {
  int t_h = 1;
  std::string object_id;
  double step_seconds = 1.0;  // t_h * scenario timestep
  const ExperimentConfig* cfg = nullptr;
  Mat ds_features;  // held-out object, downsampled
  Mat ds_targets;
  SplitResult plain_split;
  SplitResult fused_split;
  std::size_t cut = 0;  // first test example start index
};

bool needs_fused(const std::vector<std::string>& models) {
  for (const auto& m : models)
    if (m == "mm-lstm" || m == "mm-transformer") return true;
  return false;
}


void stitch(const std::vector<const SequenceExample*>& test,
            const std::vector<const Mat*>& preds, const CellContext& cell, CellOutput& out) {
  // non-overlapping windows: every l_d-th test example
  const std::size_t l_d = cell.cfg->l_d;
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < test.size(); i += l_d) picks.push_back(i);
  out.plot_pred = Mat(picks.size() * l_d, 2);
  out.plot_truth = Mat(picks.size() * l_d, 2);
  out.plot_t.clear();
  std::size_t row = 0;
  for (std::size_t pi : picks) {
    const auto* ex = test[pi];
    for (std::size_t u = 0; u < l_d; ++u) {
      out.plot_t.push_back(static_cast<double>(ex->start_index + cell.cfg->l_e + u) *
                           cell.step_seconds);
      out.plot_pred.at(row, 0) = preds[pi]->at(u, 0);
      out.plot_pred.at(row, 1) = preds[pi]->at(u, 1);
      out.plot_truth.at(row, 0) = ex->y_out.at(u, 0);
      out.plot_truth.at(row, 1) = ex->y_out.at(u, 1);
      ++row;
    }
  }
}

CellOutput collect(const std::vector<const SequenceExample*>& test,
                   const std::vector<Mat>& preds, const CellContext& cell) {
  CellOutput out;
  const std::size_t l_d = cell.cfg->l_d;
  out.predictions = Mat(test.size() * l_d, 2);
  out.truth = Mat(test.size() * l_d, 2);
  std::size_t row = 0;
  for (std::size_t i = 0; i < test.size(); ++i)
    for (std::size_t u = 0; u < l_d; ++u) {
      out.predictions.at(row, 0) = preds[i].at(u, 0);
      out.predictions.at(row, 1) = preds[i].at(u, 1);
      out.truth.at(row, 0) = test[i]->y_out.at(u, 0);
      out.truth.at(row, 1) = test[i]->y_out.at(u, 1);
      ++row;
    }
  std::vector<const Mat*> pred_ptrs;
  pred_ptrs.reserve(preds.size());
  for (const auto& m : preds) pred_ptrs.push_back(&m);
  stitch(test, pred_ptrs, cell, out);
  return out;
}

std::vector<const SequenceExample*> test_ptrs(const SplitResult& split) {
  std::vector<const SequenceExample*> out;
  out.reserve(split.test.size());
  for (const auto& ex : split.test) out.push_back(&ex);
  return out;
}

// ---- per-model cell runners ----

CellOutput run_persistence(const CellContext& cell) {
  auto test = test_ptrs(cell.plain_split);
  std::vector<Mat> preds;
  preds.reserve(test.size());
  for (const auto* ex : test)
    preds.push_back(persistence_forecast(ex->last_pos, ex->prev_pos, cell.cfg->l_d));
  return collect(test, preds, cell);
}

CellOutput run_curvefit(const CellContext& cell) {
  // fit on the held-out object's training half only (earlier rows)
  const std::size_t fit_rows = cell.cut + cell.cfg->l_e;
  std::vector<double> t;
  std::vector<Vec2> vw, va, d;
  for (std::size_t i = 0; i < std::min(fit_rows, cell.ds_features.rows); ++i) {
    t.push_back(static_cast<double>(i) * cell.step_seconds);
    va.push_back({cell.ds_features.at(i, 0), cell.ds_features.at(i, 1)});
    vw.push_back({cell.ds_features.at(i, 2), cell.ds_features.at(i, 3)});
    d.push_back({cell.ds_targets.at(i, 0), cell.ds_targets.at(i, 1)});
  }
  auto coeffs = curvefit_fit(t, vw, va, d);

  auto test = test_ptrs(cell.plain_split);
  std::vector<Mat> preds;
  preds.reserve(test.size());
  for (const auto* ex : test) {
    // Future wind/current are unknown at forecast time: the field series is
    // truthful only up to the last encoder row and held constant afterwards.
    const std::size_t anchor = ex->start_index + cell.cfg->l_e - 1;
    std::vector<double> t_run;
    std::vector<Vec2> vw_run, va_run;
    for (std::size_t i = 0; i <= anchor + cell.cfg->l_d; ++i) {
      const std::size_t src = std::min(i, anchor);
      t_run.push_back(static_cast<double>(i) * cell.step_seconds);
      va_run.push_back({cell.ds_features.at(src, 0), cell.ds_features.at(src, 1)});
      vw_run.push_back({cell.ds_features.at(src, 2), cell.ds_features.at(src, 3)});
    }
    auto path = curvefit_predict(coeffs, t_run, vw_run, va_run);
    Mat p(cell.cfg->l_d, 2);
    for (std::size_t u = 0; u < cell.cfg->l_d; ++u) {
      const auto& v = path[anchor + 1 + u];
      p.at(u, 0) = v[0];
      p.at(u, 1) = v[1];
    }
    preds.push_back(std::move(p));
  }
  return collect(test, preds, cell);
}

struct OneStepTrainData {
  OneStepDataset train;
  std::vector<double> mean, stddev;  // over the 17 window columns
};

OneStepTrainData build_onestep_train(const CellContext& cell,
                                     const std::vector<ObjectData>& objects,
                                     std::size_t fit_rows) {
  OneStepTrainData out;
  for (const auto& od : objects) {
    Mat f = downsample(od.features, cell.t_h);
    Mat p = downsample(od.targets, cell.t_h);
    if (od.spec.id == cell.object_id) {
      // truncate to the training half (targets stay before the test region)
      Mat ft(std::min(fit_rows, f.rows), f.cols);
      Mat pt(ft.rows, 2);
      std::copy(f.v.begin(), f.v.begin() + static_cast<std::ptrdiff_t>(ft.v.size()),
                ft.v.begin());
      std::copy(p.v.begin(), p.v.begin() + static_cast<std::ptrdiff_t>(pt.v.size()),
                pt.v.begin());
      f = std::move(ft);
      p = std::move(pt);
    }
    auto ds = make_onestep_windows(f, p, cell.cfg->l_e);
    for (auto& w : ds.windows) out.train.windows.push_back(std::move(w));
    for (auto& tg : ds.targets) out.train.targets.push_back(tg);
  }

  const std::size_t cols = out.train.windows.front().cols;
  out.mean.assign(cols, 0.0);
  out.stddev.assign(cols, 0.0);
  std::size_t n = 0;
  for (const auto& w : out.train.windows) {
    for (std::size_t r = 0; r < w.rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out.mean[c] += w.at(r, c);
    n += w.rows;
  }
  for (double& m : out.mean) m /= static_cast<double>(n);
  for (const auto& w : out.train.windows)
    for (std::size_t r = 0; r < w.rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = w.at(r, c) - out.mean[c];
        out.stddev[c] += d * d;
      }
  for (double& s : out.stddev)
    s = std::max(std::sqrt(s / static_cast<double>(n)), Standardizer::kStdFloor);

  for (auto& w : out.train.windows)
    for (std::size_t r = 0; r < w.rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        w.at(r, c) = (w.at(r, c) - out.mean[c]) / out.stddev[c];
  const std::size_t px = cols - 2, py = cols - 1;
  for (auto& tg : out.train.targets) {
    tg[0] = (tg[0] - out.mean[px]) / out.stddev[px];
    tg[1] = (tg[1] - out.mean[py]) / out.stddev[py];
  }
  return out;
}

template <typename Net>
CellOutput eval_onestep(Net& net, const CellContext& cell, const OneStepTrainData& std17) {
  const std::size_t fcols = cell.ds_features.cols;
  const std::size_t cols = fcols + 2;
  auto test = test_ptrs(cell.plain_split);
  std::vector<Mat> preds;
  preds.reserve(test.size());
  for (const auto* ex : test) {
    Mat window(cell.cfg->l_e, cols);
    for (std::size_t r = 0; r < cell.cfg->l_e; ++r) {
      const std::size_t src = ex->start_index + r;
      for (std::size_t c = 0; c < fcols; ++c)
        window.at(r, c) = (cell.ds_features.at(src, c) - std17.mean[c]) / std17.stddev[c];
      window.at(r, fcols) =
          (cell.ds_targets.at(src, 0) - std17.mean[fcols]) / std17.stddev[fcols];
      window.at(r, fcols + 1) =
          (cell.ds_targets.at(src, 1) - std17.mean[fcols + 1]) / std17.stddev[fcols + 1];
    }
    Mat future(cell.cfg->l_d, fcols);
    for (std::size_t u = 0; u < cell.cfg->l_d; ++u) {
      const std::size_t src = ex->start_index + cell.cfg->l_e + u;
      for (std::size_t c = 0; c < fcols; ++c)
        future.at(u, c) = (cell.ds_features.at(src, c) - std17.mean[c]) / std17.stddev[c];
    }
    Mat rolled = net.roll_forward(window, future);
    for (std::size_t u = 0; u < cell.cfg->l_d; ++u) {
      rolled.at(u, 0) = rolled.at(u, 0) * std17.stddev[fcols] + std17.mean[fcols];
      rolled.at(u, 1) = rolled.at(u, 1) * std17.stddev[fcols + 1] + std17.mean[fcols + 1];
    }
    preds.push_back(std::move(rolled));
  }
  return collect(test, preds, cell);
}

struct SeqStandardized {
  std::vector<SequenceExample> train;  // augmented + standardized
  Standardizer fx, fy;
};

// The nets regress displacements relative to the last observed position rather
// than absolute positions: the displacement distribution is stationary, so the
// standardized targets stay in-range on held-out trajectory segments, and the
// zero start token literally means "no displacement yet".
void targets_to_relative(std::vector<SequenceExample>& examples) {
  for (auto& ex : examples) {
    for (std::size_t r = 0; r < ex.y_out.rows; ++r) {
      ex.y_out.at(r, 0) -= ex.last_pos[0];
      ex.y_out.at(r, 1) -= ex.last_pos[1];
    }
    ex.y_d = Mat(ex.y_out.rows, 2);
    for (std::size_t r = 1; r < ex.y_out.rows; ++r) {
      ex.y_d.at(r, 0) = ex.y_out.at(r - 1, 0);
      ex.y_d.at(r, 1) = ex.y_out.at(r - 1, 1);
    }
  }
}

SeqStandardized prepare_seq_train(const SplitResult& split, const ExperimentConfig& cfg,
                                  std::uint64_t seed) {
  SeqStandardized out;
  out.train = augment_noise(split.train, cfg.noise_factor, seed);
  targets_to_relative(out.train);
  out.fx = fit_feature_standardizer(out.train);
  out.fy = fit_target_standardizer(out.train);
  standardize_examples(out.train, out.fx, out.fy);
  return out;
}

template <typename Model>
CellOutput eval_seq(const Model& model, const CellContext& cell, const SplitResult& split,
                    const Standardizer& fx, const Standardizer& fy) {
  std::vector<const SequenceExample*> test;
  std::vector<Mat> preds;
  for (const auto& ex : split.test) {
    test.push_back(&ex);
    Mat x = fx.apply(ex.x_e);
    Mat p = model.forecast(x, cell.cfg->l_d);
    fy.invert_inplace(p);
    for (std::size_t r = 0; r < p.rows; ++r) {
      p.at(r, 0) += ex.last_pos[0];
      p.at(r, 1) += ex.last_pos[1];
    }
    preds.push_back(std::move(p));
  }
  return collect(test, preds, cell);
}

void write_series_csv(const std::string& path, const std::vector<double>& t, const Mat& xy) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write series: " + path);
  out << "t,x,y\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    out << format_g17(t[i]) << ',' << format_g17(xy.at(i, 0)) << ',' << format_g17(xy.at(i, 1))
        << "\n";
}

int classify_error(const std::exception& e) {
  if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr ||
      dynamic_cast<const std::logic_error*>(&e) != nullptr)
    return kExitConfig;
  const std::string what = e.what();
  if (what.find("diverged") != std::string::npos) return kExitDiverged;
  return kExitIo;
}

}  // namespace

int run_simulate(const ExperimentConfig& cfg) {
  try {
    cfg.validate();
    auto catalog =
        cfg.catalog_path.empty() ? default_catalog() : load_catalog(cfg.catalog_path);
    fs::create_directories(cfg.out_dir);
    auto trajectories = run_campaign(cfg.scenario, catalog);
    for (const auto& traj : trajectories)
      export_series(traj, cfg.out_dir + "/" + traj.object_id + ".csv");
    scenario_to_json_file(cfg.scenario, cfg.out_dir + "/scenario.json");
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "simulate failed: %s\n", e.what());
    return classify_error(e);
  }
}

int run_experiment(const ExperimentConfig& cfg, RunMode mode) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  int worst = kExitOk;
  nlohmann::json manifest;
  manifest["format"] = "driftcast-manifest-v1";
  const std::string cfg_json = experiment_to_json(cfg);
  manifest["config"] = nlohmann::json::parse(cfg_json);
  manifest["config_hash"] = config_hash(cfg_json);
  manifest["seed"] = cfg.seed;
  manifest["kernel_backend"] = kernels::backend_name(kernels::active_backend());
  manifest["mode"] = mode == RunMode::Full ? "run" : (mode == RunMode::TrainOnly ? "train"
                                                                                 : "evaluate");
  manifest["cells"] = nlohmann::json::array();

  std::vector<MetricsRow> metric_rows;

  try {
    fs::create_directories(cfg.out_dir);
    fs::create_directories(cfg.out_dir + "/snapshots");
    fs::create_directories(cfg.out_dir + "/predictions");

    auto catalog =
        cfg.catalog_path.empty() ? default_catalog() : load_catalog(cfg.catalog_path);

    // embeddings
    EmbeddingCatalog embeddings;
    if (needs_fused(cfg.models)) {
      if (cfg.text_backend == "file") {
        embeddings = load_embedding_file(cfg.embeddings_path);
        for (const auto& o : catalog)
          if (embeddings.find(o.id) == embeddings.end())
            throw std::runtime_error("embedding file is missing object " + o.id);
      } else {
        for (const auto& o : catalog) {
          auto e = encode(o.description.empty() ? o.id : o.description);
          e.id = o.id;
          embeddings[o.id] = std::move(e);
        }
      }
    }

    // source data
    std::vector<ObjectData> objects;
    if (cfg.data_source == "simulate") {
      auto trajectories = run_campaign(cfg.scenario, catalog);
      for (std::size_t i = 0; i < trajectories.size(); ++i) {
        ObjectData od;
        od.spec = catalog[i];
        build_features(trajectories[i], od.features, od.targets);
        objects.push_back(std::move(od));
      }
    } else {
      for (const auto& spec : catalog) {
        ObjectData od;
        od.spec = spec;
        auto series = import_series(cfg.series_dir + "/" + spec.id + ".csv");
        build_features(series, spec, od.features, od.targets);
        objects.push_back(std::move(od));
      }
    }

    const bool want_fused = needs_fused(cfg.models);

    for (int t_h : cfg.t_h_list) {
      DatasetConfig dcfg;
      dcfg.t_h = t_h;
      dcfg.l_e = cfg.l_e;
      dcfg.l_d = cfg.l_d;
      dcfg.noise_factor = cfg.noise_factor;
      dcfg.seed = cfg.seed;

      std::vector<ObjectExamples> fused, plain;
      for (const auto& od : objects) {
        Mat f = downsample(od.features, t_h);
        Mat p = downsample(od.targets, t_h);
        {
          ObjectExamples oe;
          oe.object_id = od.spec.id;
          oe.examples = make_windows(f, p, cfg.l_e, cfg.l_d, od.spec.id);
          plain.push_back(std::move(oe));
        }
        if (want_fused) {
          Mat x = fuse_embedding(f, embeddings.at(od.spec.id).values);
          ObjectExamples oe;
          oe.object_id = od.spec.id;
          oe.examples = make_windows(x, p, cfg.l_e, cfg.l_d, od.spec.id);
          fused.push_back(std::move(oe));
        }
      }

      for (const auto& od : objects) {
        CellContext cell;
        cell.t_h = t_h;
        cell.object_id = od.spec.id;
        cell.step_seconds = static_cast<double>(t_h) * cfg.scenario.timestep;
        cell.cfg = &cfg;
        cell.ds_features = downsample(od.features, t_h);
        cell.ds_targets = downsample(od.targets, t_h);
        cell.plain_split = holdout_split(plain, od.spec.id);
        if (want_fused) cell.fused_split = holdout_split(fused, od.spec.id);
        cell.cut = cell.plain_split.test.empty() ? 0 : cell.plain_split.test.front().start_index;

        const std::string train_fp = fingerprint_examples(cell.plain_split.train);
        const std::string test_fp = fingerprint_examples(cell.plain_split.test);

        for (const auto& model : cfg.models) {
          nlohmann::json cell_j;
          cell_j["t_h"] = t_h;
          cell_j["object"] = od.spec.id;
          cell_j["model"] = model;
          const std::uint64_t seed = cell_seed(cfg.seed, t_h, od.spec.id, model);
          cell_j["cell_seed"] = seed;
          cell_j["train_fingerprint"] = train_fp;
          cell_j["test_fingerprint"] = test_fp;
          const std::string snap_path = cfg.out_dir + "/snapshots/" + model + "_" +
                                        od.spec.id + "_th" + std::to_string(t_h) + ".json";
          try {
            CellOutput out;
            bool have_output = true;

            if (model == "persistence") {
              out = run_persistence(cell);
            } else if (model == "curvefit") {
              out = run_curvefit(cell);
            } else if (model == "rnn" || model == "tcn") {
              auto std17 = build_onestep_train(cell, objects, cell.cut + cfg.l_e);
              TrainConfig tc = cfg.baseline_train;
              tc.seed = seed;
              if (model == "rnn") {
                RnnBaseline net(std17.train.windows.front().cols, seed);
                if (mode == RunMode::EvalOnly) {
                  auto snap = load_snapshot(snap_path);
                  restore_params(snap, net.param_names(), net.params());
                  net.set_trained(true);
                } else {
                  net.train(std17.train, tc);
                  save_snapshot(snap_path, model, seed, cfg_json, net.param_names(),
                                net.params());
                }
                if (mode == RunMode::TrainOnly) have_output = false;
                if (have_output) out = eval_onestep(net, cell, std17);
              } else {
                TcnBaseline net(std17.train.windows.front().cols, seed);
                if (mode == RunMode::EvalOnly) {
                  auto snap = load_snapshot(snap_path);
                  net.restore_snapshot(snap.names, snap.data);
                } else {
                  net.train(std17.train, tc);
                  save_snapshot(snap_path, model, seed, cfg_json, net.snapshot_names(),
                                net.snapshot_tensors());
                }
                if (mode == RunMode::TrainOnly) have_output = false;
                if (have_output) out = eval_onestep(net, cell, std17);
              }
            } else if (model == "lstm" || model == "mm-lstm") {
              const bool mm = model == "mm-lstm";
              const SplitResult& split = mm ? cell.fused_split : cell.plain_split;
              auto prep = prepare_seq_train(split, cfg, seed);
              const std::size_t p = prep.train.front().x_e.cols;
              const bool attn = mm ? true : cfg.lstm_attention;
              Seq2SeqLstm net(p, attn, seed);
              TrainConfig tc = cfg.seq_train;
              tc.seed = seed;
              if (mode == RunMode::EvalOnly) {
                auto snap = load_snapshot(snap_path);
                restore_params(snap, net.param_names(), net.params());
                net.set_trained(true);
              } else {
                net.train(prep.train, tc);
                save_snapshot(snap_path, model, seed, cfg_json, net.param_names(),
                              net.params());
              }
              if (mode == RunMode::TrainOnly) have_output = false;
              if (have_output) out = eval_seq(net, cell, split, prep.fx, prep.fy);
            } else if (model == "mm-transformer") {
              const SplitResult& split = cell.fused_split;
              auto prep = prepare_seq_train(split, cfg, seed);
              TransformerConfig mc;
              mc.input_dim = prep.train.front().x_e.cols;
              mc.seed = seed;
              Seq2SeqTransformer net(mc);
              TrainConfig tc = cfg.seq_train;
              tc.seed = seed;
              if (mode == RunMode::EvalOnly) {
                auto snap = load_snapshot(snap_path);
                restore_params(snap, net.param_names(), net.params());
                net.set_trained(true);
              } else {
                net.train(prep.train, tc);
                save_snapshot(snap_path, model, seed, cfg_json, net.param_names(),
                              net.params());
              }
              if (mode == RunMode::TrainOnly) have_output = false;
              if (have_output) out = eval_seq(net, cell, split, prep.fx, prep.fy);
            }

            if (have_output && mode != RunMode::TrainOnly) {
              MetricsRow row;
              row.object_id = od.spec.id;
              row.model = model;
              row.t_h = t_h;
              row.report = evaluate(out.predictions, out.truth);
              metric_rows.push_back(row);
              cell_j["rmse"] = row.report.rmse;
              cell_j["mae"] = row.report.mae;
              cell_j["mape"] = row.report.mape;

              const std::string base =
                  cfg.out_dir + "/predictions/" + od.spec.id + "_th" + std::to_string(t_h);
              write_series_csv(base + "_" + model + ".csv", out.plot_t, out.plot_pred);
              const std::string truth_path = base + "_truth.csv";
              if (!fs::exists(truth_path))
                write_series_csv(truth_path, out.plot_t, out.plot_truth);
            }
            cell_j["status"] = "ok";
          } catch (const std::exception& e) {
            cell_j["status"] = "error";
            cell_j["error"] = e.what();
            worst = std::max(worst, classify_error(e));
            if (cfg.fail_fast) {
              manifest["cells"].push_back(cell_j);
              throw;
            }
          }
          manifest["cells"].push_back(cell_j);
        }
      }
    }

    if (mode != RunMode::TrainOnly) {
      write_metrics_csv(metric_rows, cfg.out_dir + "/metrics.csv");
      emit_plots(cfg.out_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "experiment failed: %s\n", e.what());
    worst = std::max(worst, classify_error(e));
  }

  std::ofstream mf(cfg.out_dir + "/manifest.json");
  if (mf) mf << manifest.dump(2) << "\n";
  return worst;
}

void emit_plots(const std::string& run_dir) {
  const fs::path pred_dir = fs::path(run_dir) / "predictions";
  if (!fs::is_directory(pred_dir))
    throw std::runtime_error("no predictions directory under " + run_dir);
  fs::create_directories(fs::path(run_dir) / "plots");

  // group files by (object, t_h): names look like <object>_th<k>_<model>.csv
  std::map<std::string, std::map<std::string, std::string>> groups;  // key -> model -> path
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    const std::string name = entry.path().stem().string();
    const auto th_pos = name.find("_th");
    if (th_pos == std::string::npos) continue;
    const auto model_pos = name.find('_', th_pos + 3);
    if (model_pos == std::string::npos) continue;
    const std::string key = name.substr(0, model_pos);
    const std::string model = name.substr(model_pos + 1);
    groups[key][model] = entry.path().string();
  }

  for (const auto& [key, files] : groups) {
    auto truth_it = files.find("truth");
    if (truth_it == files.end())
      throw std::runtime_error("missing truth series for " + key);
    auto read_series = [](const std::string& path) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open " + path);
      std::string line;
      std::getline(in, line);
      std::vector<std::array<double, 3>> rows;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        rows.push_back({parse_double(cells[0]), parse_double(cells[1]), parse_double(cells[2])});
      }
      return rows;
    };
    auto truth = read_series(truth_it->second);

    std::vector<std::string> models;
    std::vector<std::vector<std::array<double, 3>>> series;
    for (const auto& [model, path] : files) {
      if (model == "truth") continue;
      auto rows = read_series(path);
      if (rows.size() != truth.size())
        throw std::runtime_error("series length mismatch for " + key + "/" + model);
      models.push_back(model);
      series.push_back(std::move(rows));
    }

    std::ofstream out((fs::path(run_dir) / "plots" / (key + ".csv")).string());
    if (!out) throw std::runtime_error("cannot write plot csv for " + key);
    out << "t,truth_x,truth_y";
    for (const auto& m : models) out << ',' << m << "_x," << m << "_y";
    out << "\n";
    for (std::size_t i = 0; i < truth.size(); ++i) {
      out << format_g17(truth[i][0]) << ',' << format_g17(truth[i][1]) << ','
          << format_g17(truth[i][2]);
      for (const auto& s : series) out << ',' << format_g17(s[i][1]) << ',' << format_g17(s[i][2]);
      out << "\n";
    }
  }
}

}  // namespace driftcast
