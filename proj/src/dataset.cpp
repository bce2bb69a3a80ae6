#include "driftcast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "driftcast/rng.hpp"

namespace driftcast {

namespace {

void fill_feature_rows(const std::vector<EnvSample>& env, const std::vector<Vec2>& velocity,
                       const std::vector<Vec2>& position, const ObjectSpec& object,
                       Mat& features, Mat& targets) {
  const std::size_t n = env.size();
  features = Mat(n, kNumericFeatureCount);
  targets = Mat(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = feature_row(env[i], object, velocity[i]);
    std::copy(row.begin(), row.end(), features.row(i));
    targets.at(i, 0) = position[i][0];
    targets.at(i, 1) = position[i][1];
  }
}

}  // namespace

void build_features(const Trajectory& traj, Mat& features, Mat& targets) {
  ObjectSpec object;
  const auto catalog = default_catalog();
  auto it = std::find_if(catalog.begin(), catalog.end(),
                         [&](const ObjectSpec& o) { return o.id == traj.object_id; });
  if (it == catalog.end())
    throw std::invalid_argument("unknown object in trajectory: " + traj.object_id);
  object = *it;

  std::vector<EnvSample> env;
  std::vector<Vec2> vel, pos;
  env.reserve(traj.steps.size());
  for (const auto& st : traj.steps) {
    env.push_back(st.env);
    vel.push_back(st.velocity);
    pos.push_back(st.position);
  }
  fill_feature_rows(env, vel, pos, object, features, targets);
}

void build_features(const DriftSeries& series, const ObjectSpec& object, Mat& features,
                    Mat& targets) {
  const std::size_t n = series.env.size();
  if (n != series.position.size())
    throw std::invalid_argument("series env/position length mismatch");
  if (n < 2) throw std::invalid_argument("series too short to reconstruct velocity");
  std::vector<Vec2> vel(n);
  for (std::size_t i = 1; i < n; ++i) {
    double dt = series.env[i].t - series.env[i - 1].t;
    if (dt <= 0.0) throw std::invalid_argument("series timestamps must be increasing");
    vel[i] = {(series.position[i][0] - series.position[i - 1][0]) / dt,
              (series.position[i][1] - series.position[i - 1][1]) / dt};
  }
  vel[0] = vel[1];
  fill_feature_rows(series.env, vel, series.position, object, features, targets);
}

Mat downsample(const Mat& rows, int t_h) {
  if (t_h < 1) throw std::invalid_argument("t_h must be >= 1");
  if (t_h == 1) return rows;
  const std::size_t out_rows = (rows.rows + static_cast<std::size_t>(t_h) - 1) / t_h;
  Mat out(out_rows, rows.cols);
  for (std::size_t i = 0; i < out_rows; ++i) {
    const std::size_t src = i * static_cast<std::size_t>(t_h);
    std::copy(rows.row(src), rows.row(src) + rows.cols, out.row(i));
  }
  return out;
}

Mat fuse_embedding(const Mat& numeric, const std::vector<double>& embedding) {
  if (numeric.cols != kNumericFeatureCount)
    throw std::invalid_argument("fuse_embedding expects 15 numeric columns");
  if (embedding.size() != kEmbeddingDim)
    throw std::invalid_argument("fuse_embedding expects a 384-d embedding");
  Mat out(numeric.rows, kNumericFeatureCount + kEmbeddingDim);
  for (std::size_t i = 0; i < numeric.rows; ++i) {
    std::copy(numeric.row(i), numeric.row(i) + numeric.cols, out.row(i));
    std::copy(embedding.begin(), embedding.end(), out.row(i) + kNumericFeatureCount);
  }
  return out;
}

std::vector<SequenceExample> make_windows(const Mat& x, const Mat& y, std::size_t l_e,
                                          std::size_t l_d, const std::string& object_id) {
  if (l_e == 0 || l_d == 0) throw std::invalid_argument("window lengths must be positive");
  if (x.rows != y.rows) throw std::invalid_argument("feature/target row mismatch");
  if (y.cols != 2) throw std::invalid_argument("targets must have 2 columns");
  if (x.rows < l_e + l_d)
    throw std::invalid_argument("series too short: need at least l_e + l_d rows");

  const std::size_t count = x.rows - (l_e + l_d) + 1;
  std::vector<SequenceExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SequenceExample ex;
    ex.object_id = object_id;
    ex.start_index = i;
    ex.x_e = Mat(l_e, x.cols);
    for (std::size_t r = 0; r < l_e; ++r)
      std::copy(x.row(i + r), x.row(i + r) + x.cols, ex.x_e.row(r));
    ex.y_out = Mat(l_d, 2);
    for (std::size_t r = 0; r < l_d; ++r) {
      ex.y_out.at(r, 0) = y.at(i + l_e + r, 0);
      ex.y_out.at(r, 1) = y.at(i + l_e + r, 1);
    }
    ex.y_d = Mat(l_d, 2);  // zero start token, then targets shifted right
    for (std::size_t r = 1; r < l_d; ++r) {
      ex.y_d.at(r, 0) = ex.y_out.at(r - 1, 0);
      ex.y_d.at(r, 1) = ex.y_out.at(r - 1, 1);
    }
    ex.last_pos = {y.at(i + l_e - 1, 0), y.at(i + l_e - 1, 1)};
    const std::size_t prev = (l_e >= 2) ? i + l_e - 2 : i + l_e - 1;
    ex.prev_pos = {y.at(prev, 0), y.at(prev, 1)};
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<SequenceExample> augment_noise(const std::vector<SequenceExample>& examples,
                                           double factor, std::uint64_t seed,
                                           std::size_t numeric_cols) {
  if (factor <= 0.0 || factor >= 1.0) throw std::invalid_argument("factor must be in (0,1)");
  std::vector<SequenceExample> out = examples;
  out.reserve(examples.size() * 2);
  Rng rng(seed);
  for (const auto& ex : examples) {
    SequenceExample noisy = ex;
    const std::size_t ncols = std::min(numeric_cols, noisy.x_e.cols);
    for (std::size_t r = 0; r < noisy.x_e.rows; ++r)
      for (std::size_t c = 0; c < ncols; ++c)
        noisy.x_e.at(r, c) *= rng.uniform(1.0 - factor, 1.0 + factor);
    out.push_back(std::move(noisy));
  }
  return out;
}

SplitResult holdout_split(const std::vector<ObjectExamples>& per_object,
                          const std::string& test_object_id) {
  if (per_object.size() < 2) throw std::invalid_argument("holdout split needs >= 2 objects");
  const ObjectExamples* held = nullptr;
  for (const auto& oe : per_object)
    if (oe.object_id == test_object_id) held = &oe;
  if (held == nullptr) throw std::invalid_argument("unknown test object: " + test_object_id);

  SplitResult split;
  for (const auto& oe : per_object) {
    if (oe.object_id == test_object_id) continue;
    split.train.insert(split.train.end(), oe.examples.begin(), oe.examples.end());
  }
  // Chronological split of the held-out object: first half trains, the rest tests.
  const std::size_t n = held->examples.size();
  const std::size_t cut = n / 2;
  split.train.insert(split.train.end(), held->examples.begin(), held->examples.begin() + cut);
  split.test.insert(split.test.end(), held->examples.begin() + cut, held->examples.end());
  return split;
}

void Standardizer::fit(const std::vector<const Mat*>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("standardizer fit on empty input");
  const std::size_t cols = blocks.front()->cols;
  std::size_t n = 0;
  mean.assign(cols, 0.0);
  stddev.assign(cols, 0.0);
  for (const Mat* m : blocks) {
    if (m->cols != cols) throw std::invalid_argument("standardizer column mismatch");
    for (std::size_t r = 0; r < m->rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) mean[c] += m->at(r, c);
    n += m->rows;
  }
  if (n == 0) throw std::invalid_argument("standardizer fit on zero rows");
  for (double& mu : mean) mu /= static_cast<double>(n);
  for (const Mat* m : blocks)
    for (std::size_t r = 0; r < m->rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = m->at(r, c) - mean[c];
        stddev[c] += d * d;
      }
  for (double& s : stddev) s = std::max(std::sqrt(s / static_cast<double>(n)), kStdFloor);
}

void Standardizer::apply_inplace(Mat& m) const {
  if (!fitted()) throw std::logic_error("standardizer used before fit");
  if (m.cols != mean.size()) throw std::invalid_argument("standardizer column mismatch");
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = (m.at(r, c) - mean[c]) / stddev[c];
}

Mat Standardizer::apply(const Mat& m) const {
  Mat out = m;
  apply_inplace(out);
  return out;
}

void Standardizer::invert_inplace(Mat& m) const {
  if (!fitted()) throw std::logic_error("standardizer used before fit");
  if (m.cols != mean.size()) throw std::invalid_argument("standardizer column mismatch");
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = m.at(r, c) * stddev[c] + mean[c];
}

Mat Standardizer::invert(const Mat& m) const {
  Mat out = m;
  invert_inplace(out);
  return out;
}

Standardizer fit_feature_standardizer(const std::vector<SequenceExample>& train) {
  std::vector<const Mat*> blocks;
  blocks.reserve(train.size());
  for (const auto& ex : train) blocks.push_back(&ex.x_e);
  Standardizer s;
  s.fit(blocks);
  return s;
}

Standardizer fit_target_standardizer(const std::vector<SequenceExample>& train) {
  std::vector<const Mat*> blocks;
  blocks.reserve(train.size());
  for (const auto& ex : train) blocks.push_back(&ex.y_out);
  Standardizer s;
  s.fit(blocks);
  return s;
}

void standardize_examples(std::vector<SequenceExample>& examples, const Standardizer& fx,
                          const Standardizer& fy) {
  for (auto& ex : examples) {
    fx.apply_inplace(ex.x_e);
    fy.apply_inplace(ex.y_out);
    ex.y_d = Mat(ex.y_out.rows, 2);
    for (std::size_t r = 1; r < ex.y_out.rows; ++r) {
      ex.y_d.at(r, 0) = ex.y_out.at(r - 1, 0);
      ex.y_d.at(r, 1) = ex.y_out.at(r - 1, 1);
    }
  }
}

std::vector<ObjectExamples> build_object_examples(const std::vector<Trajectory>& trajectories,
                                                  const EmbeddingCatalog& embeddings,
                                                  const DatasetConfig& cfg) {
  std::vector<ObjectExamples> out;
  out.reserve(trajectories.size());
  for (const auto& traj : trajectories) {
    Mat features, targets;
    build_features(traj, features, targets);
    features = downsample(features, cfg.t_h);
    targets = downsample(targets, cfg.t_h);
    Mat x = features;
    if (cfg.fuse_embeddings) {
      auto it = embeddings.find(traj.object_id);
      if (it == embeddings.end())
        throw std::invalid_argument("missing embedding for object: " + traj.object_id);
      x = fuse_embedding(features, it->second.values);
    }
    ObjectExamples oe;
    oe.object_id = traj.object_id;
    oe.examples = make_windows(x, targets, cfg.l_e, cfg.l_d, traj.object_id);
    out.push_back(std::move(oe));
  }
  return out;
}

namespace {

nlohmann::json mat_to_json(const Mat& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"v", m.v}};
}

Mat mat_from_json(const nlohmann::json& j) {
  Mat m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.v = j.at("v").get<std::vector<double>>();
  if (m.v.size() != m.rows * m.cols) throw std::runtime_error("corrupt matrix in dataset dump");
  return m;
}

}  // namespace

void dump_examples_jsonl(const std::vector<SequenceExample>& examples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset dump: " + path);
  for (const auto& ex : examples) {
    nlohmann::json j;
    j["object_id"] = ex.object_id;
    j["start_index"] = ex.start_index;
    j["x_e"] = mat_to_json(ex.x_e);
    j["y_d"] = mat_to_json(ex.y_d);
    j["y_out"] = mat_to_json(ex.y_out);
    j["last_pos"] = {ex.last_pos[0], ex.last_pos[1]};
    j["prev_pos"] = {ex.prev_pos[0], ex.prev_pos[1]};
    out << j.dump() << "\n";
  }
}

std::vector<SequenceExample> load_examples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset dump: " + path);
  std::vector<SequenceExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    SequenceExample ex;
    ex.object_id = j.at("object_id").get<std::string>();
    ex.start_index = j.at("start_index").get<std::size_t>();
    ex.x_e = mat_from_json(j.at("x_e"));
    ex.y_d = mat_from_json(j.at("y_d"));
    ex.y_out = mat_from_json(j.at("y_out"));
    ex.last_pos = {j.at("last_pos").at(0).get<double>(), j.at("last_pos").at(1).get<double>()};
    ex.prev_pos = {j.at("prev_pos").at(0).get<double>(), j.at("prev_pos").at(1).get<double>()};
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace driftcast
