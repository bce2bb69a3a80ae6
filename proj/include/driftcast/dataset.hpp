#pragma once

// Dataset pipeline: horizon down-sampling, embedding fusion, sliding-window
// extraction with teacher forcing, noise augmentation, object-holdout split
// and standardization.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftcast/mat.hpp"
#include "driftcast/physics.hpp"
#include "driftcast/simulator.hpp"
#include "driftcast/text_encoder.hpp"

namespace driftcast {

struct SequenceExample {
  std::string object_id;
  std::size_t start_index = 0;  // offset into the downsampled series
  Mat x_e;    // l_e × p encoder input
  Mat y_d;    // l_d × 2 decoder input: zero start token, then shifted targets
  Mat y_out;  // l_d × 2 targets
  // Raw (never standardized) positions at the end of the encoder window,
  // kept for the persistence baseline.
  Vec2 last_pos{0.0, 0.0};
  Vec2 prev_pos{0.0, 0.0};
};

// Numeric feature rows (15 columns) + target positions (2 columns) for one
// trajectory. For imported series the object velocity is reconstructed by
// finite differences of position.
void build_features(const Trajectory& traj, Mat& features, Mat& targets);
void build_features(const DriftSeries& series, const ObjectSpec& object, Mat& features,
                    Mat& targets);

Mat downsample(const Mat& rows, int t_h);

Mat fuse_embedding(const Mat& numeric, const std::vector<double>& embedding);

std::vector<SequenceExample> make_windows(const Mat& x, const Mat& y, std::size_t l_e,
                                          std::size_t l_d, const std::string& object_id);

// Appends one noisy copy per example: encoder numeric columns multiplied by
// iid Uniform[1-factor, 1+factor]; embedding columns and targets untouched.
std::vector<SequenceExample> augment_noise(const std::vector<SequenceExample>& examples,
                                           double factor, std::uint64_t seed,
                                           std::size_t numeric_cols = kNumericFeatureCount);

struct ObjectExamples {
  std::string object_id;
  std::vector<SequenceExample> examples;  // chronological
};

struct SplitResult {
  std::vector<SequenceExample> train;
  std::vector<SequenceExample> test;
};

// Train on every other object plus the first (chronological) half of the
// held-out object; test on its remaining half.
SplitResult holdout_split(const std::vector<ObjectExamples>& per_object,
                          const std::string& test_object_id);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // floored at kStdFloor

  static constexpr double kStdFloor = 1e-8;

  bool fitted() const { return !mean.empty(); }
  void fit(const std::vector<const Mat*>& blocks);
  void apply_inplace(Mat& m) const;
  Mat apply(const Mat& m) const;
  Mat invert(const Mat& m) const;
  void invert_inplace(Mat& m) const;
};

Standardizer fit_feature_standardizer(const std::vector<SequenceExample>& train);
Standardizer fit_target_standardizer(const std::vector<SequenceExample>& train);

// Applies fx to x_e and fy to y_out, then rebuilds y_d so the zero start
// token stays exactly zero in standardized space.
void standardize_examples(std::vector<SequenceExample>& examples, const Standardizer& fx,
                          const Standardizer& fy);

struct DatasetConfig {
  int t_h = 1;
  std::size_t l_e = 10;
  std::size_t l_d = 10;
  bool fuse_embeddings = true;
  double noise_factor = 0.05;
  std::uint64_t seed = 7;
};

std::vector<ObjectExamples> build_object_examples(const std::vector<Trajectory>& trajectories,
                                                  const EmbeddingCatalog& embeddings,
                                                  const DatasetConfig& cfg);

void dump_examples_jsonl(const std::vector<SequenceExample>& examples, const std::string& path);
std::vector<SequenceExample> load_examples_jsonl(const std::string& path);

}  // namespace driftcast
