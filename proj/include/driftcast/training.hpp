#pragma once

// Shared mini-batch training loop: seeded shuffling, validation split,
// early stopping with best-parameter restore. Loss construction is supplied
// by the model.

#include <cstdint>
#include <functional>
#include <vector>

#include "driftcast/tensor.hpp"

namespace driftcast {

struct TrainConfig {
  std::size_t epochs = 1000;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::size_t patience = 30;
  double val_fraction = 0.1;
  std::size_t max_batches_per_epoch = 0;  // 0 = no cap
  std::uint64_t seed = 1;
};

struct TrainHistory {
  std::vector<double> train_loss;  // per-epoch mean batch loss
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
};

// loss_fn builds a scalar loss graph over the given example indices;
// `training` is false for validation passes (e.g. batch-norm statistics).
TrainHistory run_training(
    std::size_t n_examples, const TrainConfig& cfg, std::vector<TensorPtr>& params,
    const std::function<TensorPtr(const std::vector<std::size_t>&, bool)>& loss_fn);

}  // namespace driftcast
