#include "driftcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "driftcast/rng.hpp"

namespace driftcast {

TrainHistory run_training(
    std::size_t n_examples, const TrainConfig& cfg, std::vector<TensorPtr>& params,
    const std::function<TensorPtr(const std::vector<std::size_t>&, bool)>& loss_fn) {
  if (n_examples == 0) throw std::invalid_argument("training on empty dataset");
  if (cfg.batch == 0) throw std::invalid_argument("batch size must be positive");

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n_examples);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::size_t val_n = 0;
  if (n_examples >= 10 && cfg.val_fraction > 0.0)
    val_n = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(n_examples) * cfg.val_fraction));
  std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(val_n), order.end());
  std::vector<std::size_t> train_idx(order.begin(),
                                     order.end() - static_cast<std::ptrdiff_t>(val_n));

  std::vector<AdamState> adam(params.size());
  for (auto& a : adam) a.lr = cfg.lr;

  TrainHistory hist;
  hist.best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params;
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_idx);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch) {
      if (cfg.max_batches_per_epoch > 0 && batches >= cfg.max_batches_per_epoch) break;
      const std::size_t end = std::min(start + cfg.batch, train_idx.size());
      std::vector<std::size_t> batch(train_idx.begin() + static_cast<std::ptrdiff_t>(start),
                                     train_idx.begin() + static_cast<std::ptrdiff_t>(end));
      auto loss = loss_fn(batch, true);
      if (!std::isfinite(loss->data[0]))
        throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch));
      backward(loss);
      for (std::size_t p = 0; p < params.size(); ++p) adam_step(params[p], adam[p]);
      epoch_loss += loss->data[0];
      ++batches;
    }
    hist.train_loss.push_back(batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0);

    const double val =
        val_idx.empty() ? hist.train_loss.back() : loss_fn(val_idx, false)->data[0];
    hist.val_loss.push_back(val);
    if (val < hist.best_val) {
      hist.best_val = val;
      hist.best_epoch = epoch;
      since_best = 0;
      best_params.clear();
      for (const auto& p : params) best_params.push_back(p->data);
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  if (!best_params.empty())
    for (std::size_t p = 0; p < params.size(); ++p) params[p]->data = best_params[p];
  return hist;
}

}  // namespace driftcast
