#pragma once

// Portable JSON model snapshots: named tensors with shapes, the training
// seed, and a hash of the model configuration for compatibility checks.

#include <cstdint>
#include <string>
#include <vector>

#include "driftcast/tensor.hpp"

namespace driftcast {

std::string config_hash(const std::string& config_json);

void save_snapshot(const std::string& path, const std::string& kind, std::uint64_t seed,
                   const std::string& config_json, const std::vector<std::string>& names,
                   const std::vector<TensorPtr>& tensors);

struct LoadedSnapshot {
  std::string kind;
  std::uint64_t seed = 0;
  std::string hash;
  std::string config_json;
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> shapes;
  std::vector<std::vector<double>> data;
};

LoadedSnapshot load_snapshot(const std::string& path);

// Copies snapshot tensors into params; names and shapes must match exactly.
void restore_params(const LoadedSnapshot& snap, const std::vector<std::string>& names,
                    std::vector<TensorPtr>& params);

}  // namespace driftcast
