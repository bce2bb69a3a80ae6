#pragma once

#include <map>
#include <string>
#include <vector>

namespace driftcast {

inline constexpr std::size_t kEmbeddingDim = 384;

struct Embedding {
  std::string id;
  std::vector<double> values;  // length kEmbeddingDim, unit norm from the builtin
};

// Deterministic builtin encoder: character trigrams hashed into 384 signed
// buckets, L2-normalized. A stand-in with the right shape and determinism,
// not a semantic model — real sentence embeddings can be loaded from file.
Embedding encode(const std::string& description);

using EmbeddingCatalog = std::map<std::string, Embedding>;

// CSV format: id,e_0,...,e_383 (one row per object).
EmbeddingCatalog load_embedding_file(const std::string& path);
void save_embedding_file(const EmbeddingCatalog& catalog, const std::string& path);

double cosine_similarity(const Embedding& a, const Embedding& b);

}  // namespace driftcast
