#include "driftcast/text_encoder.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "driftcast/csv.hpp"

namespace driftcast {

namespace {

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Embedding encode(const std::string& description) {
  if (description.empty()) throw std::invalid_argument("description must be non-empty");
  Embedding e;
  e.values.assign(kEmbeddingDim, 0.0);
  // Pad so strings shorter than a trigram still produce a vector.
  std::string text = "^" + description + "$";
  for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
    std::uint64_t h = fnv1a(text.data() + i, 3);
    std::size_t bucket = h % kEmbeddingDim;
    double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
    e.values[bucket] += sign;
  }
  double norm = 0.0;
  for (double v : e.values) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    // All trigram signs cancelled; fall back to a single deterministic bucket.
    e.values[fnv1a(text.data(), text.size()) % kEmbeddingDim] = 1.0;
    norm = 1.0;
  }
  for (double& v : e.values) v /= norm;
  return e;
}

EmbeddingCatalog load_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  EmbeddingCatalog catalog;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("id,e_0,", 0) == 0) continue;  // header row
    auto cells = split_csv_line(line);
    if (cells.size() != kEmbeddingDim + 1) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + " (id '" +
                               (cells.empty() ? "" : cells[0]) + "'): expected " +
                               std::to_string(kEmbeddingDim + 1) + " columns, got " +
                               std::to_string(cells.size()));
    }
    Embedding e;
    e.id = cells[0];
    if (e.id.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty id");
    e.values.reserve(kEmbeddingDim);
    for (std::size_t i = 1; i < cells.size(); ++i) e.values.push_back(parse_double(cells[i]));
    catalog[e.id] = std::move(e);
  }
  return catalog;
}

void save_embedding_file(const EmbeddingCatalog& catalog, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embedding file: " + path);
  out << "id";
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) out << ",e_" << i;
  out << "\n";
  for (const auto& [id, e] : catalog) {
    out << id;
    for (double v : e.values) out << ',' << format_g17(v);
    out << "\n";
  }
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("embedding dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace driftcast
