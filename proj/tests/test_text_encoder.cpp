#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "driftcast/text_encoder.hpp"

using namespace driftcast;

TEST_CASE("embedding has the declared dimension and unit norm") {
  auto e = encode("small orange life ring with rope handles");
  REQUIRE(e.values.size() == kEmbeddingDim);
  double n = 0.0;
  for (double v : e.values) n += v * v;
  CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encoding is deterministic") {
  auto a = encode("weathered wooden pallet");
  auto b = encode("weathered wooden pallet");
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("different descriptions produce different embeddings") {
  auto a = encode("kayak, enclosed hull, bright yellow");
  auto b = encode("sealed steel drum, mostly submerged");
  double diff = 0.0;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) diff += std::abs(a.values[i] - b.values[i]);
  CHECK(diff > 0.1);
}

TEST_CASE("shared trigrams raise cosine similarity") {
  auto base = encode("small fishing boat with outboard motor");
  auto near_match = encode("small fishing boat with inboard motor");
  auto far = encode("zzqx qqvv kjkj wwpp");
  CHECK(cosine_similarity(base, near_match) > cosine_similarity(base, far));
}

TEST_CASE("empty description is rejected") { CHECK_THROWS(encode("")); }

TEST_CASE("single-character input still embeds (padding makes a trigram)") {
  auto e = encode("a");
  double n = 0.0;
  for (double v : e.values) n += v * v;
  CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embedding file round-trip") {
  EmbeddingCatalog catalog;
  for (const char* id : {"obj-a", "obj-b"}) {
    auto e = encode(std::string("description of ") + id);
    e.id = id;
    catalog[id] = e;
  }
  auto path = (std::filesystem::temp_directory_path() / "driftcast_embed_test.csv").string();
  save_embedding_file(catalog, path);
  auto loaded = load_embedding_file(path);
  REQUIRE(loaded.size() == 2);
  for (const auto& [id, e] : catalog) {
    REQUIRE(loaded.count(id) == 1);
    for (std::size_t i = 0; i < kEmbeddingDim; ++i)
      CHECK(loaded.at(id).values[i] == doctest::Approx(e.values[i]).epsilon(1e-15));
  }
  std::filesystem::remove(path);
}

TEST_CASE("malformed embedding rows are rejected with the row id") {
  auto path = (std::filesystem::temp_directory_path() / "driftcast_embed_bad.csv").string();
  {
    std::ofstream out(path);
    out << "id";
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) out << ",e_" << i;
    out << "\nshorty,0.5,0.5\n";  // far too few columns
  }
  try {
    load_embedding_file(path);
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("shorty") != std::string::npos);
  }
  std::filesystem::remove(path);
}
