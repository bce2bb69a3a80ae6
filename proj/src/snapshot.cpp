#include "driftcast/snapshot.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace driftcast {

std::string config_hash(const std::string& config_json) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : config_json) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_snapshot(const std::string& path, const std::string& kind, std::uint64_t seed,
                   const std::string& config_json, const std::vector<std::string>& names,
                   const std::vector<TensorPtr>& tensors) {
  if (names.size() != tensors.size())
    throw std::invalid_argument("snapshot: name/tensor count mismatch");
  nlohmann::json j;
  j["format"] = "driftcast-snapshot-v1";
  j["kind"] = kind;
  j["seed"] = seed;
  j["config"] = config_json;
  j["config_hash"] = config_hash(config_json);
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    nlohmann::json t;
    t["name"] = names[i];
    t["shape"] = tensors[i]->shape;
    t["data"] = tensors[i]->data;
    arr.push_back(std::move(t));
  }
  j["tensors"] = std::move(arr);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write snapshot: " + path);
  out << j.dump() << "\n";
}

LoadedSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "driftcast-snapshot-v1")
    throw std::runtime_error("unrecognized snapshot format in " + path);
  LoadedSnapshot snap;
  snap.kind = j.at("kind").get<std::string>();
  snap.seed = j.at("seed").get<std::uint64_t>();
  snap.config_json = j.at("config").get<std::string>();
  snap.hash = j.at("config_hash").get<std::string>();
  if (snap.hash != config_hash(snap.config_json))
    throw std::runtime_error("snapshot config hash mismatch in " + path);
  for (const auto& t : j.at("tensors")) {
    snap.names.push_back(t.at("name").get<std::string>());
    snap.shapes.push_back(t.at("shape").get<std::vector<std::size_t>>());
    snap.data.push_back(t.at("data").get<std::vector<double>>());
  }
  return snap;
}

void restore_params(const LoadedSnapshot& snap, const std::vector<std::string>& names,
                    std::vector<TensorPtr>& params) {
  if (names.size() != params.size())
    throw std::invalid_argument("restore: name/param count mismatch");
  if (snap.names.size() != names.size())
    throw std::runtime_error("restore: snapshot holds " + std::to_string(snap.names.size()) +
                             " tensors, model expects " + std::to_string(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (snap.names[i] != names[i])
      throw std::runtime_error("restore: tensor name mismatch at index " + std::to_string(i) +
                               " (" + snap.names[i] + " vs " + names[i] + ")");
    if (snap.shapes[i] != params[i]->shape)
      throw std::runtime_error("restore: shape mismatch for tensor " + names[i]);
    params[i]->data = snap.data[i];
  }
}

}  // namespace driftcast
