#include "doanav/model/checkpoint.hpp"

#include <fstream>

namespace doanav::model {

nlohmann::json checkpoint_to_json(const ModelParams& params) {
  nlohmann::json plist = nlohmann::json::array();
  for (const auto& p : params.store.params()) {
    plist.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"data", p.value.values()}});
  }
  return {{"format", "doanav-checkpoint"},
          {"version", 1},
          {"model_config", params.cfg},
          {"params", std::move(plist)}};
}

ModelParams checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "doanav-checkpoint") throw CheckpointError("not a doanav checkpoint");
  if (j.value("version", 0) != 1) throw CheckpointError("unsupported checkpoint version");
  ModelParams mp;
  try {
    mp.cfg = j.at("model_config").get<ModelConfig>();
    for (const auto& pj : j.at("params")) {
      auto shape = pj.at("shape").get<std::vector<std::size_t>>();
      auto data = pj.at("data").get<std::vector<double>>();
      mp.store.add(pj.at("name").get<std::string>(), ad::Tensor(std::move(shape), std::move(data)));
    }
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  mp.relink();
  // A freshly built model of the same config must have identical names and shapes.
  const ModelParams ref = ModelParams::create(mp.cfg, 0);
  if (ref.store.size() != mp.store.size()) throw CheckpointError("checkpoint parameter set does not match its config");
  for (std::size_t i = 0; i < ref.store.size(); ++i) {
    const auto& a = ref.store.params()[i];
    const auto id = mp.store.find(a.name);
    if (!id || mp.store.value(*id).shape() != a.value.shape())
      throw CheckpointError("checkpoint parameter " + a.name + " missing or misshapen");
  }
  return mp;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(params).dump();
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CheckpointError("checkpoint " + path.string() + " is not valid JSON");
  }
  return checkpoint_from_json(j);
}

void ensure_compatible(const ModelParams& loaded, const ModelConfig& expected) {
  if (!loaded.cfg.same_shapes(expected)) {
    throw CheckpointError("checkpoint is incompatible with the configured model shapes");
  }
}

}  // namespace doanav::model
