#include "doanav/harness/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "doanav/common/rng.hpp"
#include "doanav/sim/serialize.hpp"
#include "doanav/sim/world.hpp"

namespace doanav::harness {

std::vector<std::uint64_t> EvalSettings::world_seeds() const {
  if (!held_out_world_seeds.empty()) return held_out_world_seeds;
  std::vector<std::uint64_t> out;
  for (int i = 0; i < held_out_worlds; ++i) out.push_back(derive_seed(world_seed_root, "test_world", i));
  return out;
}

void ExperimentConfig::validate() const {
  try {
    world.resolved().validate();
    model::ModelConfig m = model;
    m.match_world(world.resolved());
    m.validate();
    train.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (eval.seeds.empty()) throw ConfigError("eval.seeds must be nonempty");
  if (eval.n_episodes < 0) throw ConfigError("eval.n_episodes must be >= 0");
  if (eval.held_out_world_seeds.empty() && eval.held_out_worlds < 1)
    throw ConfigError("eval needs at least one held-out world");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

std::filesystem::path ExperimentConfig::output_path() const {
  std::filesystem::path p(output_dir);
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && p.is_relative())
    return std::filesystem::path(root) / p;
  return p;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "paper") {
    c.world.num_classes = 22;
    c.world.d_img = 512;
    c.world.d_vis = 512;
    c.world.image_grid = 7;
    c.world.objects_per_world = 30;
    c.world.min_classes_present = 8;
    c.model = model::ModelConfig{};
    c.train.workers = 18;
    c.train.total_episodes = 3000000;
    c.train.adam.lr = 1e-4;
    c.eval.n_episodes = 250;
    c.output_dir = "runs/paper";
  } else if (name == "desk") {
    c.world.grid_w = 6;
    c.world.grid_h = 6;
    c.world.num_classes = 8;
    c.world.d_img = 32;
    c.world.d_vis = 32;
    c.world.image_grid = 4;
    c.world.objects_per_world = 6;
    c.world.min_classes_present = 4;
    c.world.max_steps = 40;
    c.model.embed_dim = 32;
    c.model.head_dim = 16;
    c.model.num_heads = 4;
    c.model.reducer_hidden = 32;
    c.model.lstm_input = 32;
    c.model.lstm_hidden = 64;
    c.model.gcn_dim = 32;
    c.train.workers = 4;
    c.train.total_episodes = 20000;
    c.train.adam.lr = 1e-4;
    c.eval.n_episodes = 64;
    c.output_dir = "runs/desk";
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  c.model.match_world(c.world.resolved());
  return c;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"preset", "world", "model", "train", "eval", "output_dir"};
  static const std::set<std::string> eval_keys = {"n_episodes",      "seeds",         "held_out_world_seeds",
                                                  "held_out_worlds", "world_seed_root", "greedy"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw ConfigError("unknown config key: " + k);
  ExperimentConfig c = preset(j.value("preset", std::string("desk")));
  try {
    // Presets leave the class tables empty so they follow a num_classes override.
    if (j.contains("world")) j.at("world").get_to(c.world);
    if (j.contains("model")) j.at("model").get_to(c.model);
    if (j.contains("train")) j.at("train").get_to(c.train);
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      for (const auto& [k, v] : e.items())
        if (!eval_keys.contains(k)) throw ConfigError("unknown eval key: " + k);
      if (e.contains("n_episodes")) e.at("n_episodes").get_to(c.eval.n_episodes);
      if (e.contains("seeds")) e.at("seeds").get_to(c.eval.seeds);
      if (e.contains("held_out_world_seeds")) e.at("held_out_world_seeds").get_to(c.eval.held_out_world_seeds);
      if (e.contains("held_out_worlds")) e.at("held_out_worlds").get_to(c.eval.held_out_worlds);
      if (e.contains("world_seed_root")) e.at("world_seed_root").get_to(c.eval.world_seed_root);
      if (e.contains("greedy")) e.at("greedy").get_to(c.eval.greedy);
    }
    if (j.contains("output_dir")) j.at("output_dir").get_to(c.output_dir);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  c.model.match_world(c.world.resolved());
  c.validate();
  return c;
}

nlohmann::json experiment_to_json(const ExperimentConfig& c) {
  return {{"preset", c.preset},
          {"world", c.world},
          {"model", c.model},
          {"train", c.train},
          {"eval",
           {{"n_episodes", c.eval.n_episodes},
            {"seeds", c.eval.seeds},
            {"held_out_world_seeds", c.eval.held_out_world_seeds},
            {"held_out_worlds", c.eval.held_out_worlds},
            {"world_seed_root", c.eval.world_seed_root},
            {"greedy", c.eval.greedy}}},
          {"output_dir", c.output_dir}};
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return experiment_from_json(j);
}

std::vector<sim::World> held_out_worlds(const ExperimentConfig& c) {
  const auto wc = c.world.resolved();
  std::vector<sim::World> worlds;
  for (auto seed : c.eval.world_seeds()) worlds.push_back(sim::generate_world(seed, wc));
  return worlds;
}

}  // namespace doanav::harness
