#include "doanav/sim/serialize.hpp"

#include <set>
#include <stdexcept>

namespace doanav::sim {
namespace {

const char* band_name(HeightBand b) {
  switch (b) {
    case HeightBand::Low: return "low";
    case HeightBand::Mid: return "mid";
    case HeightBand::High: return "high";
  }
  return "mid";
}

HeightBand band_from_name(const std::string& s) {
  if (s == "low") return HeightBand::Low;
  if (s == "mid") return HeightBand::Mid;
  if (s == "high") return HeightBand::High;
  throw std::invalid_argument("unknown height_band: " + s);
}

}  // namespace

void to_json(nlohmann::json& j, const WorldConfig& c) {
  std::vector<std::string> bands;
  for (HeightBand b : c.class_height_band) bands.emplace_back(band_name(b));
  j = nlohmann::json{{"grid_w", c.grid_w},
                     {"grid_h", c.grid_h},
                     {"num_classes", c.num_classes},
                     {"class_base_size", c.class_base_size},
                     {"class_affinity", c.class_affinity},
                     {"class_height_band", bands},
                     {"view_range", c.view_range},
                     {"fov_deg", c.fov_deg},
                     {"success_dist", c.success_dist},
                     {"max_steps", c.max_steps},
                     {"conf_noise_sigma", c.conf_noise_sigma},
                     {"visual_noise_sigma", c.visual_noise_sigma},
                     {"image_noise_sigma", c.image_noise_sigma},
                     {"d_img", c.d_img},
                     {"d_vis", c.d_vis},
                     {"image_grid", c.image_grid},
                     {"ground_truth_detections", c.ground_truth_detections},
                     {"objects_per_world", c.objects_per_world},
                     {"min_classes_present", c.min_classes_present},
                     {"obstacle_density", c.obstacle_density},
                     {"catalog_seed", c.catalog_seed},
                     {"reward_success", c.reward_success},
                     {"reward_step", c.reward_step}};
}

void from_json(const nlohmann::json& j, WorldConfig& c) {
  static const std::set<std::string> known = {
      "grid_w", "grid_h", "num_classes", "class_base_size", "class_affinity", "class_height_band", "view_range",
      "fov_deg", "success_dist", "max_steps", "conf_noise_sigma", "visual_noise_sigma",
      "image_noise_sigma", "d_img", "d_vis", "image_grid", "ground_truth_detections",
      "objects_per_world", "min_classes_present", "obstacle_density", "catalog_seed",
      "reward_success", "reward_step"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw std::invalid_argument("unknown world config key: " + k);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("grid_w", c.grid_w);
  get("grid_h", c.grid_h);
  get("num_classes", c.num_classes);
  get("class_base_size", c.class_base_size);
  get("class_affinity", c.class_affinity);
  if (j.contains("class_height_band")) {
    c.class_height_band.clear();
    for (const auto& b : j.at("class_height_band")) c.class_height_band.push_back(band_from_name(b.get<std::string>()));
  }
  get("view_range", c.view_range);
  get("fov_deg", c.fov_deg);
  get("success_dist", c.success_dist);
  get("max_steps", c.max_steps);
  get("conf_noise_sigma", c.conf_noise_sigma);
  get("visual_noise_sigma", c.visual_noise_sigma);
  get("image_noise_sigma", c.image_noise_sigma);
  get("d_img", c.d_img);
  get("d_vis", c.d_vis);
  get("image_grid", c.image_grid);
  get("ground_truth_detections", c.ground_truth_detections);
  get("objects_per_world", c.objects_per_world);
  get("min_classes_present", c.min_classes_present);
  get("obstacle_density", c.obstacle_density);
  get("catalog_seed", c.catalog_seed);
  get("reward_success", c.reward_success);
  get("reward_step", c.reward_step);
}

nlohmann::json world_to_json(const World& world) {
  nlohmann::json grid = nlohmann::json::array();
  for (int y = 0; y < world.cfg.grid_h; ++y) {
    nlohmann::json rowj = nlohmann::json::array();
    for (int x = 0; x < world.cfg.grid_w; ++x) rowj.push_back(world.is_obstacle(x, y) ? 1 : 0);
    grid.push_back(std::move(rowj));
  }
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : world.objects) {
    objects.push_back({{"class_id", o.class_id},
                       {"x", o.x},
                       {"y", o.y},
                       {"height_band", band_name(o.height_band)},
                       {"size", o.size}});
  }
  return {{"format", "doanav-world"}, {"version", 1},         {"seed", world.seed},
          {"config", world.cfg},      {"obstacles", grid}, {"objects", objects}};
}

World world_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "doanav-world" || j.value("version", 0) != 1) {
    throw std::invalid_argument("not a doanav-world v1 document");
  }
  const WorldConfig cfg = j.at("config").get<WorldConfig>();
  std::vector<std::uint8_t> obstacles;
  for (const auto& rowj : j.at("obstacles"))
    for (const auto& v : rowj) obstacles.push_back(v.get<int>() != 0);
  std::vector<ObjectInstance> objects;
  for (const auto& oj : j.at("objects")) {
    ObjectInstance o;
    o.class_id = oj.at("class_id").get<int>();
    o.x = oj.at("x").get<int>();
    o.y = oj.at("y").get<int>();
    o.height_band = band_from_name(oj.at("height_band").get<std::string>());
    o.size = oj.at("size").get<double>();
    objects.push_back(o);
  }
  return make_world(cfg, std::move(obstacles), std::move(objects), j.at("seed").get<std::uint64_t>());
}

}  // namespace doanav::sim
