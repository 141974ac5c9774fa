#include "doanav/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "doanav/common/rng.hpp"

namespace doanav::sim {

std::string to_string(Action a) {
  switch (a) {
    case Action::MoveAhead: return "MoveAhead";
    case Action::RotateLeft: return "RotateLeft";
    case Action::RotateRight: return "RotateRight";
    case Action::LookDown: return "LookDown";
    case Action::LookUp: return "LookUp";
    case Action::Done: return "Done";
  }
  return "?";
}

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw std::out_of_range("action index " + std::to_string(index) + " out of range");
  }
  return static_cast<Action>(index);
}

Detection Observation::detection(int q) const {
  Detection d;
  d.class_id = q;
  const int dv = d_vis();
  d.visual.assign(&objects.data()[q * objects.cols()], &objects.data()[q * objects.cols() + dv]);
  for (int k = 0; k < 4; ++k) d.bbox[k] = objects(q, dv + k);
  d.conf = conf(q);
  d.target_flag = target_flag(q);
  return d;
}

std::vector<double> default_base_sizes(int num_classes) {
  std::vector<double> s(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    s[c] = num_classes == 1 ? 1.0 : 0.3 + 0.7 * c / static_cast<double>(num_classes - 1);
  }
  return s;
}

std::vector<std::vector<double>> default_affinity(int num_classes) {
  const int groups = std::max(2, num_classes / 4);
  std::vector<std::vector<double>> a(num_classes, std::vector<double>(num_classes, 0.0));
  for (int i = 0; i < num_classes; ++i)
    for (int j = 0; j < num_classes; ++j)
      if (i != j && i % groups == j % groups) a[i][j] = 1.0;
  return a;
}

std::vector<HeightBand> default_height_bands(int num_classes) {
  std::vector<HeightBand> b(num_classes);
  for (int q = 0; q < num_classes; ++q) b[q] = static_cast<HeightBand>(q % 3);
  return b;
}

WorldConfig WorldConfig::resolved() const {
  WorldConfig r = *this;
  if (r.class_base_size.empty()) r.class_base_size = default_base_sizes(num_classes);
  if (r.class_affinity.empty()) r.class_affinity = default_affinity(num_classes);
  if (r.class_height_band.empty()) r.class_height_band = default_height_bands(num_classes);
  r.validate();
  return r;
}

void WorldConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("WorldConfig: " + m); };
  if (grid_w < 1 || grid_h < 1) fail("grid dimensions must be positive");
  if (num_classes < 1) fail("num_classes must be positive");
  if (static_cast<int>(class_base_size.size()) != num_classes)
    fail("class_base_size needs one entry per class");
  for (double s : class_base_size)
    if (!(s >= 0.3 && s <= 1.0)) fail("class_base_size entries must lie in [0.3, 1]");
  if (static_cast<int>(class_affinity.size()) != num_classes) fail("class_affinity must be N x N");
  for (int i = 0; i < num_classes; ++i) {
    if (static_cast<int>(class_affinity[i].size()) != num_classes)
      fail("class_affinity must be N x N");
    for (int j = 0; j < num_classes; ++j) {
      if (class_affinity[i][j] < 0.0) fail("class_affinity must be nonnegative");
      if (class_affinity[i][j] != class_affinity[j][i]) fail("class_affinity must be symmetric");
    }
  }
  if (static_cast<int>(class_height_band.size()) != num_classes)
    fail("class_height_band needs one entry per class");
  if (view_range <= 0.0) fail("view_range must be positive");
  if (fov_deg <= 0.0 || fov_deg > 360.0) fail("fov_deg must be in (0, 360]");
  if (success_dist < 0.0) fail("success_dist must be nonnegative");
  if (max_steps < 1) fail("max_steps must be positive");
  if (conf_noise_sigma < 0.0 || visual_noise_sigma < 0.0 || image_noise_sigma < 0.0)
    fail("noise sigmas must be nonnegative");
  if (d_img < 1 || d_vis < 1 || image_grid < 1) fail("feature dimensions must be positive");
  if (objects_per_world < 1) fail("objects_per_world must be positive");
  if (min_classes_present < 1 || min_classes_present > num_classes)
    fail("min_classes_present must be in [1, num_classes]");
  if (min_classes_present > objects_per_world) fail("min_classes_present exceeds objects_per_world");
  if (obstacle_density < 0.0 || obstacle_density >= 1.0) fail("obstacle_density must be in [0, 1)");
}

ClassCatalog ClassCatalog::build(const WorldConfig& cfg) {
  Rng rng = make_rng(cfg.catalog_seed, "catalog");
  std::normal_distribution<double> normal(0.0, 1.0);
  ClassCatalog c;
  c.visual_signature = ad::Tensor(cfg.num_classes, cfg.d_vis);
  c.image_signature = ad::Tensor(cfg.num_classes, cfg.d_img);
  for (double& v : c.visual_signature.values()) v = normal(rng);
  for (double& v : c.image_signature.values()) v = normal(rng);
  c.height_band = cfg.class_height_band.empty() ? default_height_bands(cfg.num_classes) : cfg.class_height_band;
  return c;
}

bool World::has_object(int x, int y) const {
  return std::any_of(objects.begin(), objects.end(),
                     [&](const ObjectInstance& o) { return o.x == x && o.y == y; });
}

bool World::blocked(int x, int y) const {
  return !in_bounds(x, y) || is_obstacle(x, y) || has_object(x, y);
}

std::vector<int> World::classes_present() const {
  std::set<int> s;
  for (const auto& o : objects) s.insert(o.class_id);
  return {s.begin(), s.end()};
}

bool World::class_present(int class_id) const {
  return std::any_of(objects.begin(), objects.end(),
                     [&](const ObjectInstance& o) { return o.class_id == class_id; });
}

std::vector<std::pair<int, int>> World::free_cells() const {
  std::vector<std::pair<int, int>> cells;
  for (int y = 0; y < cfg.grid_h; ++y)
    for (int x = 0; x < cfg.grid_w; ++x)
      if (!blocked(x, y)) cells.emplace_back(x, y);
  return cells;
}

namespace {

// blocked: grid of 0/1. True iff all unblocked cells form one 4-connected component.
bool connected(const std::vector<std::uint8_t>& blocked, int w, int h) {
  int total = 0, start = -1;
  for (int i = 0; i < w * h; ++i)
    if (!blocked[i]) {
      ++total;
      if (start < 0) start = i;
    }
  if (total == 0) return false;
  std::vector<std::uint8_t> seen(w * h, 0);
  std::deque<int> q{start};
  seen[start] = 1;
  int reached = 0;
  while (!q.empty()) {
    const int i = q.front();
    q.pop_front();
    ++reached;
    const int x = i % w, y = i / w;
    const int nx[4] = {x + 1, x - 1, x, x};
    const int ny[4] = {y, y, y + 1, y - 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
      const int j = ny[k] * w + nx[k];
      if (!blocked[j] && !seen[j]) {
        seen[j] = 1;
        q.push_back(j);
      }
    }
  }
  return reached == total;
}

// Marks cell i blocked if doing so keeps the free space connected.
bool try_block(std::vector<std::uint8_t>& blocked, int i, int w, int h) {
  if (blocked[i]) return false;
  blocked[i] = 1;
  if (connected(blocked, w, h)) return true;
  blocked[i] = 0;
  return false;
}

std::optional<World> attempt(std::uint64_t seed, const WorldConfig& cfg, Rng& rng) {
  const int w = cfg.grid_w, h = cfg.grid_h, cells = w * h;
  std::vector<std::uint8_t> obstacles(cells, 0);
  std::vector<std::uint8_t> blocked(cells, 0);
  std::uniform_int_distribution<int> any_cell(0, cells - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int want_obstacles = static_cast<int>(std::lround(cfg.obstacle_density * cells));
  for (int placed = 0, tries = 0; placed < want_obstacles && tries < 8 * want_obstacles + 8; ++tries) {
    const int i = any_cell(rng);
    if (try_block(blocked, i, w, h)) {
      obstacles[i] = 1;
      ++placed;
    }
  }

  std::vector<ObjectInstance> objects;
  std::set<int> present;
  auto place = [&](int cls, int i) {
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    ObjectInstance o;
    o.class_id = cls;
    o.x = i % w;
    o.y = i / w;
    o.size = std::clamp(cfg.class_base_size[cls] + jitter(rng), 0.3, 1.0);
    objects.push_back(o);
    present.insert(cls);
  };

  int stall = 0;
  while (static_cast<int>(objects.size()) < cfg.objects_per_world) {
    if (++stall > 50 * cfg.objects_per_world) return std::nullopt;
    int anchor_cls;
    if (static_cast<int>(present.size()) < cfg.min_classes_present) {
      std::vector<int> missing;
      for (int c = 0; c < cfg.num_classes; ++c)
        if (!present.contains(c)) missing.push_back(c);
      anchor_cls = missing[std::uniform_int_distribution<int>(0, missing.size() - 1)(rng)];
    } else {
      anchor_cls = std::uniform_int_distribution<int>(0, cfg.num_classes - 1)(rng);
    }
    const int anchor = any_cell(rng);
    if (!try_block(blocked, anchor, w, h)) continue;
    place(anchor_cls, anchor);

    // Related classes cluster around the anchor.
    const auto& aff = cfg.class_affinity[anchor_cls];
    double total_aff = 0.0;
    for (double a : aff) total_aff += a;
    if (total_aff <= 0.0) continue;
    const int extra = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int k = 0; k < extra && static_cast<int>(objects.size()) < cfg.objects_per_world; ++k) {
      double pick = unit(rng) * total_aff;
      int cls = 0;
      for (; cls < cfg.num_classes - 1; ++cls) {
        if (pick < aff[cls]) break;
        pick -= aff[cls];
      }
      if (aff[cls] <= 0.0) continue;
      std::vector<int> near;
      const int ax = anchor % w, ay = anchor / w;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const int x = ax + dx, y = ay + dy;
          if ((dx || dy) && x >= 0 && y >= 0 && x < w && y < h && !blocked[y * w + x])
            near.push_back(y * w + x);
        }
      std::shuffle(near.begin(), near.end(), rng);
      for (int i : near) {
        if (try_block(blocked, i, w, h)) {
          place(cls, i);
          break;
        }
      }
    }
  }
  if (static_cast<int>(present.size()) < cfg.min_classes_present) return std::nullopt;

  World world;
  world.cfg = cfg;
  world.seed = seed;
  world.obstacles = std::move(obstacles);
  world.objects = std::move(objects);
  world.catalog = ClassCatalog::build(cfg);
  for (auto& o : world.objects) o.height_band = world.catalog.height_band[o.class_id];
  return world;
}

}  // namespace

World generate_world(std::uint64_t seed, const WorldConfig& config) {
  const WorldConfig cfg = config.resolved();
  const int cells = cfg.grid_w * cfg.grid_h;
  if (cfg.objects_per_world + 1 > cells) {
    throw GenerationError("cannot place " + std::to_string(cfg.objects_per_world) +
                          " objects and an agent on a " + std::to_string(cfg.grid_w) + "x" +
                          std::to_string(cfg.grid_h) + " grid");
  }
  Rng rng = make_rng(seed, "world");
  for (int tries = 0; tries < 50; ++tries) {
    if (auto w = attempt(seed, cfg, rng)) return std::move(*w);
  }
  throw GenerationError("world generation failed after 50 attempts for seed " +
                        std::to_string(seed));
}

World make_world(const WorldConfig& config, std::vector<std::uint8_t> obstacles,
                 std::vector<ObjectInstance> objects, std::uint64_t seed) {
  World world;
  world.cfg = config.resolved();
  if (static_cast<int>(obstacles.size()) != world.cfg.grid_w * world.cfg.grid_h) {
    throw std::invalid_argument("make_world: obstacle grid size mismatch");
  }
  world.seed = seed;
  world.obstacles = std::move(obstacles);
  world.objects = std::move(objects);
  world.catalog = ClassCatalog::build(world.cfg);
  for (const auto& o : world.objects) {
    if (o.class_id < 0 || o.class_id >= world.cfg.num_classes || !world.in_bounds(o.x, o.y))
      throw std::invalid_argument("make_world: object out of range");
  }
  return world;
}

Sighting sight(const World& world, const AgentState& state, const ObjectInstance& obj) {
  Sighting s;
  const double vx = obj.x - state.x, vy = obj.y - state.y;
  s.distance = std::hypot(vx, vy);
  const double yaw = state.yaw * std::numbers::pi / 180.0;
  const double fx = std::cos(yaw), fy = std::sin(yaw);
  s.bearing_deg = std::atan2(fx * vy - fy * vx, fx * vx + fy * vy) * 180.0 / std::numbers::pi;
  const auto& cfg = world.cfg;
  if (s.distance <= 0.0 || s.distance > cfg.view_range + 1e-9) return s;
  if (std::abs(s.bearing_deg) > cfg.fov_deg / 2.0 + 1e-9) return s;
  const bool close = s.distance <= 2.0 + 1e-9;
  switch (obj.height_band) {
    case HeightBand::Mid: s.visible = true; break;
    case HeightBand::Low: s.visible = state.pitch == Pitch::Down || close; break;
    case HeightBand::High: s.visible = state.pitch == Pitch::Up || close; break;
  }
  return s;
}

bool success_predicate(const World& world, const AgentState& state, int target_class) {
  for (const auto& o : world.objects) {
    if (o.class_id != target_class) continue;
    const Sighting s = sight(world, state, o);
    if (s.visible && s.distance <= world.cfg.success_dist + 1e-9) return true;
  }
  return false;
}

double distance_to_class(const World& world, const AgentState& state, int target_class) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : world.objects)
    if (o.class_id == target_class) best = std::min(best, std::hypot(o.x - state.x, o.y - state.y));
  return best;
}

bool class_visible(const World& world, const AgentState& state, int target_class) {
  for (const auto& o : world.objects)
    if (o.class_id == target_class && sight(world, state, o).visible) return true;
  return false;
}

}  // namespace doanav::sim
