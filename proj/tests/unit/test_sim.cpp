#include <doctest.h>

#include <cmath>

#include "doanav/sim/env.hpp"
#include "doanav/sim/serialize.hpp"

using namespace doanav;
using namespace doanav::sim;

namespace {

WorldConfig small_cfg() {
  WorldConfig c;
  c.grid_w = 8;
  c.grid_h = 8;
  c.num_classes = 8;
  c.objects_per_world = 6;
  c.min_classes_present = 4;
  return c.resolved();
}

ObjectInstance obj(int cls, int x, int y, HeightBand band = HeightBand::Mid, double size = 1.0) {
  ObjectInstance o;
  o.class_id = cls;
  o.x = x;
  o.y = y;
  o.height_band = band;
  o.size = size;
  return o;
}

World open_world(int w, int h, std::vector<ObjectInstance> objects, WorldConfig cfg = small_cfg()) {
  cfg.grid_w = w;
  cfg.grid_h = h;
  return make_world(cfg, std::vector<std::uint8_t>(w * h, 0), std::move(objects));
}

}  // namespace

TEST_CASE("generate_world is deterministic") {
  const auto cfg = small_cfg();
  for (std::uint64_t seed : {1u, 2u, 99u}) CHECK(world_to_json(generate_world(seed, cfg)) == world_to_json(generate_world(seed, cfg)));
  CHECK(world_to_json(generate_world(1, cfg)) != world_to_json(generate_world(2, cfg)));
}

TEST_CASE("generated worlds satisfy their invariants") {
  const auto cfg = small_cfg();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const World w = generate_world(seed, cfg);
    CHECK(w.classes_present().size() >= 4);
    // All free cells are mutually reachable.
    const auto free = w.free_cells();
    REQUIRE(!free.empty());
    std::vector<int> seen(cfg.grid_w * cfg.grid_h, 0);
    std::vector<std::pair<int, int>> stack{free.front()};
    seen[free.front().second * cfg.grid_w + free.front().first] = 1;
    std::size_t count = 0;
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      ++count;
      const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (!w.in_bounds(nx, ny) || w.blocked(nx, ny) || seen[ny * cfg.grid_w + nx]) continue;
        seen[ny * cfg.grid_w + nx] = 1;
        stack.push_back({nx, ny});
      }
    }
    CHECK(count == free.size());
    // At most one instance per (cell, class).
    for (std::size_t i = 0; i < w.objects.size(); ++i)
      for (std::size_t j = i + 1; j < w.objects.size(); ++j)
        CHECK_FALSE((w.objects[i].x == w.objects[j].x && w.objects[i].y == w.objects[j].y &&
                     w.objects[i].class_id == w.objects[j].class_id));
  }
}

TEST_CASE("affinity clusters co-locate related classes") {
  WorldConfig cfg = small_cfg();
  cfg.grid_w = cfg.grid_h = 10;
  cfg.objects_per_world = 8;
  cfg.class_affinity.assign(8, std::vector<double>(8, 0.0));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if ((i < 4) == (j < 4)) cfg.class_affinity[i][j] = 1.0;
  int with_neighbor = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const World w = generate_world(seed, cfg);
    for (const auto& a : w.objects) {
      if (a.class_id >= 4) continue;
      ++total;
      for (const auto& b : w.objects) {
        if (&a == &b || b.class_id >= 4) continue;
        if (std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)) <= 2) {
          ++with_neighbor;
          break;
        }
      }
    }
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(with_neighbor) / total > 0.8);
}

TEST_CASE("infeasible configs fail generation") {
  WorldConfig cfg;
  cfg.grid_w = cfg.grid_h = 3;
  cfg.num_classes = 20;
  cfg.objects_per_world = 20;
  cfg.min_classes_present = 20;
  CHECK_THROWS_AS(generate_world(1, cfg.resolved()), GenerationError);
}

TEST_CASE("reset rejects absent targets and picks free poses") {
  const World w = generate_world(3, small_cfg());
  NavEnv env(w, 5);
  int absent = -1;
  for (int q = 0; q < w.cfg.num_classes; ++q)
    if (!w.class_present(q)) absent = q;
  if (absent >= 0) CHECK_THROWS_AS(env.reset(absent), EpisodeSpecError);
  for (int i = 0; i < 50; ++i) {
    auto [s, obs] = env.reset(w.classes_present().front());
    CHECK(w.in_bounds(s.x, s.y));
    CHECK_FALSE(w.blocked(s.x, s.y));
    CHECK(obs.objects.rows() == static_cast<std::size_t>(w.cfg.num_classes));
    CHECK(obs.image.rows() == static_cast<std::size_t>(w.cfg.image_cells()));
  }
}

TEST_CASE("step examples") {
  const World w = open_world(5, 5, {obj(0, 3, 2)});
  NavEnv env(w, 1);

  env.reset(0, AgentState{2, 2, 0, Pitch::Level});
  auto done = env.step(Action::Done);
  CHECK(done.success);
  CHECK(done.done);
  CHECK(done.reward == 5.0);

  env.reset(0, AgentState{2, 2, 180, Pitch::Level});  // target behind
  auto behind = env.step(Action::Done);
  CHECK_FALSE(behind.success);
  CHECK(behind.done);
  CHECK(behind.reward == doctest::Approx(-0.01));

  env.reset(0, AgentState{0, 0, 180, Pitch::Level});  // facing the west wall
  auto bump = env.step(Action::MoveAhead);
  CHECK(bump.info.collided);
  CHECK(bump.next_state.x == 0);
  CHECK(bump.next_state.y == 0);
  CHECK_FALSE(bump.done);

  env.reset(0, AgentState{2, 2, 0, Pitch::Level});  // object cell blocks too
  CHECK(env.step(Action::MoveAhead).info.collided);

  env.reset(0, AgentState{1, 1, 0, Pitch::Level});
  CHECK(env.step(Action::RotateLeft).next_state.yaw == 270);
  CHECK(env.step(Action::RotateRight).next_state.yaw == 0);
  CHECK(env.step(Action::RotateRight).next_state.yaw == 90);
  CHECK(env.step(Action::LookDown).next_state.pitch == Pitch::Down);
  CHECK(env.step(Action::LookDown).next_state.pitch == Pitch::Down);
  CHECK(env.step(Action::LookUp).next_state.pitch == Pitch::Level);
  CHECK(env.step(Action::MoveAhead).next_state.y == 2);  // yaw 90 faces +y

  CHECK_THROWS_AS(env.step(7), std::out_of_range);
}

TEST_CASE("episodes truncate at max_steps") {
  WorldConfig cfg = small_cfg();
  cfg.max_steps = 3;
  const World w = open_world(5, 5, {obj(0, 4, 4)}, cfg);
  NavEnv env(w, 1);
  env.reset(0, AgentState{0, 0, 0, Pitch::Level});
  CHECK_FALSE(env.step(Action::RotateLeft).done);
  CHECK_FALSE(env.step(Action::RotateLeft).done);
  auto last = env.step(Action::RotateLeft);
  CHECK(last.done);
  CHECK_FALSE(last.success);
  CHECK_THROWS(env.step(Action::RotateLeft));
}

TEST_CASE("observe examples") {
  Rng rng(1);
  const World w = open_world(6, 6, {obj(2, 5, 5)});
  // Facing away: nothing visible.
  const Observation none = observe(w, AgentState{0, 0, 180, Pitch::Level}, 2, rng);
  for (double v : none.objects.values()) CHECK(v == 0.0);

  WorldConfig gt = small_cfg();
  gt.ground_truth_detections = true;
  const World wg = open_world(6, 6, {obj(2, 3, 0)}, gt);
  const Observation seen = observe(wg, AgentState{0, 0, 0, Pitch::Level}, 2, rng);
  CHECK(seen.conf(2) == 1.0);
  CHECK(seen.target_flag(2) == 1.0);
  CHECK(seen.conf(1) == 0.0);

  // At exactly view_range the size term vanishes; only noise remains.
  WorldConfig far = small_cfg();
  far.grid_w = 7;
  const World wf = open_world(7, 1, {obj(3, 5, 0)}, far);
  for (int i = 0; i < 200; ++i) {
    const Observation o = observe(wf, AgentState{0, 0, 0, Pitch::Level}, 3, rng);
    CHECK(o.conf(3) <= 5.0 * far.conf_noise_sigma);
  }
}

TEST_CASE("height bands interact with pitch") {
  Rng rng(2);
  const World w = open_world(8, 1, {obj(0, 4, 0, HeightBand::Low), obj(1, 5, 0, HeightBand::High)});
  CHECK_FALSE(sight(w, AgentState{0, 0, 0, Pitch::Level}, w.objects[0]).visible);
  CHECK(sight(w, AgentState{0, 0, 0, Pitch::Down}, w.objects[0]).visible);
  CHECK_FALSE(sight(w, AgentState{0, 0, 0, Pitch::Down}, w.objects[1]).visible);
  CHECK(sight(w, AgentState{0, 0, 0, Pitch::Up}, w.objects[1]).visible);
  CHECK(sight(w, AgentState{2, 0, 0, Pitch::Level}, w.objects[0]).visible);  // close enough
}

TEST_CASE("confidence is non-increasing in distance without noise") {
  WorldConfig cfg = small_cfg();
  cfg.conf_noise_sigma = 0.0;
  cfg.grid_w = 8;
  const World w = open_world(8, 1, {obj(0, 7, 0, HeightBand::Mid, 0.8)}, cfg);
  Rng rng(3);
  double prev = 2.0;
  for (int x = 6; x >= 0; --x) {  // distance grows as x shrinks
    const double c = observe(w, AgentState{x, 0, 0, Pitch::Level}, 0, rng).conf(0);
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("default size spread gives large classes >= 3x the confidence of small ones") {
  WorldConfig cfg = small_cfg();
  const int big = cfg.num_classes - 1, small = 0;
  REQUIRE(cfg.class_base_size[big] == doctest::Approx(1.0));
  REQUIRE(cfg.class_base_size[small] == doctest::Approx(0.3));
  // Mean conf column per observation; a class that is out of view contributes 0.
  double sum_big = 0.0, sum_small = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; n < 1000; ++seed) {
    const World w = generate_world(seed, cfg);
    if (!w.class_present(big) || !w.class_present(small)) continue;
    NavEnv env(w, seed);
    for (int i = 0; i < 10 && n < 1000; ++i, ++n) {
      auto [s, obs] = env.reset(big);
      sum_big += obs.conf(big);
      sum_small += obs.conf(small);
    }
  }
  MESSAGE("mean conf big " << sum_big / n << " small " << sum_small / n);
  REQUIRE(sum_small > 0.0);
  CHECK(sum_big >= 3.0 * sum_small);
}

TEST_CASE("shortest path examples") {
  WorldConfig cfg = small_cfg();
  cfg.success_dist = 1.0;
  const World corridor = open_world(5, 1, {obj(0, 4, 0)}, cfg);
  CHECK(shortest_path_length(corridor, AgentState{0, 0, 0, Pitch::Level}, 0) == 3);
  CHECK(shortest_path_length(corridor, AgentState{3, 0, 0, Pitch::Level}, 0) == 0);
  CHECK(shortest_path_length(corridor, AgentState{3, 0, 180, Pitch::Level}, 0) == 2);

  // Target sealed behind a wall of obstacles.
  WorldConfig c2 = small_cfg();
  c2.grid_w = 5;
  c2.grid_h = 1;
  std::vector<std::uint8_t> grid = {0, 0, 1, 0, 0};
  c2.view_range = 1.0;
  c2.success_dist = 1.0;
  const World sealed = make_world(c2, grid, {obj(0, 4, 0)});
  CHECK(shortest_path_length(sealed, AgentState{0, 0, 0, Pitch::Level}, 0) == kUnreachable);
}

TEST_CASE("stepping is deterministic and success implies proximity") {
  const World w = generate_world(11, small_cfg());
  const int target = w.classes_present().back();
  auto run = [&](std::uint64_t seed) {
    NavEnv env(w, seed);
    env.reset(target);
    Rng pick(seed);
    std::uniform_int_distribution<int> a(0, 5);
    std::vector<std::vector<double>> trace;
    while (!env.done()) {
      auto out = env.step(a(pick));
      trace.push_back(out.observation.objects.values());
      trace.push_back({out.reward, static_cast<double>(out.next_state.x), static_cast<double>(out.next_state.y)});
      if (out.success) CHECK(out.info.dist_to_target <= w.cfg.success_dist + 1e-9);
    }
    return trace;
  };
  for (std::uint64_t s = 0; s < 30; ++s) CHECK(run(s) == run(s));
}

TEST_CASE("world and config JSON round-trip") {
  const World w = generate_world(8, small_cfg());
  const auto j = world_to_json(w);
  const World back = world_from_json(j);
  CHECK(world_to_json(back) == j);
  CHECK(back.objects == w.objects);
  CHECK(back.obstacles == w.obstacles);

  nlohmann::json bad = w.cfg;
  bad["no_such_key"] = 1;
  WorldConfig c;
  CHECK_THROWS(from_json(bad, c));
}

TEST_CASE("objects to the right project right of centre") {
  Rng rng(5);
  WorldConfig cfg = small_cfg();
  cfg.ground_truth_detections = true;
  // yaw 0 faces +x; RotateRight turns toward +y, so +y is the agent's right.
  const World w = open_world(6, 6, {obj(0, 3, 3), obj(1, 3, 1)}, cfg);
  const Observation o = observe(w, AgentState{1, 2, 0, Pitch::Level}, 0, rng);
  const int dv = cfg.d_vis;
  CHECK(o.objects(0, dv) > 0.5);
  CHECK(o.objects(1, dv) < 0.5);
}

TEST_CASE("class height bands follow the config table") {
  WorldConfig cfg = small_cfg();
  cfg.class_height_band.assign(cfg.num_classes, HeightBand::Mid);
  cfg.class_height_band[2] = HeightBand::High;
  const World w = generate_world(3, cfg);
  for (const auto& o : w.objects) CHECK(o.height_band == (o.class_id == 2 ? HeightBand::High : HeightBand::Mid));

  nlohmann::json j = cfg;
  CHECK(j.at("class_height_band")[2] == "high");
  WorldConfig back;
  from_json(j, back);
  CHECK(back.class_height_band == cfg.class_height_band);

  cfg.class_height_band.pop_back();
  CHECK_THROWS(cfg.resolved());
  j["class_height_band"][0] = "sideways";
  CHECK_THROWS(from_json(j, back));
}
