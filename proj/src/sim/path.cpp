#include <deque>

#include "doanav/sim/env.hpp"

namespace doanav::sim {

int shortest_path_length(const World& world, const AgentState& pose, int target_class) {
  const int w = world.cfg.grid_w, h = world.cfg.grid_h;
  auto encode = [&](const AgentState& s) {
    return ((s.y * w + s.x) * 4 + s.yaw / 90) * 3 + static_cast<int>(s.pitch);
  };
  std::vector<int> dist(w * h * 12, -1);
  std::deque<AgentState> frontier{pose};
  dist[encode(pose)] = 0;
  static constexpr int dx[4] = {1, 0, -1, 0};
  static constexpr int dy[4] = {0, 1, 0, -1};
  while (!frontier.empty()) {
    const AgentState s = frontier.front();
    frontier.pop_front();
    const int d = dist[encode(s)];
    if (success_predicate(world, s, target_class)) return d;
    AgentState next[5] = {s, s, s, s, s};
    const int k = s.yaw / 90;
    if (!world.blocked(s.x + dx[k], s.y + dy[k])) {
      next[0].x += dx[k];
      next[0].y += dy[k];
    }
    next[1].yaw = (s.yaw + 270) % 360;
    next[2].yaw = (s.yaw + 90) % 360;
    if (s.pitch != Pitch::Down) next[3].pitch = static_cast<Pitch>(static_cast<int>(s.pitch) - 1);
    if (s.pitch != Pitch::Up) next[4].pitch = static_cast<Pitch>(static_cast<int>(s.pitch) + 1);
    for (const auto& n : next) {
      const int e = encode(n);
      if (dist[e] < 0) {
        dist[e] = d + 1;
        frontier.push_back(n);
      }
    }
  }
  return kUnreachable;
}

}  // namespace doanav::sim
