#include <algorithm>
#include <cmath>
#include <random>

#include "doanav/sim/env.hpp"

namespace doanav::sim {

Observation observe(const World& world, const AgentState& state, int target_class, Rng& rng) {
  const WorldConfig& cfg = world.cfg;
  const int n = cfg.num_classes, dv = cfg.d_vis, width = cfg.detection_width();
  const int g = cfg.image_grid;
  const bool gt = cfg.ground_truth_detections;
  std::normal_distribution<double> normal(0.0, 1.0);

  Observation obs;
  obs.objects = ad::Tensor(n, width);
  obs.image = ad::Tensor(cfg.image_cells(), cfg.d_img);

  // Nearest visible instance per class.
  std::vector<const ObjectInstance*> nearest(n, nullptr);
  std::vector<Sighting> sights(n);
  for (const auto& o : world.objects) {
    const Sighting s = sight(world, state, o);
    if (!s.visible) continue;
    if (!nearest[o.class_id] || s.distance < sights[o.class_id].distance) {
      nearest[o.class_id] = &o;
      sights[o.class_id] = s;
    }
  }

  for (int q = 0; q < n; ++q) {
    const ObjectInstance* o = nearest[q];
    if (!o) continue;
    const Sighting& s = sights[q];
    double conf = 1.0;
    if (!gt) {
      conf = o->size * (1.0 - s.distance / cfg.view_range) + cfg.conf_noise_sigma * normal(rng);
      conf = std::clamp(conf, 0.0, 1.0);
    }
    const double vis_sigma = gt ? 0.0 : (1.0 - conf) * cfg.visual_noise_sigma;
    for (int k = 0; k < dv; ++k) {
      obs.objects(q, k) = world.catalog.visual_signature(q, k) * conf + vis_sigma * normal(rng);
    }
    // Positive bearing is toward yaw + 90, which is the agent's right.
    const double cx = std::clamp(0.5 + s.bearing_deg / cfg.fov_deg, 0.0, 1.0);
    // Image y grows downward; low objects sit low unless the agent looks down.
    const double band = 1.0 - static_cast<int>(o->height_band);
    const double tilt = 1.0 - static_cast<int>(state.pitch);
    const double cy = std::clamp(0.5 + 0.2 * (band - tilt), 0.0, 1.0);
    const double extent = std::clamp(o->size / (1.0 + s.distance), 0.0, 1.0);
    obs.objects(q, dv + 0) = cx;
    obs.objects(q, dv + 1) = cy;
    obs.objects(q, dv + 2) = extent;
    obs.objects(q, dv + 3) = extent;
    obs.objects(q, dv + 4) = conf;
    obs.objects(q, dv + 5) = q == target_class ? 1.0 : 0.0;

    const int col = std::min(g - 1, static_cast<int>(cx * g));
    const int rw = std::min(g - 1, static_cast<int>(cy * g));
    const int cell = rw * g + col;
    for (int k = 0; k < cfg.d_img; ++k) obs.image(cell, k) += conf * world.catalog.image_signature(q, k);
  }

  if (cfg.image_noise_sigma > 0.0) {
    for (double& v : obs.image.values()) v += cfg.image_noise_sigma * normal(rng);
  }
  return obs;
}

}  // namespace doanav::sim
