#include "doanav/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "doanav/metrics/records_io.hpp"
#include "doanav/model/policy.hpp"
#include "doanav/train/a3c.hpp"
#include "doanav/train/evaluate.hpp"
#include "doanav/train/rollout.hpp"

namespace doanav::train {

std::string to_string(SyncMode m) { return m == SyncMode::Synchronous ? "synchronous" : "asynchronous"; }

SyncMode sync_mode_from_string(const std::string& s) {
  if (s == "synchronous" || s == "sync") return SyncMode::Synchronous;
  if (s == "asynchronous" || s == "async") return SyncMode::Asynchronous;
  throw std::invalid_argument("unknown sync_mode: " + s);
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("train config: " + m); };
  if (workers < 1) fail("workers must be >= 1");
  if (total_episodes < 0) fail("total_episodes must be >= 0");
  if (max_env_steps < 0) fail("max_env_steps must be >= 0");
  if (rollout_len < 1) fail("rollout_len must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
  if (beta_entropy < 0.0 || value_coef < 0.0) fail("loss coefficients must be >= 0");
  if (!(adam.lr > 0.0)) fail("lr must be > 0");
  if (adam.beta1 < 0.0 || adam.beta1 >= 1.0 || adam.beta2 < 0.0 || adam.beta2 >= 1.0) fail("adam betas must lie in [0, 1)");
  if (!(adam.eps > 0.0)) fail("adam eps must be > 0");
  if (!(grad_clip > 0.0)) fail("grad_clip must be > 0");
  if (train_worlds < 1 || val_worlds < 1) fail("world pools must be nonempty");
  if (val_interval < 1 || val_episodes < 1 || sr_window < 1) fail("validation settings must be >= 1");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"workers", c.workers},
                     {"total_episodes", c.total_episodes},
                     {"max_env_steps", c.max_env_steps},
                     {"rollout_len", c.rollout_len},
                     {"gamma", c.gamma},
                     {"beta_entropy", c.beta_entropy},
                     {"value_coef", c.value_coef},
                     {"lr", c.adam.lr},
                     {"adam_beta1", c.adam.beta1},
                     {"adam_beta2", c.adam.beta2},
                     {"adam_eps", c.adam.eps},
                     {"grad_clip", c.grad_clip},
                     {"seed", c.seed},
                     {"sync_mode", to_string(c.sync_mode)},
                     {"train_worlds", c.train_worlds},
                     {"val_worlds", c.val_worlds},
                     {"val_interval", c.val_interval},
                     {"val_episodes", c.val_episodes},
                     {"sr_window", c.sr_window},
                     {"record_wall_time", c.record_wall_time}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const std::set<std::string> known = {
      "workers", "total_episodes", "max_env_steps", "rollout_len", "gamma", "beta_entropy",
      "value_coef", "lr", "adam_beta1", "adam_beta2", "adam_eps", "grad_clip", "seed",
      "sync_mode", "train_worlds", "val_worlds", "val_interval", "val_episodes", "sr_window",
      "record_wall_time"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw std::invalid_argument("unknown train config key: " + k);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("workers", c.workers);
  get("total_episodes", c.total_episodes);
  get("max_env_steps", c.max_env_steps);
  get("rollout_len", c.rollout_len);
  get("gamma", c.gamma);
  get("beta_entropy", c.beta_entropy);
  get("value_coef", c.value_coef);
  get("lr", c.adam.lr);
  get("adam_beta1", c.adam.beta1);
  get("adam_beta2", c.adam.beta2);
  get("adam_eps", c.adam.eps);
  get("grad_clip", c.grad_clip);
  get("seed", c.seed);
  if (j.contains("sync_mode")) c.sync_mode = sync_mode_from_string(j.at("sync_mode").get<std::string>());
  get("train_worlds", c.train_worlds);
  get("val_worlds", c.val_worlds);
  get("val_interval", c.val_interval);
  get("val_episodes", c.val_episodes);
  get("sr_window", c.sr_window);
  get("record_wall_time", c.record_wall_time);
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  using metrics::format_double;
  out << "episodes,train_sr_ma,val_sr,val_spl,val_sae,loss,wall_s\n";
  for (const auto& r : rows)
    out << r.episodes << ',' << format_double(r.train_sr_ma) << ',' << format_double(r.val_sr) << ','
        << format_double(r.val_spl) << ',' << format_double(r.val_sae) << ',' << format_double(r.loss)
        << ',' << format_double(r.wall_s) << '\n';
}

std::vector<sim::World> make_worlds(const sim::WorldConfig& cfg, std::uint64_t root,
                                    const std::string& stream, int count) {
  std::vector<sim::World> worlds;
  worlds.reserve(count);
  for (int i = 0; i < count; ++i) worlds.push_back(sim::generate_world(derive_seed(root, stream, i), cfg));
  return worlds;
}

namespace {

struct GradResult {
  double loss = 0.0;
  std::vector<EpisodeEnd> finished;
};

// Collects one rollout for a worker against params and adds its gradient into grads.
GradResult worker_gradient(const model::ModelParams& params, Worker& worker, const TrainConfig& cfg,
                           int len, ad::GradBuffer& grads) {
  ad::Tape tape;
  ad::ParamBinding bind(tape, params.store);
  model::ForwardPass pass(params, bind);
  Rollout r = worker.collect(pass, len, true);
  LossParts loss = a3c_loss(r, {cfg.gamma, cfg.value_coef, cfg.beta_entropy});
  tape.backward(loss.total);
  bind.accumulate(grads);
  return {loss.total.value().item(), worker.take_finished()};
}

class Progress {
 public:
  Progress(const TrainConfig& cfg, const std::vector<sim::World>& val_worlds, const CurveSink& sink,
           TrainResult& result)
      : cfg_(cfg), val_worlds_(val_worlds), sink_(sink), result_(result),
        start_(std::chrono::steady_clock::now()), next_val_(cfg.val_interval) {}

  void add_loss(double l) {
    loss_sum_ += l;
    ++loss_count_;
  }

  // Returns true when a validation is due.
  bool add_episode(bool success) {
    window_.push_back(success);
    if (static_cast<int>(window_.size()) > cfg_.sr_window) window_.pop_front();
    ++result_.episodes;
    if (result_.episodes >= next_val_) {
      next_val_ += cfg_.val_interval;
      return true;
    }
    return false;
  }

  void validate(const model::ModelParams& params) {
    EvalOptions opts;
    opts.n_episodes = cfg_.val_episodes;
    opts.seed = derive_seed(cfg_.seed, "validation");
    opts.log_attention = false;
    auto records = evaluate(params, val_worlds_, opts);
    auto s = metrics::summarize(records);

    CurveRow row;
    row.episodes = result_.episodes;
    row.train_sr_ma = window_.empty() ? 0.0
                                      : static_cast<double>(std::count(window_.begin(), window_.end(), true)) /
                                            static_cast<double>(window_.size());
    row.val_sr = s.sr;
    row.val_spl = s.spl;
    row.val_sae = s.sae;
    row.loss = loss_count_ ? loss_sum_ / static_cast<double>(loss_count_) : 0.0;
    if (cfg_.record_wall_time)
      row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    loss_sum_ = 0.0;
    loss_count_ = 0;
    result_.curve.push_back(row);
    if (sink_) sink_(row);
    if (s.sr > result_.best_val_sr || (s.sr == result_.best_val_sr && s.spl > best_spl_)) {
      result_.best_val_sr = s.sr;
      best_spl_ = s.spl;
      result_.best_params = params;
    }
  }

  bool logged_at_current() const {
    return !result_.curve.empty() && result_.curve.back().episodes == result_.episodes;
  }

 private:
  const TrainConfig& cfg_;
  const std::vector<sim::World>& val_worlds_;
  const CurveSink& sink_;
  TrainResult& result_;
  std::chrono::steady_clock::time_point start_;
  std::int64_t next_val_;
  std::deque<bool> window_;
  double loss_sum_ = 0.0;
  std::int64_t loss_count_ = 0;
  double best_spl_ = -1.0;
};

bool budget_left(const TrainConfig& cfg, const TrainResult& r) {
  if (r.episodes >= cfg.total_episodes) return false;
  return cfg.max_env_steps == 0 || r.env_steps < cfg.max_env_steps;
}

// Rollout length that keeps the step budget a hard ceiling; 0 once spent.
int step_allowance(const TrainConfig& cfg, std::int64_t committed) {
  if (cfg.max_env_steps == 0) return cfg.rollout_len;
  return static_cast<int>(std::clamp<std::int64_t>(cfg.max_env_steps - committed, 0, cfg.rollout_len));
}

void apply_update(model::ModelParams& params, ad::GradBuffer& grads, AdamState& adam, const TrainConfig& cfg) {
  clip_grad_norm(grads, cfg.grad_clip);
  adam_update(params.store, grads, adam, cfg.adam);
}

void train_sync(const TrainConfig& cfg, model::ModelParams& params, std::vector<Worker>& workers,
                Progress& progress, TrainResult& result) {
  AdamState adam = AdamState::zeros_like(params.store);
  ad::GradBuffer grads = ad::GradBuffer::zeros_like(params.store);
  while (budget_left(cfg, result)) {
    grads.zero();
    std::vector<std::vector<EpisodeEnd>> ends;
    double loss = 0.0;
    std::int64_t committed = result.env_steps;
    for (auto& w : workers) {
      const int len = step_allowance(cfg, committed);
      if (len == 0) break;
      committed += len;
      auto g = worker_gradient(params, w, cfg, len, grads);
      loss += g.loss;
      ends.push_back(std::move(g.finished));
    }
    const double n = static_cast<double>(ends.size());
    grads.scale(1.0 / n);
    apply_update(params, grads, adam, cfg);
    progress.add_loss(loss / n);
    result.env_steps = 0;
    for (const auto& w : workers) result.env_steps += w.env_steps();
    for (const auto& e : ends)
      for (const auto& end : e)
        if (progress.add_episode(end.success)) progress.validate(params);
  }
}

void train_async(const TrainConfig& cfg, model::ModelParams& params, std::vector<Worker>& workers,
                 Progress& progress, TrainResult& result) {
  AdamState adam = AdamState::zeros_like(params.store);
  std::mutex mu;
  std::vector<std::thread> threads;
  std::exception_ptr error;
  std::int64_t committed = 0;  // steps reserved by in-flight rollouts
  for (std::size_t k = 0; k < workers.size(); ++k) {
    threads.emplace_back([&, k] {
      try {
        std::int64_t last_steps = 0;
        for (;;) {
          model::ModelParams local;
          int len = 0;
          {
            std::lock_guard lock(mu);
            if (error || !budget_left(cfg, result)) return;
            len = step_allowance(cfg, committed);
            if (len == 0) return;
            committed += len;
            local = params;
          }
          ad::GradBuffer grads = ad::GradBuffer::zeros_like(local.store);
          auto g = worker_gradient(local, workers[k], cfg, len, grads);
          std::lock_guard lock(mu);
          committed -= len - (workers[k].env_steps() - last_steps);
          apply_update(params, grads, adam, cfg);
          progress.add_loss(g.loss);
          result.env_steps += workers[k].env_steps() - last_steps;
          last_steps = workers[k].env_steps();
          for (const auto& end : g.finished)
            if (progress.add_episode(end.success)) progress.validate(params);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<sim::World>& train_worlds,
                  const std::vector<sim::World>& val_worlds, const model::ModelConfig& model_cfg,
                  const CurveSink& sink) {
  cfg.validate();
  if (train_worlds.empty() || val_worlds.empty()) throw std::invalid_argument("world pools must be nonempty");
  model::ModelConfig mc = model_cfg;
  mc.match_world(train_worlds.front().cfg);
  mc.validate();

  TrainResult result;
  result.final_params = model::ModelParams::create(mc, derive_seed(cfg.seed, "model"));
  result.best_params = result.final_params;
  if (cfg.total_episodes == 0) return result;

  std::vector<Worker> workers;
  for (int k = 0; k < cfg.workers; ++k) workers.emplace_back(train_worlds, cfg.seed, k);

  Progress progress(cfg, val_worlds, sink, result);
  if (cfg.sync_mode == SyncMode::Synchronous)
    train_sync(cfg, result.final_params, workers, progress, result);
  else
    train_async(cfg, result.final_params, workers, progress, result);
  if (!progress.logged_at_current()) progress.validate(result.final_params);
  return result;
}

TrainResult train(const TrainConfig& cfg, const sim::WorldConfig& world_cfg,
                  const model::ModelConfig& model_cfg, const CurveSink& sink) {
  cfg.validate();
  const sim::WorldConfig wc = world_cfg.resolved();
  model::ModelConfig mc = model_cfg;
  mc.match_world(wc);
  mc.validate();
  const auto train_worlds = make_worlds(wc, cfg.seed, "train_world", cfg.train_worlds);
  const auto val_worlds = make_worlds(wc, cfg.seed, "val_world", cfg.val_worlds);
  return train(cfg, train_worlds, val_worlds, mc, sink);
}

}  // namespace doanav::train
