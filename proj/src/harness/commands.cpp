#include "doanav/harness/commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "doanav/metrics/entropy.hpp"
#include "doanav/metrics/export.hpp"
#include "doanav/metrics/records_io.hpp"
#include "doanav/model/checkpoint.hpp"
#include "doanav/model/policy.hpp"
#include "doanav/train/evaluate.hpp"
#include "doanav/train/trainer.hpp"

namespace doanav::harness {

namespace fs = std::filesystem;
using metrics::format_double;

namespace {

SplitStats mean_std(const std::vector<metrics::MetricsSummary>& xs) {
  SplitStats s;
  const double n = static_cast<double>(xs.size());
  for (const auto& x : xs) {
    s.mean.sr += x.sr / n;
    s.mean.spl += x.spl / n;
    s.mean.sae += x.sae / n;
    s.mean.n_episodes += x.n_episodes;
  }
  if (xs.size() > 1) {
    for (const auto& x : xs) {
      s.std.sr += (x.sr - s.mean.sr) * (x.sr - s.mean.sr);
      s.std.spl += (x.spl - s.mean.spl) * (x.spl - s.mean.spl);
      s.std.sae += (x.sae - s.mean.sae) * (x.sae - s.mean.sae);
    }
    s.std.sr = std::sqrt(s.std.sr / (n - 1));
    s.std.spl = std::sqrt(s.std.spl / (n - 1));
    s.std.sae = std::sqrt(s.std.sae / (n - 1));
  }
  s.std.n_episodes = s.mean.n_episodes;
  return s;
}

nlohmann::json split_json(const SplitStats& s) {
  return {{"mean", metrics::summary_to_json(s.mean)}, {"std", metrics::summary_to_json(s.std)}};
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void snapshot(const ExperimentConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_json(dir / "config.resolved.json", experiment_to_json(cfg));
}

void write_metrics_csv(const fs::path& path, const EvalReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "split,metric,mean,std\n";
  auto emit = [&](const char* split, const SplitStats& s) {
    out << split << ",sr," << format_double(s.mean.sr) << ',' << format_double(s.std.sr) << '\n';
    out << split << ",spl," << format_double(s.mean.spl) << ',' << format_double(s.std.spl) << '\n';
    out << split << ",sae," << format_double(s.mean.sae) << ',' << format_double(s.std.sae) << '\n';
  };
  emit("all", r.all);
  emit("long_paths", r.long_paths);
}

void write_eval_outputs(const fs::path& dir, const EvalReport& r) {
  metrics::write_records_jsonl(dir / "records.jsonl", r.records);
  write_json(dir / "metrics.json", eval_report_to_json(r));
  write_metrics_csv(dir / "metrics.csv", r);
}

int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const model::CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const metrics::EmptyInputError& e) {
    err << "empty input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::string combo_name(const std::vector<std::string>& toggles, unsigned bits) {
  std::string name;
  for (std::size_t t = 0; t < toggles.size(); ++t) {
    if (t) name += '-';
    name += toggles[t] + ((bits >> t) & 1u ? "_on" : "_off");
  }
  return name;
}

}  // namespace

EvalReport run_eval(const model::ModelParams& params, const ExperimentConfig& cfg, bool log_attention) {
  if (cfg.eval.n_episodes <= 0) throw metrics::EmptyInputError("eval.n_episodes is 0");
  const auto worlds = held_out_worlds(cfg);
  EvalReport r;
  r.seeds = cfg.eval.seeds;
  std::vector<metrics::MetricsSummary> all, longp;
  for (auto seed : cfg.eval.seeds) {
    train::EvalOptions opts;
    opts.n_episodes = cfg.eval.n_episodes;
    opts.seed = seed;
    opts.log_attention = log_attention;
    opts.greedy = cfg.eval.greedy;
    auto recs = train::evaluate(params, worlds, opts);
    r.per_seed.push_back(metrics::report(recs));
    all.push_back(r.per_seed.back().all);
    longp.push_back(r.per_seed.back().long_paths);
    r.records.insert(r.records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  r.all = mean_std(all);
  r.long_paths = mean_std(longp);
  return r;
}

nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json per_seed = nlohmann::json::array();
  for (std::size_t i = 0; i < r.seeds.size(); ++i)
    per_seed.push_back({{"seed", r.seeds[i]}, {"report", metrics::report_to_json(r.per_seed[i])}});
  return {{"seeds", r.seeds}, {"all", split_json(r.all)}, {"long_paths", split_json(r.long_paths)},
          {"per_seed", per_seed}};
}

DiagnoseReport run_diagnose(const model::ModelParams& params, const ExperimentConfig& cfg,
                            bool feature_entropy) {
  constexpr std::size_t kViewSamples = 64;
  constexpr std::size_t kFeatureCap = 2000;
  constexpr int kKnn = 3;
  DiagnoseReport d;
  const int n = params.cfg.num_classes;
  std::vector<std::vector<std::vector<double>>> features(n);

  if (cfg.eval.n_episodes <= 0) throw metrics::EmptyInputError("eval.n_episodes is 0");
  const auto worlds = held_out_worlds(cfg);
  std::vector<metrics::MetricsSummary> all, longp;
  for (auto seed : cfg.eval.seeds) {
    train::EvalOptions opts;
    opts.n_episodes = cfg.eval.n_episodes;
    opts.seed = seed;
    opts.greedy = cfg.eval.greedy;
    auto hook = [&](const sim::Observation& obs, int target) {
      if (d.view_samples.size() < kViewSamples && params.cfg.use_vag && !params.cfg.use_gcn_baseline) {
        // G_v depends only on the current view and target, so a fresh tape suffices.
        ad::Tape tape;
        ad::ParamBinding bind(tape, params.store);
        model::ForwardPass pass(params, bind);
        model::ForwardTrace trace;
        const auto zero = model::LstmState::zeros(params.cfg.lstm_hidden);
        pass.step(obs, target, model::kStartActionToken, tape.constant(zero.h), tape.constant(zero.c), false,
                  nullptr, &trace);
        const auto& g = trace.g_view->value();
        d.view_samples.emplace_back(g.data().begin(), g.data().end());
      }
      if (feature_entropy) {
        for (int q = 0; q < n; ++q) {
          if (obs.conf(q) <= 0.0 || features[q].size() >= kFeatureCap) continue;
          features[q].push_back(obs.detection(q).visual);
        }
      }
    };
    auto recs = train::evaluate(params, worlds, opts, hook);
    auto rep = metrics::report(recs);
    d.eval.per_seed.push_back(rep);
    all.push_back(rep.all);
    longp.push_back(rep.long_paths);
    d.eval.records.insert(d.eval.records.end(), std::make_move_iterator(recs.begin()),
                          std::make_move_iterator(recs.end()));
  }
  d.eval.seeds = cfg.eval.seeds;
  d.eval.all = mean_std(all);
  d.eval.long_paths = mean_std(longp);

  d.attention = metrics::attention_distribution(d.eval.records);
  for (double& a : d.attention) {
    if (a < 0.0) {
      a = 0.0;
      ++d.clipped_entries;
    }
  }
  d.bias = metrics::bias_ratio(d.attention);

  if (feature_entropy) {
    d.feature_entropy.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (int q = 0; q < n; ++q) {
      const auto& f = features[q];
      if (f.size() <= static_cast<std::size_t>(kKnn) + 1) continue;
      ad::Tensor samples(f.size(), f.front().size());
      for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t c = 0; c < f[i].size(); ++c) samples(i, c) = f[i][c];
      try {
        d.feature_entropy[q] = metrics::knn_entropy(samples, kKnn);
      } catch (const std::invalid_argument&) {
        // Degenerate (constant) features: leave NaN.
      }
    }
  }
  return d;
}

std::vector<std::string> parse_grid(const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  std::string item;
  model::ModelConfig probe;
  while (std::getline(ss, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (item.empty()) continue;
    try {
      model::get_toggle(probe, item);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    for (const auto& o : out)
      if (o == item) throw ConfigError("duplicate toggle in grid: " + item);
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty ablation grid");
  if (out.size() > 8) throw ConfigError("ablation grid limited to 8 toggles");
  return out;
}

model::ModelParams load_for(const fs::path& checkpoint, const ExperimentConfig& cfg) {
  model::ModelParams p = model::load_checkpoint(checkpoint);
  model::ModelConfig expected = cfg.model;
  expected.match_world(cfg.world.resolved());
  model::ensure_compatible(p, expected);
  return p;
}

int cmd_train(const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_experiment(config);
    const fs::path dir = cfg.output_path();
    snapshot(cfg, dir);
    auto result = train::train(cfg.train, cfg.world, cfg.model, [&](const train::CurveRow& row) {
      out << "episodes " << row.episodes << "  train_sr " << format_double(row.train_sr_ma) << "  val_sr "
          << format_double(row.val_sr) << "  loss " << format_double(row.loss) << '\n';
    });
    model::save_checkpoint(result.best_params, dir / "checkpoint.json");
    model::save_checkpoint(result.final_params, dir / "final.json");
    train::write_curve_csv(dir / "curve.csv", result.curve);
    out << "trained " << result.episodes << " episodes, " << result.env_steps << " env steps -> " << dir.string()
        << '\n';
  });
}

int cmd_eval(const fs::path& checkpoint, const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_experiment(config);
    const auto params = load_for(checkpoint, cfg);
    const fs::path dir = cfg.output_path();
    snapshot(cfg, dir);
    const auto r = run_eval(params, cfg);
    write_eval_outputs(dir, r);
    out << "SR " << format_double(r.all.mean.sr) << " +- " << format_double(r.all.std.sr) << "  SPL "
        << format_double(r.all.mean.spl) << "  SAE " << format_double(r.all.mean.sae) << "  ("
        << r.records.size() << " episodes)\n";
  });
}

int cmd_ablate(const fs::path& config, const std::string& grid, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_experiment(config);
    const auto toggles = parse_grid(grid);
    const fs::path dir = cfg.output_path();
    snapshot(cfg, dir);
    std::ofstream csv(dir / "ablation.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "ablation.csv").string());
    for (const auto& t : toggles) csv << t << ',';
    csv << "sr_all,spl_all,sae_all,sr_l5,spl_l5,sae_l5\n";
    // Row 0 has every toggle off: the baseline.
    for (unsigned bits = 0; bits < (1u << toggles.size()); ++bits) {
      ExperimentConfig run = cfg;
      for (std::size_t t = 0; t < toggles.size(); ++t) model::set_toggle(run.model, toggles[t], (bits >> t) & 1u);
      const fs::path sub = dir / "ablate" / combo_name(toggles, bits);
      fs::create_directories(sub);
      auto result = train::train(run.train, run.world, run.model);
      model::save_checkpoint(result.best_params, sub / "checkpoint.json");
      train::write_curve_csv(sub / "curve.csv", result.curve);
      const auto r = run_eval(result.best_params, run);
      write_eval_outputs(sub, r);
      for (std::size_t t = 0; t < toggles.size(); ++t) csv << ((bits >> t) & 1u) << ',';
      csv << format_double(r.all.mean.sr) << ',' << format_double(r.all.mean.spl) << ','
          << format_double(r.all.mean.sae) << ',' << format_double(r.long_paths.mean.sr) << ','
          << format_double(r.long_paths.mean.spl) << ',' << format_double(r.long_paths.mean.sae) << '\n';
      csv.flush();
      out << combo_name(toggles, bits) << "  SR " << format_double(r.all.mean.sr) << '\n';
    }
  });
}

int cmd_diagnose(const fs::path& checkpoint, const fs::path& config, bool feature_entropy, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_experiment(config);
    const auto params = load_for(checkpoint, cfg);
    const fs::path dir = cfg.output_path();
    snapshot(cfg, dir);
    const auto d = run_diagnose(params, cfg, feature_entropy);
    write_eval_outputs(dir, d.eval);
    {
      std::ofstream a(dir / "attention.csv");
      if (!a) throw std::runtime_error("cannot write attention.csv");
      a << "class,attention\n";
      for (std::size_t q = 0; q < d.attention.size(); ++q) a << q << ',' << format_double(d.attention[q]) << '\n';
    }
    nlohmann::json bias{{"ratio", d.bias.ratio},
                        {"normalized_entropy", d.bias.normalized_entropy},
                        {"clipped_negative_entries", d.clipped_entries},
                        {"gcn_baseline", params.cfg.use_gcn_baseline}};
    if (feature_entropy) {
      nlohmann::json fe = nlohmann::json::array();
      for (double h : d.feature_entropy) fe.push_back(std::isnan(h) ? nlohmann::json(nullptr) : nlohmann::json(h));
      bias["feature_entropy"] = fe;
    }
    write_json(dir / "bias.json", bias);
    if (params.ids.intrinsic_graph != model::kNoParam) metrics::export_graphs(params, dir, d.view_samples);
    out << "bias ratio " << format_double(d.bias.ratio) << "  normalized entropy "
        << format_double(d.bias.normalized_entropy) << '\n';
  });
}

}  // namespace doanav::harness
