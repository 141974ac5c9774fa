#include <CLI11.hpp>
#include <iostream>

#include "doanav/harness/commands.hpp"

int main(int argc, char** argv) {
  namespace h = doanav::harness;
  CLI::App app{"Directed object attention navigation: train, evaluate, ablate and diagnose"};
  app.require_subcommand(1);

  std::string config, checkpoint, grid;
  bool feature_entropy = false;

  auto* train = app.add_subcommand("train", "train a model from a config");
  train->add_option("config", config, "experiment config JSON")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on held-out worlds");
  eval->add_option("checkpoint", checkpoint, "checkpoint JSON")->required();
  eval->add_option("config", config, "experiment config JSON")->required();

  auto* ablate = app.add_subcommand("ablate", "train and evaluate every toggle combination");
  ablate->add_option("config", config, "experiment config JSON")->required();
  ablate->add_option("--grid", grid, "comma-separated model toggles, e.g. use_uaoa,use_uaia,use_abed")
      ->required();

  auto* diagnose = app.add_subcommand("diagnose", "attention bias report and graph exports");
  diagnose->add_option("checkpoint", checkpoint, "checkpoint JSON")->required();
  diagnose->add_option("config", config, "experiment config JSON")->required();
  diagnose->add_flag("--feature-entropy", feature_entropy, "per-class knn entropy of detected visual features");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : h::kExitConfig;
  }

  if (*train) return h::cmd_train(config, std::cout, std::cerr);
  if (*eval) return h::cmd_eval(checkpoint, config, std::cout, std::cerr);
  if (*ablate) return h::cmd_ablate(config, grid, std::cout, std::cerr);
  return h::cmd_diagnose(checkpoint, config, feature_entropy, std::cout, std::cerr);
}
