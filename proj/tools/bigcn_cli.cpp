// SPDX-License-Identifier: Apache-2.0
// bigcn command line: experiment runner, oracle suite, presets.
#include <iostream>

#include "CLI11.hpp"
#include "bigcn/experiment.hpp"
#include "bigcn/oracles.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

constexpr const char* kConvertHelp = R"(Converting Planetoid citation datasets (cora, citeseer, pubmed)

The converter is a separate Python tool and is not bundled with this build.
Its command line is

  convert <raw_dir> <name> <out_dir>        exit 0 on success, 1 on error

where <raw_dir> holds the upstream ind.<name>.{x,tx,allx,y,ty,ally,graph,test.index}
files. It writes a dataset directory in the format `run` reads
(UTF-8, LF line endings, 0-indexed nodes):

  meta.txt      three lines: n=<int>, d=<int>, classes=<int>
  edges.txt     one undirected edge "u v" per line, u < v, unique
  features.txt  n lines of d space-separated reals
  labels.txt    n lines, class index or -1 for unlabeled
  masks.txt     n lines, one of train|val|test|none

Any directory in this format works, converted or hand-made. Point an
experiment at it with `dataset.path = <out_dir>`.
)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-directional low-pass graph filter experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool gnuplot = false;
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--seed", seed, "Base seed (overrides config)");
  run->add_option("--out", out_dir, "Output directory (overrides config)");
  run->add_flag("--gnuplot", gnuplot, "Also write summary.dat with gnuplot columns");

  auto* oracle = app.add_subcommand("oracle-check", "Run the numerical oracle suite");
  auto* preset_cmd = app.add_subcommand("preset", "Show a hyperparameter preset");
  std::string preset_name;
  preset_cmd->add_option("--name", preset_name, "Preset name; omit to list all");
  auto* convert = app.add_subcommand("convert-help", "How to convert Planetoid datasets");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    bigcn::ExperimentConfig cfg;
    try {
      cfg = bigcn::load_experiment_config(config_path);
      if (seed) cfg.seed = *seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      cfg.validate();
    } catch (const bigcn::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    if (cfg.model.kind == bigcn::ModelKind::bigcn && cfg.model.filter.variant == bigcn::FilterVariant::taylor)
      if (auto warn = bigcn::taylor_stability_warning(cfg.model.filter)) std::cerr << "warning: " << *warn << '\n';
    try {
      const bigcn::ExperimentResult res = bigcn::run_experiment(cfg, gnuplot);
      for (const auto& [v, rep] : res.summary)
        std::cout << (std::isnan(v) ? std::string("-") : std::to_string(v)) << "  " << rep.name << " " << rep.mean
                  << " +- " << rep.stddev << " (" << rep.runs << " runs)\n";
      std::cout << "wrote " << (cfg.output_dir / "results.csv").string() << '\n';
      if (res.diverged) {
        std::cerr << "error: training diverged; partial results kept\n";
        return kExitDiverged;
      }
    } catch (const bigcn::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    return 0;
  }

  if (oracle->parsed()) {
    const bigcn::OracleReport report = bigcn::oracle_check();
    report.print(std::cout);
    return report.passed() ? 0 : 1;
  }

  if (preset_cmd->parsed()) {
    auto show = [](const bigcn::Preset& p) {
      std::cout << p.name << ": " << p.description << "\n  task "
                << (p.task == bigcn::Task::node_classification ? "node_classification" : "link_prediction")
                << ", p=" << p.p << ", lambda=" << p.lambda << ", k=" << p.k << ", hidden " << p.hidden
                << ", dropout " << p.dropout << ", lr " << p.learning_rate << '\n';
    };
    if (preset_name.empty()) {
      for (const auto& p : bigcn::all_presets()) show(p);
      std::cout << "note: the *-structure presets are tuned for structure_mistakes sweeps.\n";
      return 0;
    }
    try {
      show(bigcn::preset(preset_name));
    } catch (const bigcn::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    return 0;
  }

  if (convert->parsed()) {
    std::cout << kConvertHelp;
    return 0;
  }
  return 0;
}
