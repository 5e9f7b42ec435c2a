// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bigcn/experiment.hpp"
#include "doctest.h"

using namespace bigcn;
namespace fs = std::filesystem;

namespace {

std::string small_config(const std::string& out, const std::string& extra = "", int runs = 2) {
  return "runs = " + std::to_string(runs) + "\n"
         "seed = 11\n"
         "output = " + out + "\n"
         "dataset.sbm.nodes_per_community = 20\n"
         "dataset.sbm.feature_dim = 8\n"
         "dataset.sbm.feature_blocks = 2\n"
         "dataset.sbm.p_in = 0.3\n"
         "train.max_epochs = 20\n"
         "train.patience = 20\n" + extra;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bigcn_exp_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_experiment_config(
      "# comment\n"
      "preset = citation-noise\n"
      "filter.k = 3   # trailing comment\n"
      "model.hidden = 32, 16\n"
      "noise.case = noise_rate\n"
      "noise.values = 0.1, 0.5\n");
  CHECK(c.model.filter.k == 3);
  CHECK(c.model.filter.p == 3.0);
  CHECK(c.hidden == std::vector<Index>{32, 16});
  REQUIRE(c.noise.has_value());
  CHECK(*c.noise == NoiseCase::noise_rate);
  CHECK(c.noise_values == std::vector<double>{0.1, 0.5});

  CHECK_THROWS_AS(parse_experiment_config("filter.q = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("runs = 1\nruns = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("runs = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("preset = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("runs = 0\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("noise.case = noise_level\nnoise.values = -1\n").validate(), ConfigError);
}

TEST_CASE("explicit keys override the preset") {
  const ExperimentConfig c = parse_experiment_config("preset = citation-noise\nfilter.lambda = 0.5\nfilter.p = 1\n");
  const FilterParams want = FilterParams::from_lambda(0.5, 1.0);
  CHECK(c.model.filter.lambda1 == want.lambda1);
  CHECK(c.model.filter.p == 1.0);
}

TEST_CASE("preset table") {
  const Preset cn = preset("citation-noise");
  CHECK(cn.p == 3.0);
  CHECK(cn.lambda == 1.8);
  CHECK(cn.k == 2);
  const Preset lp = preset("linkpred");
  CHECK(lp.task == Task::link_prediction);
  CHECK(lp.p == 8.5);
  CHECK(lp.lambda == 1.2);
  CHECK(lp.hidden == 32);
  const Preset ph = preset("amz-photos-noise");
  CHECK(ph.p == 1.5);
  CHECK(ph.lambda == 0.8);
  CHECK(preset("citeseer-structure").p == 0.05);
  CHECK_THROWS_AS(preset("cora"), ConfigError);
}

TEST_CASE("single run and sweep shapes") {
  const fs::path d1 = scratch("one");
  ExperimentConfig one = parse_experiment_config(small_config(d1.string(), ""));
  one.runs = 1;
  CHECK(run_experiment(one).rows.size() == 1);
  CHECK(fs::exists(d1 / "results.csv"));
  CHECK(fs::exists(d1 / "summary.md"));
  CHECK(fs::exists(d1 / "history_s0_r0.csv"));

  const fs::path d3 = scratch("sweep");
  ExperimentConfig sweep =
      parse_experiment_config(small_config(d3.string(), "noise.case = noise_level\nnoise.values = 0, 0.4, 0.8\n", 3));
  const ExperimentResult r = run_experiment(sweep);
  CHECK(r.rows.size() == 9);
  CHECK(r.summary.size() == 3);
  CHECK_FALSE(r.diverged);
  fs::remove_all(d1);
  fs::remove_all(d3);
}

TEST_CASE("rerun is byte identical and rows reproduce from their seed") {
  const fs::path a = scratch("a"), b = scratch("b");
  const std::string extra = "noise.case = structure_mistakes\nnoise.values = 0, 0.01\n";
  const ExperimentResult ra = run_experiment(parse_experiment_config(small_config(a.string(), extra)));
  run_experiment(parse_experiment_config(small_config(b.string(), extra)));
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "summary.md") == slurp(b / "summary.md"));

  const ExperimentConfig cfg = parse_experiment_config(small_config(a.string(), extra));
  const RunRecord& row = ra.rows.back();
  CHECK(row.seed == cfg.seed + 1);
  const TrainResult again = run_single(cfg, row.sweep_value, row.seed);
  CHECK(again.test_at_best == row.metric);

  // summary means come straight from the rows
  for (const auto& [v, rep] : ra.summary) {
    std::vector<double> vals;
    for (const auto& r : ra.rows)
      if (r.sweep_value == v) vals.push_back(r.metric);
    const MetricReport want = aggregate_runs(vals);
    CHECK(rep.mean == want.mean);
    CHECK(rep.stddev == want.stddev);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("worker threads do not change results") {
  const fs::path a = scratch("t1"), b = scratch("t2");
  auto cfg = [](const fs::path& d) { return parse_experiment_config(small_config(d.string(), "", 3)); };
  ::setenv("BIFILTER_THREADS", "1", 1);
  run_experiment(cfg(a));
  ::setenv("BIFILTER_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  run_experiment(cfg(b));
  ::unsetenv("BIFILTER_THREADS");
  CHECK(worker_threads() == 1);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("results csv format") {
  std::vector<RunRecord> rows = {{std::nan(""), 0, 4, 0.5, true, ""},
                                 {0.1, 1, 5, 0.25, true, ""},
                                 {0.1, 2, 6, 0.0, false, "diverged"}};
  CHECK(format_results_csv(rows) == "sweep_value,run,seed,metric\nnone,0,4,0.5\n0.1,1,5,0.25\n");
}

TEST_CASE("link prediction experiment") {
  const fs::path d = scratch("link");
  ExperimentConfig c = parse_experiment_config(small_config(d.string(), "preset = linkpred\nmodel.hidden = 8\nmodel.embedding_dim = 8\n"));
  c.runs = 1;
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].ok);
  CHECK(r.rows[0].metric > 0.5);
  fs::remove_all(d);
}
