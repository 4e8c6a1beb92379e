#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "graph_forest/experiment.hpp"
#include "graph_forest/metrics.hpp"

using namespace graph_forest;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.dataset = "sbm:n=90,d=9,p_in=0.15,train_fraction=0.2";
  cfg.k = 3;
  cfg.hp.layers = 2;
  cfg.hp.hidden = 8;
  cfg.hp.epochs = 15;
  return cfg;
}

}  // namespace

TEST_CASE("config keys, files and validation") {
  ExperimentConfig cfg;
  cfg.set("alpha", "0.3");
  cfg.set("beta_list", "0.1,0.5");
  cfg.set("voting", "hard");
  cfg.set("reverse", "true");
  CHECK(cfg.alpha == 0.3);
  CHECK(cfg.beta_list == std::vector<double>{0.1, 0.5});
  CHECK(cfg.voting == Voting::hard);
  CHECK(cfg.reverse);
  CHECK_THROWS_AS(cfg.set("colour", "red"), UsageError);
  CHECK_THROWS_AS(cfg.set("k", "many"), UsageError);
  CHECK_THROWS_AS(cfg.set("voting", "median"), UsageError);

  cfg.set("alpha", "0");
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.alpha = 1;
  cfg.hp.epochs = -1;
  CHECK_THROWS_AS(cfg.validate(), UsageError);

  fs::path file = fs::temp_directory_path() / "graph_forest_test.cfg";
  std::ofstream(file) << "# settings\nk = 7\n\nhidden=32  # wide\n";
  ExperimentConfig loaded = load_config_file(file);
  CHECK(loaded.k == 7);
  CHECK(loaded.hp.hidden == 32);
  std::ofstream(file) << "k 7\n";
  CHECK_THROWS_AS(load_config_file(file), UsageError);
}

TEST_CASE("sbm dataset specs") {
  SbmConfig c = parse_sbm_spec("sbm:n=60,d=12,seed=5");
  CHECK(c.n == 60);
  CHECK(c.d == 12);
  CHECK(c.seed == 5);
  CHECK(c.s == 3);
  CHECK(parse_sbm_spec("sbm:").n == 600);
  CHECK_THROWS_AS(parse_sbm_spec("sbm:q=1"), UsageError);
  CHECK_THROWS_AS(parse_sbm_spec("sbm:p_in=2"), UsageError);
  CHECK(load_dataset("sbm:n=60,d=12").num_nodes() == 60);
}

TEST_CASE("reverse_splits twice is the identity") {
  Graph g = load_dataset("sbm:n=60,d=6");
  Graph r = reverse_splits(g);
  CHECK(r.splits().train == g.splits().test);
  CHECK(reverse_splits(r) == g);
}

TEST_CASE("run_train is reproducible and logs every model") {
  ExperimentConfig cfg = tiny_config();
  Graph g = load_dataset(cfg.dataset);
  TrainOutcome a = run_train(cfg, g);
  CHECK(a.log.rows.size() == 3);
  CHECK(a.digest.size() == 64);
  CHECK(run_train(cfg, g).digest == a.digest);
  cfg.master_seed = 2;
  CHECK(run_train(cfg, g).digest != a.digest);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("a single-cell sweep has a baseline row and a cell row, and parses back") {
  ExperimentConfig cfg = tiny_config();
  cfg.alpha_list = {0.7};
  cfg.beta_list = {0.5};
  Graph g = load_dataset(cfg.dataset);
  ReportTable t = run_sweep(cfg, g);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.at(0, "model") == "baseline");
  CHECK(t.at(0, "k") == "1");
  CHECK(t.at(1, "alpha") == "0.7");
  CHECK(t.at(1, "cfg_dataset") == cfg.dataset);
  fs::path path = fs::temp_directory_path() / "graph_forest_sweep.csv";
  save_report(t, path, ReportFormat::csv);
  CHECK(load_report_csv(path) == t);
}

TEST_CASE("sweep_pivot lays alphas out as rows and betas as columns") {
  ReportTable sweep{{"model", "alpha", "beta", "test_f1"}, {}};
  sweep.add_row({"baseline", "1", "1", "0.7"});
  for (const char* a : {"0.3", "0.7", "1"})
    for (const char* b : {"0.1", "0.3", "0.5", "0.7", "1"}) sweep.add_row({"ensemble", a, b, "0.75"});
  ReportTable pivot = sweep_pivot(sweep);
  CHECK(pivot.columns == std::vector<std::string>{"subgraph %", "baseline (100%)", "subfeature 10%", "subfeature 30%",
                                                   "subfeature 50%", "subfeature 70%", "subfeature 100%"});
  REQUIRE(pivot.rows.size() == 3);
  CHECK(pivot.rows[0][0] == "30");
  CHECK(pivot.rows[2][1] == "0.7000");
  CHECK(pivot.rows[1][4] == "0.7500");
}

TEST_CASE("overfit gap columns are the differences of the F1 columns") {
  ExperimentConfig cfg = tiny_config();
  cfg.hidden_list = {4, 16};
  cfg.reverse = true;
  Graph g = load_dataset(cfg.dataset);
  ReportTable t = run_overfit(cfg, g);
  REQUIRE(t.rows.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(t.at(r, "setup") == "reverse");
    for (const std::string who : {"baseline", "ensemble"})
      CHECK(std::stod(t.at(r, who + "_gap")) ==
            overfit_gap(std::stod(t.at(r, who + "_train_f1")), std::stod(t.at(r, who + "_test_f1"))));
  }
}

TEST_CASE("attack reports: zero budget drops nothing and seeds reproduce") {
  ExperimentConfig cfg = tiny_config();
  Graph g = load_dataset(cfg.dataset);
  cfg.budget = 0;
  ReportTable zero = run_attack(cfg, g);
  for (std::size_t r = 0; r < zero.rows.size(); ++r) CHECK(std::stod(zero.at(r, "drop")) == 0);
  cfg.budget = 0.1;
  ReportTable a = run_attack(cfg, g);
  CHECK(a == run_attack(cfg, g));
  CHECK(std::stoul(a.at(0, "flips")) == std::stoul(a.at(0, "resolved_edges")));

  cfg.attack = "greedy";
  cfg.targets = 5;
  cfg.pool = 4;
  cfg.budget = 0.02;
  ReportTable greedy = run_attack(cfg, g);
  REQUIRE(greedy.rows.size() == 2);
  CHECK(greedy.at(0, "eval_nodes") == "5");
  CHECK(greedy == run_attack(cfg, g));
}

TEST_CASE("run_report scores every voting rule") {
  ExperimentConfig cfg = tiny_config();
  Graph g = load_dataset(cfg.dataset);
  EnsembleModel e = train_configured(g, cfg);
  ReportTable t = run_report(cfg, g, e);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.at(0, "voting") == "hard");
  CHECK(t.at(2, "voting") == "weighted");
  CHECK(std::stod(t.at(1, "test_f1")) == evaluate(e, g, g.splits().test));
}
