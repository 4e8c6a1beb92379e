#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "graph_forest/dataset_io.hpp"

using namespace graph_forest;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("graph_forest_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("load_graph reads the two-node fixture") {
  fs::path dir = scratch("two_node");
  write(dir / "edges.tsv", "# comment\n0\t1\n");
  write(dir / "features.csv", "1.5,2\n-3,4e-1\n");
  write(dir / "labels.csv", "node,label\n0,0\n1,1\n");
  write(dir / "splits.csv", "node,split\n0,train\n1,test\n");
  Graph g = load_graph_dir(dir);
  CHECK(g.num_nodes() == 2);
  CHECK(g.num_edges() == 1);
  CHECK(g.feature_dim() == 2);
  CHECK(g.features()(1, 1) == 0.4);
  CHECK(g.num_classes() == 2);
  CHECK(g.splits().train == std::vector<NodeId>{0});
  CHECK(g.splits().test == std::vector<NodeId>{1});
}

TEST_CASE("load_graph errors carry line numbers") {
  fs::path dir = scratch("bad");
  write(dir / "features.csv", "0\n0\n0\n");
  write(dir / "edges.tsv", "0\t1\n1\t5\n");
  try {
    load_graph(dir / "edges.tsv", dir / "features.csv", "", "");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  write(dir / "edges.tsv", "0\t1\n");
  write(dir / "features.csv", "0,1\n0\n");
  CHECK_THROWS_AS(load_graph(dir / "edges.tsv", dir / "features.csv", "", ""), ParseError);
  write(dir / "features.csv", "0\n0\n");
  write(dir / "splits.csv", "node,split\n9,train\n");
  CHECK_THROWS_AS(load_graph(dir / "edges.tsv", dir / "features.csv", "", dir / "splits.csv"), ParseError);
  write(dir / "splits.csv", "node,split\n0,holdout\n");
  CHECK_THROWS_AS(load_graph(dir / "edges.tsv", dir / "features.csv", "", dir / "splits.csv"), ParseError);
}

TEST_CASE("generate_sbm examples") {
  SbmConfig cfg;
  cfg.n = 4;
  cfg.s = 2;
  cfg.p_in = 1;
  cfg.p_out = 0;
  cfg.d = 4;
  cfg.train_fraction = 0.5;
  Graph cliques = generate_sbm(cfg);
  CHECK(cliques.num_edges() == 2);
  CHECK(cliques.has_edge(0, 1));
  CHECK(cliques.has_edge(2, 3));
  CHECK(cliques.labels() == std::vector<int>{0, 0, 1, 1});

  cfg.n = 50;
  cfg.p_in = cfg.p_out = 0;
  CHECK(generate_sbm(cfg).num_edges() == 0);

  cfg.p_in = 0.3;
  cfg.p_out = 0.05;
  cfg.seed = 99;
  CHECK(generate_sbm(cfg) == generate_sbm(cfg));
  cfg.seed = 100;
  Graph other = generate_sbm(cfg);
  cfg.seed = 99;
  CHECK_FALSE(generate_sbm(cfg) == other);

  cfg.p_in = 1.5;
  CHECK_THROWS_AS(generate_sbm(cfg), InvalidArgument);
}

TEST_CASE("generate_sbm splits are stratified and each class shifts its own column") {
  SbmConfig cfg;  // the desk fixture: n=600, s=3, d=60
  cfg.seed = 4;
  Graph g = generate_sbm(cfg);
  CHECK(g.splits().train.size() == 60);
  CHECK(g.splits().test.size() == 540);
  std::vector<int> per_class(3, 0);
  for (NodeId v : g.splits().train) ++per_class[g.label(v)];
  CHECK(per_class == std::vector<int>{20, 20, 20});
  // Class 1 occupies nodes [200, 400). Its column-1 mean sits near `signal`,
  // every other column near 0 (standard error 1/sqrt(200) ~ 0.07).
  for (int j = 0; j < 60; ++j) {
    const double mean = g.features().col(j).segment(200, 200).mean();
    if (j == 1) {
      CHECK(std::abs(mean - 0.6) < 0.25);
    } else {
      CHECK(std::abs(mean) < 0.25);
    }
  }
}

TEST_CASE("property: SBM edge counts stay within 3 binomial standard deviations") {
  SbmConfig cfg;
  cfg.n = 90;
  cfg.p_in = 0.2;
  cfg.p_out = 0.03;
  cfg.d = 3;
  // Blocks of 30: 3 * C(30,2) intra pairs, 3 * 30 * 30 inter pairs.
  const double intra = 3 * 435, inter = 2700;
  const double mean = cfg.p_in * intra + cfg.p_out * inter;
  const double sd = std::sqrt(cfg.p_in * (1 - cfg.p_in) * intra + cfg.p_out * (1 - cfg.p_out) * inter);
  double total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    const double m = static_cast<double>(generate_sbm(cfg).num_edges());
    CHECK(std::abs(m - mean) <= 3 * sd + 1e-9);
    total += m;
  }
  // The 50-seed average is far tighter.
  CHECK(std::abs(total / 50 - mean) <= 3 * sd / std::sqrt(50.0));
}

TEST_CASE("property: save then load reproduces a generated graph exactly") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SbmConfig cfg;
    cfg.n = 80;
    cfg.d = 7;
    cfg.seed = seed;
    Graph g = generate_sbm(cfg);
    fs::path dir = scratch("roundtrip_" + std::to_string(seed));
    save_graph_dir(g, dir);
    CHECK(load_graph_dir(dir) == g);
  }
}

TEST_CASE("save_report formats") {
  fs::path dir = scratch("report");
  ReportTable t{{"name", "value"}, {}};
  save_report(t, dir / "empty.csv", ReportFormat::csv);
  {
    std::ifstream in(dir / "empty.csv");
    std::string all((std::istreambuf_iterator<char>(in)), {});
    CHECK(all == "name,value\n");
  }
  t.add_row({"a,b", "0.5"});
  save_report(t, dir / "one.csv", ReportFormat::csv);
  {
    std::ifstream in(dir / "one.csv");
    std::string all((std::istreambuf_iterator<char>(in)), {});
    CHECK(all == "name,value\n\"a,b\",0.5\n");
  }
  CHECK(load_report_csv(dir / "one.csv") == t);
  save_report(t, dir / "one.md", ReportFormat::markdown);
  std::ifstream in(dir / "one.md");
  std::string header, sep;
  std::getline(in, header);
  std::getline(in, sep);
  CHECK(header == "| name | value |");
  CHECK(sep == "|---|---|");
  CHECK_THROWS_AS(t.add_row({"short"}), InvalidArgument);
  CHECK_THROWS_AS(save_report(t, "/proc/no/such/dir/x.csv", ReportFormat::csv), Error);
}
