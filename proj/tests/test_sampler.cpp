#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "doctest.h"
#include "fixtures.hpp"
#include "graph_forest/dataset_io.hpp"
#include "graph_forest/sampler.hpp"

using namespace graph_forest;

TEST_CASE("derive_seed is deterministic and separates indices") {
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
}

TEST_CASE("derive_seed has no collisions over 10^4 master/index pairs") {
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t master = 0; master < 100; ++master)
    for (std::uint64_t index = 0; index < 100; ++index) seen.insert(derive_seed(master, index));
  CHECK(seen.size() == 10000);
}

TEST_CASE("sample_size rounds up without representation drift") {
  CHECK(sample_size(0.7, 10) == 7);
  CHECK(sample_size(0.5, 60) == 30);
  CHECK(sample_size(0.3, 600) == 180);
  CHECK(sample_size(0.1, 60) == 6);
  CHECK(sample_size(0.01, 10) == 1);
  CHECK(sample_size(1.0, 13) == 13);
  CHECK(sample_size(0.55, 3) == 2);
}

TEST_CASE("sample_subspace examples") {
  Graph g = fixtures::random_graph(10, 6, 2, 0.3, 1);
  SubspaceSpec full = sample_subspace(g, 1, 1, 0, 9);
  CHECK(full.node_subset.size() == 10);
  CHECK(full.feature_subset == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  SubspaceSpec part = sample_subspace(g, 0.7, 0.5, 2, 9);
  CHECK(part.node_subset.size() == 7);
  CHECK(part.feature_subset.size() == 3);
  CHECK(part == sample_subspace(g, 0.7, 0.5, 2, 9));
  CHECK(part.model_index == 2);

  CHECK_THROWS_AS(sample_subspace(g, 0, 0.5, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(sample_subspace(g, 0.5, 1.5, 0, 0), InvalidArgument);
}

TEST_CASE("sample_subspace throws DegenerateSubspace when one class cannot be escaped") {
  // Only one training node: no draw can cover two classes.
  Matrix f = fixtures::iota_features(6, 2);
  Graph g = build_graph({}, f, {0, 1, 0, 1, 0, 1}, SplitSets{{0}, {}, {1, 2, 3, 4, 5}});
  try {
    sample_subspace(g, 0.5, 1, 4, 1);
    FAIL("expected DegenerateSubspace");
  } catch (const DegenerateSubspace& e) {
    CHECK(e.model_index() == 4);
  }
}

TEST_CASE("property: subspace sizes, order and training-class coverage") {
  SbmConfig cfg;
  cfg.n = 97;
  cfg.d = 13;
  cfg.train_fraction = 0.5;
  Graph g = generate_sbm(cfg);
  for (double alpha : {0.1, 0.3, 0.7, 1.0})
    for (double beta : {0.1, 0.5, 1.0})
      for (std::size_t j = 0; j < 10; ++j) {
        SubspaceSpec s = sample_subspace(g, alpha, beta, j, 77);
        CHECK(s.node_subset.size() == static_cast<std::size_t>(std::ceil(alpha * 97 - 1e-9)));
        CHECK(s.feature_subset.size() == static_cast<std::size_t>(std::ceil(beta * 13 - 1e-9)));
        CHECK(std::adjacent_find(s.node_subset.begin(), s.node_subset.end(), std::greater_equal<>()) ==
              s.node_subset.end());
        CHECK(std::adjacent_find(s.feature_subset.begin(), s.feature_subset.end(), std::greater_equal<>()) ==
              s.feature_subset.end());
        CHECK(s.node_subset.back() < 97);
        CHECK(s.feature_subset.back() < 13);
        std::set<NodeId> kept(s.node_subset.begin(), s.node_subset.end());
        std::set<int> classes;
        for (NodeId v : g.splits().train)
          if (kept.count(v)) classes.insert(g.label(v));
        CHECK(classes.size() >= 2);
      }
}

TEST_CASE("property: node inclusion is uniform over 2000 draws") {
  const std::size_t n = 20;
  Graph g = fixtures::random_graph(n, 4, 2, 0.2, 3);
  // Every node trains here, so coverage redraws are rare (about 1% of draws).
  g = g.with_splits(SplitSets{[] {
    std::vector<NodeId> all(20);
    for (NodeId i = 0; i < 20; ++i) all[i] = i;
    return all;
  }(), {}, {}});
  std::vector<int> hits(n, 0);
  const int draws = 2000;
  for (int j = 0; j < draws; ++j)
    for (NodeId v : sample_subspace(g, 0.3, 1, static_cast<std::size_t>(j), 5).node_subset) ++hits[v];
  const double p = 6.0 / 20.0, mean = draws * p, sd = std::sqrt(draws * p * (1 - p));
  double chi2 = 0;
  for (int h : hits) {
    CHECK(std::abs(h - mean) < 4 * sd);
    chi2 += (h - mean) * (h - mean) / mean;
  }
  // 19 degrees of freedom (scaled by 1-p for sampling without replacement); 99.9% quantile is 43.8.
  CHECK(chi2 * (1 - p) < 43.8);
}

TEST_CASE("property: at most one identical pair among 100 specs") {
  SbmConfig cfg;
  cfg.n = 60;
  cfg.d = 10;
  Graph g = generate_sbm(cfg);
  std::vector<SubspaceSpec> specs;
  for (std::size_t j = 0; j < 100; ++j) specs.push_back(sample_subspace(g, 0.7, 0.5, j, 123));
  int identical = 0;
  for (std::size_t a = 0; a < specs.size(); ++a)
    for (std::size_t b = a + 1; b < specs.size(); ++b)
      identical += specs[a].node_subset == specs[b].node_subset && specs[a].feature_subset == specs[b].feature_subset;
  CHECK(identical <= 1);
}

TEST_CASE("sample_neighbors examples") {
  std::mt19937_64 rng(1);
  std::vector<NodeId> three{2, 5, 9};
  CHECK(sample_neighbors(three, 5, rng) == three);
  std::vector<NodeId> ten{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(sample_neighbors(ten, 10, rng) == ten);
  auto picked = sample_neighbors(ten, 3, rng);
  CHECK(picked.size() == 3);
  CHECK(std::is_sorted(picked.begin(), picked.end()));
  CHECK(std::includes(ten.begin(), ten.end(), picked.begin(), picked.end()));
  CHECK_THROWS_AS(sample_neighbors(ten, 0, rng), InvalidArgument);
}
