#pragma once

#include <random>
#include <vector>

#include "graph_forest/graph.hpp"

namespace fixtures {

using graph_forest::Edge;
using graph_forest::Graph;
using graph_forest::Matrix;
using graph_forest::NodeId;

inline Matrix iota_features(std::size_t n, std::size_t d) {
  Matrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = static_cast<double>(i);
  return f;
}

inline Graph plain(std::size_t n, std::vector<Edge> edges, std::size_t d = 2) {
  return graph_forest::build_graph(edges, iota_features(n, d), {}, {});
}

/// Random labeled graph with Gaussian features; each pair is an edge with probability p.
inline Graph random_graph(std::size_t n, std::size_t d, int classes, double p, std::uint64_t seed,
                          bool isolate_last = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  std::normal_distribution<double> normal(0, 1);
  std::vector<Edge> edges;
  const std::size_t limit = isolate_last ? n - 1 : n;
  for (std::size_t i = 0; i < limit; ++i)
    for (std::size_t j = i + 1; j < limit; ++j)
      if (unit(rng) < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
  Matrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = normal(rng);
  std::vector<int> labels(n);
  graph_forest::SplitSets splits;
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
    // Alternate whole label cycles so both splits see every class.
    ((i / static_cast<std::size_t>(classes)) % 2 == 0 ? splits.train : splits.test).push_back(static_cast<NodeId>(i));
  }
  return graph_forest::build_graph(edges, std::move(f), std::move(labels), std::move(splits), classes);
}

}  // namespace fixtures
