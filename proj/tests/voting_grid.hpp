#pragma once

#include <functional>
#include <vector>

#include "graph_forest/ensemble.hpp"
#include "oracles.hpp"

namespace voting_grid {

/// All probability rows over s classes with entries in steps of 1/4, as integer numerators.
inline std::vector<std::vector<int>> quarter_rows(int s) {
  std::vector<std::vector<int>> rows;
  std::vector<int> row(static_cast<std::size_t>(s));
  std::function<void(int, int)> fill = [&](int c, int left) {
    if (c == s - 1) {
      row[static_cast<std::size_t>(c)] = left;
      rows.push_back(row);
      return;
    }
    for (int q = 0; q <= left; ++q) {
      row[static_cast<std::size_t>(c)] = q;
      fill(c + 1, left - q);
    }
  };
  fill(0, 4);
  return rows;
}

struct Mismatches {
  long cases = 0;
  long soft = 0;
  long hard = 0;
};

/// Enumerates every stack with k models and s classes on the quarter grid,
/// packing up to n_max nodes per PosteriorStack, and compares decide_soft and
/// decide_hard with the exact integer references.
inline Mismatches run(int k, int s, int n_max) {
  const auto rows = quarter_rows(s);
  std::vector<std::vector<std::vector<int>>> cases;  // case -> model -> numerators
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    std::vector<std::vector<int>> c;
    for (std::size_t j : idx) c.push_back(rows[j]);
    cases.push_back(std::move(c));
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == rows.size()) idx[pos++] = 0;
    if (pos == idx.size()) break;
  }

  Mismatches out;
  const std::vector<double> weights = graph_forest::uniform_weights(static_cast<std::size_t>(k));
  for (std::size_t start = 0; start < cases.size(); start += static_cast<std::size_t>(n_max)) {
    const std::size_t n = std::min(cases.size() - start, static_cast<std::size_t>(n_max));
    graph_forest::PosteriorStack stack;
    for (int j = 0; j < k; ++j) {
      graph_forest::Matrix slice(static_cast<Eigen::Index>(n), s);
      for (std::size_t x = 0; x < n; ++x)
        for (int c = 0; c < s; ++c)
          slice(static_cast<Eigen::Index>(x), c) = cases[start + x][static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] / 4.0;
      stack.slices.push_back(std::move(slice));
    }
    const auto soft = graph_forest::decide_soft(stack, weights);
    const auto hard = graph_forest::decide_hard(stack);
    for (std::size_t x = 0; x < n; ++x) {
      ++out.cases;
      out.soft += soft[x] != oracle::soft_vote_exact(cases[start + x]);
      out.hard += hard[x] != oracle::hard_vote_exact(cases[start + x]);
    }
  }
  return out;
}

}  // namespace voting_grid
