#pragma once

#include <random>
#include <span>
#include <vector>

#include "graph_forest/graph.hpp"

namespace graph_forest {

/// One base model's random subspace: which nodes induce its training subgraph
/// and which feature columns it sees.
struct SubspaceSpec {
  std::size_t model_index = 0;
  std::vector<NodeId> node_subset;         // sorted, unique
  std::vector<std::size_t> feature_subset; // sorted, unique
  double alpha = 1.0;
  double beta = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SubspaceSpec&, const SubspaceSpec&) = default;
};

/// Per-model seed. Injective in model_index for a fixed master seed and in the
/// master seed for a fixed index.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t model_index);

/// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// ceil(fraction * total) with a guard against representation error
/// (0.7 * 10 must give 7, not 8).
std::size_t sample_size(double fraction, std::size_t total);

/// Draws ceil(alpha*n) nodes and ceil(beta*d) feature dims uniformly without
/// replacement. When the induced training nodes carry fewer than two classes
/// the draw is repeated with seed+1, at most 16 redraws, then
/// DegenerateSubspace is thrown.
SubspaceSpec sample_subspace(const Graph& g, double alpha, double beta, std::size_t model_index,
                             std::uint64_t master_seed);

/// All of `neigh` when it has at most `cap` entries, otherwise a uniform
/// subset of size `cap`. Output is sorted.
std::vector<NodeId> sample_neighbors(std::span<const NodeId> neigh, std::size_t cap, std::mt19937_64& rng);

}  // namespace graph_forest
