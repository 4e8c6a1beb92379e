#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "graph_forest/common.hpp"

namespace graph_forest {

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct SplitSets {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  friend bool operator==(const SplitSets&, const SplitSets&) = default;
};

class NodeMapping;

/// Immutable undirected attributed graph.
///
/// Adjacency is symmetric CSR with strictly increasing column indices per row
/// and no self-loops. The feature matrix is shared between graphs that only
/// differ in structure (e.g. perturbed copies), so copies are cheap.
class Graph {
 public:
  std::size_t num_nodes() const noexcept { return offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return cols_.size() / 2; }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_->cols()); }
  int num_classes() const noexcept { return num_classes_; }

  /// Sorted neighbor ids of v. Throws InvalidArgument when v is out of range.
  std::span<const NodeId> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }
  bool has_edge(NodeId u, NodeId v) const;

  const std::vector<std::size_t>& row_offsets() const noexcept { return offsets_; }
  const std::vector<NodeId>& col_indices() const noexcept { return cols_; }

  const Matrix& features() const noexcept { return *features_; }
  const std::shared_ptr<const Matrix>& shared_features() const noexcept { return features_; }

  bool has_labels() const noexcept { return !labels_.empty(); }
  /// kNoLabel when the graph or the node is unlabeled.
  int label(NodeId v) const { return labels_.empty() ? kNoLabel : labels_.at(v); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const SplitSets& splits() const noexcept { return splits_; }

  /// Undirected edges as (u, v) with u < v, in CSR order.
  std::vector<Edge> edge_list() const;

  /// Same nodes, features, labels and splits over a new edge set.
  Graph with_edges(std::span<const Edge> edges) const;
  /// Copy with the undirected pair {u, v} added if absent or removed if present.
  Graph with_edge_flipped(NodeId u, NodeId v) const;
  /// Same structure and features with new split sets.
  Graph with_splits(SplitSets splits) const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  friend Graph build_graph(std::span<const Edge>, Matrix, std::vector<int>, SplitSets, int);
  friend std::pair<Graph, NodeMapping> induced_subgraph(const Graph&, std::span<const NodeId>);
  friend Graph restrict_features(const Graph&, std::span<const std::size_t>);

  Graph() = default;

  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> cols_;
  std::shared_ptr<const Matrix> features_ = std::make_shared<const Matrix>();
  std::vector<int> labels_;
  int num_classes_ = 0;
  SplitSets splits_;
};

/// Subgraph-id <-> original-id correspondence produced by induced_subgraph.
class NodeMapping {
 public:
  NodeMapping() = default;
  NodeMapping(std::size_t original_size, std::vector<NodeId> backward);

  std::size_t size() const noexcept { return backward_.size(); }
  std::optional<NodeId> to_sub(NodeId original) const;
  NodeId to_original(NodeId sub) const { return backward_.at(sub); }
  const std::vector<NodeId>& backward() const noexcept { return backward_; }

 private:
  std::vector<std::int64_t> forward_;
  std::vector<NodeId> backward_;
};

/// Builds a graph from a raw edge list. Node count is the feature row count.
/// Edges are symmetrized and deduplicated, and self-loops are dropped. `labels`
/// is empty for an unlabeled graph; entries may be kNoLabel. A negative
/// `num_classes` infers max(label) + 1.
Graph build_graph(std::span<const Edge> edges, Matrix features, std::vector<int> labels,
                  SplitSets splits, int num_classes = -1);

/// Node-induced subgraph over `nodes` (any order, duplicates ignored). Sub ids
/// follow ascending original id.
std::pair<Graph, NodeMapping> induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

/// Keeps the listed feature columns in ascending original order.
Graph restrict_features(const Graph& g, std::span<const std::size_t> dims);

/// m_sub / m_full, defined as 1 when the full graph has no edges.
double edge_preservation_ratio(const Graph& full, const Graph& sub);

/// Nodes within `hops` edges of any seed, sorted.
std::vector<NodeId> k_hop_ball(const Graph& g, std::span<const NodeId> seeds, int hops);

}  // namespace graph_forest
