#include "graph_forest/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace graph_forest {

namespace {

struct Csr {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> cols;
};

// Symmetrize, dedupe, drop self-loops. Ids must already be range-checked.
Csr make_csr(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : edges) {
    if (e.u == e.v) continue;
    ++degree[e.u];
    ++degree[e.v];
  }
  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) csr.offsets[v + 1] = csr.offsets[v] + degree[v];
  std::vector<NodeId> raw(csr.offsets[n]);
  std::vector<std::size_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
  for (const Edge& e : edges) {
    if (e.u == e.v) continue;
    raw[cursor[e.u]++] = e.v;
    raw[cursor[e.v]++] = e.u;
  }
  csr.cols.reserve(raw.size());
  std::vector<std::size_t> compact(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto first = raw.begin() + static_cast<std::ptrdiff_t>(csr.offsets[v]);
    auto last = raw.begin() + static_cast<std::ptrdiff_t>(csr.offsets[v + 1]);
    std::sort(first, last);
    auto end = std::unique(first, last);
    csr.cols.insert(csr.cols.end(), first, end);
    compact[v + 1] = csr.cols.size();
  }
  csr.offsets = std::move(compact);
  return csr;
}

void check_node(NodeId v, std::size_t n, const char* what) {
  if (v >= n) {
    throw InvalidArgument(std::string(what) + ": node id " + std::to_string(v) +
                          " out of range [0, " + std::to_string(n) + ")");
  }
}

std::vector<NodeId> sorted_unique(std::span<const NodeId> ids) {
  std::vector<NodeId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  check_node(v, num_nodes(), "neighbors");
  return {cols_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto row = neighbors(u);
  check_node(v, num_nodes(), "has_edge");
  return std::binary_search(row.begin(), row.end(), v);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> edges;
  edges.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (std::size_t i = offsets_[u]; i < offsets_[u + 1]; ++i) {
      if (u < cols_[i]) edges.push_back({u, cols_[i]});
    }
  }
  return edges;
}

Graph Graph::with_edges(std::span<const Edge> edges) const {
  const std::size_t n = num_nodes();
  for (const Edge& e : edges) {
    check_node(e.u, n, "with_edges");
    check_node(e.v, n, "with_edges");
  }
  Graph g = *this;
  Csr csr = make_csr(n, edges);
  g.offsets_ = std::move(csr.offsets);
  g.cols_ = std::move(csr.cols);
  return g;
}

Graph Graph::with_edge_flipped(NodeId u, NodeId v) const {
  const std::size_t n = num_nodes();
  check_node(u, n, "with_edge_flipped");
  check_node(v, n, "with_edge_flipped");
  if (u == v) throw InvalidArgument("with_edge_flipped: self-loop");
  const bool present = has_edge(u, v);
  Graph g = *this;
  g.cols_.clear();
  g.cols_.reserve(cols_.size() + 2);
  g.offsets_.assign(n + 1, 0);
  for (NodeId w = 0; w < n; ++w) {
    auto row = neighbors(w);
    if (w == u || w == v) {
      const NodeId other = (w == u) ? v : u;
      if (present) {
        for (NodeId x : row)
          if (x != other) g.cols_.push_back(x);
      } else {
        auto pos = std::lower_bound(row.begin(), row.end(), other);
        g.cols_.insert(g.cols_.end(), row.begin(), pos);
        g.cols_.push_back(other);
        g.cols_.insert(g.cols_.end(), pos, row.end());
      }
    } else {
      g.cols_.insert(g.cols_.end(), row.begin(), row.end());
    }
    g.offsets_[w + 1] = g.cols_.size();
  }
  return g;
}

Graph Graph::with_splits(SplitSets splits) const {
  // Reuse the validating builder on the existing structure.
  Graph checked = build_graph({}, Matrix(num_nodes(), 0), labels_, std::move(splits), num_classes_);
  Graph g = *this;
  g.splits_ = std::move(checked.splits_);
  return g;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.offsets_ == b.offsets_ && a.cols_ == b.cols_ && a.labels_ == b.labels_ &&
         a.num_classes_ == b.num_classes_ && a.splits_ == b.splits_ &&
         a.features_->rows() == b.features_->rows() && a.features_->cols() == b.features_->cols() &&
         *a.features_ == *b.features_;
}

NodeMapping::NodeMapping(std::size_t original_size, std::vector<NodeId> backward)
    : forward_(original_size, -1), backward_(std::move(backward)) {
  for (std::size_t i = 0; i < backward_.size(); ++i) {
    check_node(backward_[i], original_size, "NodeMapping");
    if (forward_[backward_[i]] != -1) throw InvalidArgument("NodeMapping: duplicate node");
    forward_[backward_[i]] = static_cast<std::int64_t>(i);
  }
}

std::optional<NodeId> NodeMapping::to_sub(NodeId original) const {
  if (original >= forward_.size() || forward_[original] < 0) return std::nullopt;
  return static_cast<NodeId>(forward_[original]);
}

Graph build_graph(std::span<const Edge> edges, Matrix features, std::vector<int> labels,
                  SplitSets splits, int num_classes) {
  const auto n = static_cast<std::size_t>(features.rows());
  for (const Edge& e : edges) {
    check_node(e.u, n, "build_graph edge");
    check_node(e.v, n, "build_graph edge");
  }
  if (!features.allFinite()) throw InvalidArgument("build_graph: non-finite feature value");

  if (!labels.empty()) {
    if (labels.size() != n) throw InvalidArgument("build_graph: label count differs from node count");
    int max_label = -1;
    for (int y : labels) {
      if (y < kNoLabel) throw InvalidArgument("build_graph: negative label");
      max_label = std::max(max_label, y);
    }
    if (num_classes < 0) num_classes = max_label + 1;
    if (max_label >= num_classes) {
      throw InvalidArgument("build_graph: label " + std::to_string(max_label) +
                            " >= class count " + std::to_string(num_classes));
    }
  } else if (num_classes < 0) {
    num_classes = 0;
  }

  std::vector<std::uint8_t> owner(n, 0);
  auto claim = [&](std::vector<NodeId>& set, std::uint8_t tag, const char* name) {
    set = sorted_unique(set);
    for (NodeId v : set) {
      check_node(v, n, name);
      if (owner[v] != 0) {
        throw InvalidArgument(std::string("build_graph: node ") + std::to_string(v) +
                              " is in more than one split");
      }
      owner[v] = tag;
    }
  };
  claim(splits.train, 1, "train split");
  claim(splits.val, 2, "val split");
  claim(splits.test, 3, "test split");

  Graph g;
  Csr csr = make_csr(n, edges);
  g.offsets_ = std::move(csr.offsets);
  g.cols_ = std::move(csr.cols);
  g.features_ = std::make_shared<const Matrix>(std::move(features));
  g.labels_ = std::move(labels);
  g.num_classes_ = num_classes;
  g.splits_ = std::move(splits);
  return g;
}

std::pair<Graph, NodeMapping> induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) throw InvalidArgument("induced_subgraph: empty node set");
  for (NodeId v : nodes) check_node(v, g.num_nodes(), "induced_subgraph");
  std::vector<NodeId> keep = sorted_unique(nodes);
  NodeMapping mapping(g.num_nodes(), keep);

  Graph sub;
  sub.offsets_.assign(keep.size() + 1, 0);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (NodeId u : g.neighbors(keep[i])) {
      if (auto j = mapping.to_sub(u)) sub.cols_.push_back(*j);
    }
    sub.offsets_[i + 1] = sub.cols_.size();
  }

  const Matrix& f = g.features();
  Matrix features(static_cast<Eigen::Index>(keep.size()), f.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) features.row(static_cast<Eigen::Index>(i)) = f.row(keep[i]);
  sub.features_ = std::make_shared<const Matrix>(std::move(features));

  if (g.has_labels()) {
    sub.labels_.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) sub.labels_[i] = g.labels()[keep[i]];
  }
  sub.num_classes_ = g.num_classes();

  auto remap = [&](const std::vector<NodeId>& set) {
    std::vector<NodeId> out;
    for (NodeId v : set)
      if (auto j = mapping.to_sub(v)) out.push_back(*j);
    return out;  // ascending, since the mapping is monotone
  };
  sub.splits_ = {remap(g.splits().train), remap(g.splits().val), remap(g.splits().test)};
  return {std::move(sub), std::move(mapping)};
}

Graph restrict_features(const Graph& g, std::span<const std::size_t> dims) {
  if (dims.empty()) throw InvalidArgument("restrict_features: empty dim set");
  std::vector<std::size_t> keep(dims.begin(), dims.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.back() >= g.feature_dim()) {
    throw InvalidArgument("restrict_features: dim " + std::to_string(keep.back()) +
                          " out of range [0, " + std::to_string(g.feature_dim()) + ")");
  }
  const Matrix& f = g.features();
  Matrix out(f.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = f.col(static_cast<Eigen::Index>(keep[j]));
  }
  Graph r = g;
  r.features_ = std::make_shared<const Matrix>(std::move(out));
  return r;
}

double edge_preservation_ratio(const Graph& full, const Graph& sub) {
  if (full.num_edges() == 0) return 1.0;
  return static_cast<double>(sub.num_edges()) / static_cast<double>(full.num_edges());
}

std::vector<NodeId> k_hop_ball(const Graph& g, std::span<const NodeId> seeds, int hops) {
  std::vector<std::uint8_t> seen(g.num_nodes(), 0);
  std::vector<NodeId> frontier;
  for (NodeId v : seeds) {
    check_node(v, g.num_nodes(), "k_hop_ball");
    if (!seen[v]) {
      seen[v] = 1;
      frontier.push_back(v);
    }
  }
  std::vector<NodeId> ball = frontier;
  for (int h = 0; h < hops && !frontier.empty(); ++h) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      for (NodeId u : g.neighbors(v)) {
        if (!seen[u]) {
          seen[u] = 1;
          next.push_back(u);
        }
      }
    }
    ball.insert(ball.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(ball.begin(), ball.end());
  return ball;
}

}  // namespace graph_forest
