#pragma once

// Independent reference implementations used only by tests. Dense nested
// vectors and plain loops; nothing here calls into the library's math.

#include <algorithm>
#include <cmath>
#include <vector>

#include "graph_forest/gnn.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const graph_forest::Matrix& m) {
  Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

/// D^-1 A built from pairwise has_edge queries; all-zero rows for isolated nodes.
inline Dense mean_adjacency(const graph_forest::Graph& g) {
  const std::size_t n = g.num_nodes();
  Dense a(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    double deg = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && g.has_edge(static_cast<graph_forest::NodeId>(u), static_cast<graph_forest::NodeId>(v))) {
        a[u][v] = 1.0;
        deg += 1;
      }
    if (deg > 0)
      for (double& x : a[u]) x /= deg;
  }
  return a;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Dense c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][p] * b[p][j];
  return c;
}

inline Dense transpose(const Dense& a) {
  if (a.empty()) return {};
  Dense t(a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

/// Per layer: Z = (D^-1 A) H W^T + H B^T, ReLU between layers.
inline Dense forward(const graph_forest::GnnParams& p, const Dense& adj, const Dense& x) {
  Dense h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Dense agg = matmul(adj, h);
    Dense z = matmul(agg, transpose(to_dense(p.layers[l].neighbor)));
    const Dense self = matmul(h, transpose(to_dense(p.layers[l].self)));
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < z[i].size(); ++j) {
        z[i][j] += self[i][j];
        if (l + 1 < p.layers.size()) z[i][j] = std::max(0.0, z[i][j]);
      }
    h = std::move(z);
  }
  return h;
}

inline std::vector<double> softmax(const std::vector<double>& z) {
  double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += (p[i] = std::exp(z[i] - top));
  for (double& x : p) x /= sum;
  return p;
}

inline double loss(const graph_forest::GnnParams& p, const Dense& adj, const Dense& x, const std::vector<graph_forest::NodeId>& nodes,
                   const std::vector<int>& labels, double weight_decay) {
  const Dense logits = forward(p, adj, x);
  double total = 0;
  for (auto v : nodes) total += -std::log(softmax(logits[v])[static_cast<std::size_t>(labels[v])]);
  total /= static_cast<double>(nodes.size());
  double norm = 0;
  p.for_each([&](const graph_forest::Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) norm += m.data()[i] * m.data()[i];
  });
  return total + 0.5 * weight_decay * norm;
}

/// Soft vote with exact integer arithmetic: probs are numerators over a common
/// denominator, weights uniform.
inline int soft_vote_exact(const std::vector<std::vector<int>>& numerators) {
  const std::size_t s = numerators[0].size();
  std::vector<long> sum(s, 0);
  for (const auto& row : numerators)
    for (std::size_t c = 0; c < s; ++c) sum[c] += row[c];
  int best = 0;
  for (std::size_t c = 1; c < s; ++c)
    if (sum[c] > sum[best]) best = static_cast<int>(c);
  return best;
}

/// Hard vote: rank classes by (votes desc, summed voter confidence desc, id asc).
/// Equal vote counts make summed and mean confidence order-equivalent.
inline int hard_vote_exact(const std::vector<std::vector<int>>& numerators) {
  const std::size_t s = numerators[0].size();
  std::vector<long> votes(s, 0), conf(s, 0);
  for (const auto& row : numerators) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < s; ++c)
      if (row[c] > row[arg]) arg = c;
    votes[arg] += 1;
    conf[arg] += row[arg];
  }
  std::vector<int> classes(s);
  for (std::size_t c = 0; c < s; ++c) classes[c] = static_cast<int>(c);
  std::sort(classes.begin(), classes.end(), [&](int a, int b) {
    if (votes[a] != votes[b]) return votes[a] > votes[b];
    if (votes[a] > 0 && conf[a] != conf[b]) return conf[a] > conf[b];
    return a < b;
  });
  return classes.front();
}

/// tp/fp/fn by explicit per-class one-vs-rest counting.
inline double micro_f1_bruteforce(const std::vector<int>& pred, const std::vector<int>& truth, int classes) {
  long tp = 0, fp = 0, fn = 0;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == c, t = truth[i] == c;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
  }
  if (tp == 0) return 0.0;
  const double precision = double(tp) / double(tp + fp), recall = double(tp) / double(tp + fn);
  return 2 * precision * recall / (precision + recall);
}

}  // namespace oracle
