#pragma once

#include <span>
#include <vector>

#include "graph_forest/graph.hpp"

namespace graph_forest::kernels {

/// Row-normalized sparse operator: (P x)[v] = mean of x[u] over the entries
/// of row v, and the zero vector for an empty row.
///
/// Rows and columns may index different node sets, so the same type serves
/// the full graph, neighbor-capped layers and receptive-field restricted
/// layers. The parallel paths split work by output row and accumulate in
/// ascending source order, so they are bitwise equal to the serial
/// references at any thread count.
class MeanAggregator {
 public:
  MeanAggregator() = default;
  MeanAggregator(std::vector<std::size_t> offsets, std::vector<NodeId> cols, std::size_t num_cols);

  static MeanAggregator from_graph(const Graph& g);

  std::size_t rows() const noexcept { return offsets_.size() - 1; }
  std::size_t cols() const noexcept { return num_cols_; }
  std::span<const NodeId> row(std::size_t v) const {
    return {cols_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  /// out = P in; in has cols() rows.
  void apply(const Matrix& in, Matrix& out) const;
  /// out = P^T grad; grad has rows() rows.
  void apply_transpose(const Matrix& grad, Matrix& out) const;

  void apply_serial(const Matrix& in, Matrix& out) const;
  void apply_transpose_serial(const Matrix& grad, Matrix& out) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> cols_;
  std::size_t num_cols_ = 0;
  std::vector<double> inv_degree_;
  // Transposed pattern: for each source column, the rows that read it, ascending.
  std::vector<std::size_t> t_offsets_;
  std::vector<NodeId> t_rows_;
};

/// out[x][c] = sum_j weights[j] * slices[j][x][c], summed in ascending j.
/// Equal weights are factored out of the sum so exact ties among classes
/// survive rounding.
void weighted_sum(std::span<const Matrix> slices, std::span<const double> weights, Matrix& out);
void weighted_sum_serial(std::span<const Matrix> slices, std::span<const double> weights, Matrix& out);

/// Row-wise numerically stable softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace graph_forest::kernels
