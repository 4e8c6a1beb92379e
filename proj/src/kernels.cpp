#include "graph_forest/kernels.hpp"

#include <algorithm>

namespace graph_forest::kernels {

namespace {

// Below this many output entries a parallel region costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 14;

bool all_equal(std::span<const double> w) {
  return std::all_of(w.begin(), w.end(), [&](double x) { return x == w.front(); });
}

}  // namespace

MeanAggregator::MeanAggregator(std::vector<std::size_t> offsets, std::vector<NodeId> cols, std::size_t num_cols)
    : offsets_(std::move(offsets)), cols_(std::move(cols)), num_cols_(num_cols) {
  if (offsets_.empty() || offsets_.back() != cols_.size()) throw InvalidArgument("MeanAggregator: bad offsets");
  const std::size_t n = rows();
  inv_degree_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t deg = offsets_[v + 1] - offsets_[v];
    inv_degree_[v] = deg == 0 ? 0.0 : 1.0 / static_cast<double>(deg);
  }
  t_offsets_.assign(num_cols_ + 1, 0);
  for (NodeId u : cols_) {
    if (u >= num_cols_) throw InvalidArgument("MeanAggregator: column out of range");
    ++t_offsets_[u + 1];
  }
  for (std::size_t u = 0; u < num_cols_; ++u) t_offsets_[u + 1] += t_offsets_[u];
  t_rows_.resize(cols_.size());
  std::vector<std::size_t> cursor(t_offsets_.begin(), t_offsets_.end() - 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t i = offsets_[v]; i < offsets_[v + 1]; ++i) t_rows_[cursor[cols_[i]]++] = static_cast<NodeId>(v);
  }
}

MeanAggregator MeanAggregator::from_graph(const Graph& g) {
  return MeanAggregator(g.row_offsets(), g.col_indices(), g.num_nodes());
}

void MeanAggregator::apply(const Matrix& in, Matrix& out) const {
  const auto n = static_cast<std::ptrdiff_t>(rows());
  const Eigen::Index width = in.cols();
  out.resize(n, width);
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n * width) > kParallelThreshold)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    auto dst = out.row(v);
    dst.setZero();
    for (std::size_t i = offsets_[v]; i < offsets_[v + 1]; ++i) dst += in.row(cols_[i]);
    dst *= inv_degree_[v];
  }
}

void MeanAggregator::apply_transpose(const Matrix& grad, Matrix& out) const {
  const auto m = static_cast<std::ptrdiff_t>(num_cols_);
  const Eigen::Index width = grad.cols();
  out.resize(m, width);
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(m * width) > kParallelThreshold)
  for (std::ptrdiff_t u = 0; u < m; ++u) {
    auto dst = out.row(u);
    dst.setZero();
    for (std::size_t i = t_offsets_[u]; i < t_offsets_[u + 1]; ++i) {
      const NodeId v = t_rows_[i];
      dst += inv_degree_[v] * grad.row(v);
    }
  }
}

void MeanAggregator::apply_serial(const Matrix& in, Matrix& out) const {
  out.setZero(static_cast<Eigen::Index>(rows()), in.cols());
  for (std::size_t v = 0; v < rows(); ++v) {
    for (NodeId u : row(v))
      for (Eigen::Index c = 0; c < in.cols(); ++c) out(v, c) += in(u, c);
    for (Eigen::Index c = 0; c < in.cols(); ++c) out(v, c) *= inv_degree_[v];
  }
}

void MeanAggregator::apply_transpose_serial(const Matrix& grad, Matrix& out) const {
  out.setZero(static_cast<Eigen::Index>(num_cols_), grad.cols());
  for (std::size_t v = 0; v < rows(); ++v) {
    for (NodeId u : row(v))
      for (Eigen::Index c = 0; c < grad.cols(); ++c) out(u, c) += inv_degree_[v] * grad(v, c);
  }
}

void weighted_sum(std::span<const Matrix> slices, std::span<const double> weights, Matrix& out) {
  if (slices.size() != weights.size()) throw InvalidArgument("weighted_sum: weight/slice count mismatch");
  if (slices.empty()) throw InvalidArgument("weighted_sum: no slices");
  const auto n = static_cast<std::ptrdiff_t>(slices.front().rows());
  const Eigen::Index s = slices.front().cols();
  for (const Matrix& m : slices)
    if (m.rows() != n || m.cols() != s) throw InvalidArgument("weighted_sum: slice shape mismatch");
  const bool uniform = all_equal(weights);
  out.resize(n, s);
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n * s) * slices.size() > kParallelThreshold)
  for (std::ptrdiff_t x = 0; x < n; ++x) {
    auto dst = out.row(x);
    dst.setZero();
    if (uniform) {
      for (const Matrix& m : slices) dst += m.row(x);
      dst *= weights.front();
    } else {
      for (std::size_t j = 0; j < slices.size(); ++j) dst += weights[j] * slices[j].row(x);
    }
  }
}

void weighted_sum_serial(std::span<const Matrix> slices, std::span<const double> weights, Matrix& out) {
  if (slices.size() != weights.size()) throw InvalidArgument("weighted_sum: weight/slice count mismatch");
  if (slices.empty()) throw InvalidArgument("weighted_sum: no slices");
  const bool uniform = all_equal(weights);
  out.setZero(slices.front().rows(), slices.front().cols());
  for (Eigen::Index x = 0; x < out.rows(); ++x) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < slices.size(); ++j) acc += uniform ? slices[j](x, c) : weights[j] * slices[j](x, c);
      out(x, c) = uniform ? acc * weights.front() : acc;
    }
  }
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - top).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace graph_forest::kernels
