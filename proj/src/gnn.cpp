#include "graph_forest/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "binary_io.hpp"
#include "graph_forest/metrics.hpp"

namespace graph_forest {

void HyperParams::validate() const {
  if (layers < 1) throw InvalidArgument("layers must be >= 1");
  if (hidden < 1) throw InvalidArgument("hidden must be >= 1");
  if (neighbor_cap < 0) throw InvalidArgument("neighbor cap must be >= 0");
  if (batch_size < 0) throw InvalidArgument("batch size must be >= 0");
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (!(learning_rate > 0)) throw InvalidArgument("learning rate must be > 0");
  if (!(weight_decay >= 0)) throw InvalidArgument("weight decay must be >= 0");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1) || !(adam_eps > 0)) {
    throw InvalidArgument("invalid Adam constants");
  }
}

std::size_t GnnParams::num_parameters() const {
  std::size_t total = 0;
  for_each([&](const Matrix& m) { total += static_cast<std::size_t>(m.size()); });
  return total;
}

double GnnParams::squared_norm() const {
  double total = 0;
  for_each([&](const Matrix& m) { total += m.squaredNorm(); });
  return total;
}

GnnParams GnnParams::zeros_like() const {
  GnnParams z;
  for (const auto& layer : layers) {
    z.layers.push_back({Matrix::Zero(layer.neighbor.rows(), layer.neighbor.cols()),
                        Matrix::Zero(layer.self.rows(), layer.self.cols())});
  }
  return z;
}

bool operator==(const GnnParams& a, const GnnParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  auto same = [](const Matrix& x, const Matrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (!same(a.layers[l].neighbor, b.layers[l].neighbor) || !same(a.layers[l].self, b.layers[l].self)) return false;
  }
  return true;
}

GnnParams init_params(const HyperParams& hp, std::size_t input_dim, int num_classes, std::uint64_t seed) {
  hp.validate();
  if (input_dim < 1 || num_classes < 1) throw InvalidArgument("init_params: dims must be >= 1");
  std::mt19937_64 rng(seed);
  GnnParams params;
  auto in = static_cast<Eigen::Index>(input_dim);
  for (int l = 0; l < hp.layers; ++l) {
    const auto out = static_cast<Eigen::Index>(l + 1 == hp.layers ? num_classes : hp.hidden);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    LayerParams layer{Matrix(out, in), Matrix(out, in)};
    for (Eigen::Index i = 0; i < layer.neighbor.size(); ++i) layer.neighbor.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < layer.self.size(); ++i) layer.self.data()[i] = dist(rng);
    params.layers.push_back(std::move(layer));
    in = out;
  }
  return params;
}

namespace {

// z = agg * neighbor^T + self_rows * self^T
void layer_forward(const LayerParams& p, const Matrix& agg, const Matrix& self_rows, Matrix& z) {
  z.noalias() = agg * p.neighbor.transpose();
  z.noalias() += self_rows * p.self.transpose();
}

void check_width(const GnnParams& params, Eigen::Index width) {
  if (params.layers.empty()) throw InvalidArgument("forward: model has no layers");
  if (static_cast<std::size_t>(width) != params.input_dim()) {
    throw InvalidArgument("forward: feature width " + std::to_string(width) + " != model input " +
                          std::to_string(params.input_dim()));
  }
}

std::shared_ptr<const kernels::MeanAggregator> capped_operator(const Graph& g, std::size_t cap, std::mt19937_64& rng) {
  std::vector<std::size_t> offsets{0};
  std::vector<NodeId> cols;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto picked = sample_neighbors(g.neighbors(v), cap, rng);
    cols.insert(cols.end(), picked.begin(), picked.end());
    offsets.push_back(cols.size());
  }
  return std::make_shared<const kernels::MeanAggregator>(std::move(offsets), std::move(cols), g.num_nodes());
}

}  // namespace

OperatorList layer_operators(const Graph& g, int layers, int cap, std::mt19937_64& rng) {
  OperatorList ops;
  if (cap == 0) {
    ops.assign(static_cast<std::size_t>(layers),
               std::make_shared<const kernels::MeanAggregator>(kernels::MeanAggregator::from_graph(g)));
  } else {
    for (int l = 0; l < layers; ++l) ops.push_back(capped_operator(g, static_cast<std::size_t>(cap), rng));
  }
  return ops;
}

void forward_into(const GnnParams& params, const Matrix& features, OperatorList ops, ForwardCache& cache) {
  check_width(params, features.cols());
  if (ops.size() != params.layers.size()) throw InvalidArgument("forward: one operator per layer required");
  cache.ops = std::move(ops);
  const std::size_t L = params.layers.size();
  cache.inputs.resize(L);
  cache.aggregated.resize(L);
  cache.pre_activations.resize(L);
  cache.inputs[0] = features;
  for (std::size_t l = 0; l < L; ++l) {
    if (cache.ops[l]->cols() != static_cast<std::size_t>(cache.inputs[l].rows())) {
      throw InvalidArgument("forward: operator/feature row mismatch");
    }
    cache.ops[l]->apply(cache.inputs[l], cache.aggregated[l]);
    layer_forward(params.layers[l], cache.aggregated[l], cache.inputs[l], cache.pre_activations[l]);
    if (l + 1 < L) cache.inputs[l + 1] = cache.pre_activations[l].cwiseMax(0.0);
  }
}

ForwardCache forward_with(const GnnParams& params, const Matrix& features, OperatorList ops) {
  ForwardCache cache;
  forward_into(params, features, std::move(ops), cache);
  return cache;
}

ForwardCache forward(const GnnParams& params, const Graph& g, int neighbor_cap, std::mt19937_64& rng) {
  check_width(params, static_cast<Eigen::Index>(g.feature_dim()));
  return forward_with(params, g.features(), layer_operators(g, static_cast<int>(params.layers.size()), neighbor_cap, rng));
}

LossAndGrad loss_and_grad(const GnnParams& params, const Graph& g, std::span<const NodeId> labeled,
                          const ForwardCache& cache, double weight_decay) {
  LossAndGrad out;
  loss_and_grad_into(params, g, labeled, cache, weight_decay, out);
  return out;
}

void loss_and_grad_into(const GnnParams& params, const Graph& g, std::span<const NodeId> labeled,
                        const ForwardCache& cache, double weight_decay, LossAndGrad& out) {
  if (labeled.empty()) throw InvalidArgument("loss_and_grad: empty labeled set");
  const Matrix& logits = cache.logits();
  const auto classes = logits.cols();
  const double scale = 1.0 / static_cast<double>(labeled.size());

  // Per-thread scratch so repeated training steps do not reallocate.
  thread_local Matrix dz, to_agg, through_neighbor, dh;
  dz.setZero(logits.rows(), classes);
  out.loss = 0;
  for (NodeId v : labeled) {
    const int y = g.label(v);
    if (y == kNoLabel || y >= classes) throw InvalidArgument("loss_and_grad: node " + std::to_string(v) + " has no usable label");
    const double top = logits.row(v).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(v).array() - top).exp();
    const double sum = e.sum();
    out.loss += (std::log(sum) + top - logits(v, y)) * scale;
    dz.row(v) += e * (scale / sum);
    dz(v, y) -= scale;
  }
  out.cross_entropy = out.loss;
  out.loss += 0.5 * weight_decay * params.squared_norm();

  const std::size_t L = params.layers.size();
  out.grads.layers.resize(L);
  for (std::size_t l = L; l-- > 0;) {
    LayerParams& grad = out.grads.layers[l];
    grad.neighbor.noalias() = dz.transpose() * cache.aggregated[l];
    grad.self.noalias() = dz.transpose() * cache.inputs[l];
    if (l == 0) break;
    const LayerParams& p = params.layers[l];
    to_agg.noalias() = dz * p.neighbor;
    cache.ops[l]->apply_transpose(to_agg, through_neighbor);
    dh.noalias() = dz * p.self;
    dh += through_neighbor;
    dz = (cache.pre_activations[l - 1].array() > 0.0).select(dh.array(), 0.0).matrix();
  }
  if (weight_decay != 0.0) {
    for (std::size_t l = 0; l < L; ++l) {
      out.grads.layers[l].neighbor += weight_decay * params.layers[l].neighbor;
      out.grads.layers[l].self += weight_decay * params.layers[l].self;
    }
  }
}

namespace {

class Adam {
 public:
  Adam(const GnnParams& shape, const HyperParams& hp) : hp_(hp), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

  void step(GnnParams& params, const GnnParams& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(hp_.adam_beta1, t_);
    const double c2 = 1.0 - std::pow(hp_.adam_beta2, t_);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      update(params.layers[l].neighbor, grads.layers[l].neighbor, m_.layers[l].neighbor, v_.layers[l].neighbor, c1, c2);
      update(params.layers[l].self, grads.layers[l].self, m_.layers[l].self, v_.layers[l].self, c1, c2);
    }
  }

 private:
  void update(Matrix& w, const Matrix& g, Matrix& m, Matrix& v, double c1, double c2) const {
    m = hp_.adam_beta1 * m + (1.0 - hp_.adam_beta1) * g;
    v = hp_.adam_beta2 * v + (1.0 - hp_.adam_beta2) * g.cwiseProduct(g);
    w.array() -= hp_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + hp_.adam_eps);
  }

  HyperParams hp_;
  GnnParams m_;
  GnnParams v_;
  int t_ = 0;
};

}  // namespace

GnnParams train_params(const Graph& train_graph, std::span<const NodeId> train_nodes, GnnParams init,
                       const HyperParams& hp, std::uint64_t rng_seed, LossTrace* trace) {
  hp.validate();
  if (train_nodes.empty()) throw InvalidArgument("train_params: no training nodes");
  check_width(init, static_cast<Eigen::Index>(train_graph.feature_dim()));
  std::mt19937_64 rng(rng_seed);
  GnnParams params = std::move(init);
  Adam adam(params, hp);
  const int L = static_cast<int>(params.layers.size());

  OperatorList fixed;
  if (hp.neighbor_cap == 0) fixed = layer_operators(train_graph, L, 0, rng);

  std::vector<NodeId> order(train_nodes.begin(), train_nodes.end());
  const std::size_t batch =
      hp.batch_size == 0 ? order.size() : std::min<std::size_t>(order.size(), static_cast<std::size_t>(hp.batch_size));

  ForwardCache cache;
  LossAndGrad lg;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    if (batch < order.size()) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::span<const NodeId> nodes(order.data() + start, std::min(batch, order.size() - start));
      OperatorList ops = hp.neighbor_cap == 0 ? fixed : layer_operators(train_graph, L, hp.neighbor_cap, rng);
      forward_into(params, train_graph.features(), std::move(ops), cache);
      loss_and_grad_into(params, train_graph, nodes, cache, hp.weight_decay, lg);
      if (trace) {
        trace->objective.push_back(lg.loss);
        trace->cross_entropy.push_back(lg.cross_entropy);
      }
      adam.step(params, lg.grads);
    }
  }
  return params;
}

Matrix predict_logits(const GnnParams& params, const Graph& g, std::span<const NodeId> nodes,
                      std::span<const std::size_t> feature_columns) {
  const Matrix& features = g.features();
  const std::size_t width = feature_columns.empty() ? g.feature_dim() : feature_columns.size();
  check_width(params, static_cast<Eigen::Index>(width));
  for (std::size_t c : feature_columns) {
    if (c >= g.feature_dim()) throw InvalidArgument("predict: feature column " + std::to_string(c) + " out of range");
  }
  for (NodeId v : nodes) {
    if (v >= g.num_nodes()) throw InvalidArgument("predict: node " + std::to_string(v) + " out of range");
  }

  // Receptive field: level L holds the targets, level l-1 adds their neighbors.
  const std::size_t L = params.layers.size();
  std::vector<std::vector<NodeId>> level(L + 1);
  level[L].assign(nodes.begin(), nodes.end());
  std::sort(level[L].begin(), level[L].end());
  level[L].erase(std::unique(level[L].begin(), level[L].end()), level[L].end());
  for (std::size_t l = L; l > 0; --l) {
    if (level[l].size() == g.num_nodes()) {
      level[l - 1] = level[l];
      continue;
    }
    level[l - 1] = k_hop_ball(g, level[l], 1);
  }

  const auto& base = level[0];
  Matrix h(static_cast<Eigen::Index>(base.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (feature_columns.empty()) {
      h.row(row) = features.row(base[i]);
    } else {
      for (std::size_t j = 0; j < width; ++j) h(row, static_cast<Eigen::Index>(j)) = features(base[i], static_cast<Eigen::Index>(feature_columns[j]));
    }
  }

  std::vector<std::int64_t> local(g.num_nodes(), -1);
  Matrix agg, self_rows, z;
  for (std::size_t l = 1; l <= L; ++l) {
    const auto& in_set = level[l - 1];
    const auto& out_set = level[l];
    for (std::size_t i = 0; i < in_set.size(); ++i) local[in_set[i]] = static_cast<std::int64_t>(i);
    std::vector<std::size_t> offsets{0};
    std::vector<NodeId> cols;
    self_rows.resize(static_cast<Eigen::Index>(out_set.size()), h.cols());
    for (std::size_t i = 0; i < out_set.size(); ++i) {
      for (NodeId u : g.neighbors(out_set[i])) cols.push_back(static_cast<NodeId>(local[u]));
      offsets.push_back(cols.size());
      self_rows.row(static_cast<Eigen::Index>(i)) = h.row(local[out_set[i]]);
    }
    for (NodeId v : in_set) local[v] = -1;
    kernels::MeanAggregator op(std::move(offsets), std::move(cols), in_set.size());
    op.apply(h, agg);
    layer_forward(params.layers[l - 1], agg, self_rows, z);
    if (l < L) {
      h = z.cwiseMax(0.0);
    } else {
      h = std::move(z);
    }
  }

  Matrix out(static_cast<Eigen::Index>(nodes.size()), h.cols());
  const auto& targets = level[L];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto pos = std::lower_bound(targets.begin(), targets.end(), nodes[i]) - targets.begin();
    out.row(static_cast<Eigen::Index>(i)) = h.row(pos);
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < m.cols(); ++c)
      if (m(i, c) > m(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

BaseModel train_base_model(const Graph& g, const SubspaceSpec& spec, const HyperParams& hp,
                           LossTrace* trace) {
  hp.validate();
  auto [sub, mapping] = induced_subgraph(g, spec.node_subset);
  sub = restrict_features(sub, spec.feature_subset);

  std::vector<NodeId> train;
  std::set<int> classes;
  for (NodeId v : sub.splits().train) {
    if (sub.label(v) == kNoLabel) continue;
    train.push_back(v);
    classes.insert(sub.label(v));
  }
  if (classes.size() < 2) {
    throw DegenerateSubspace(spec.model_index, "training nodes in the sampled subgraph cover fewer than 2 classes");
  }

  BaseModel model;
  model.spec = spec;
  const std::uint64_t param_seed = derive_seed(hp.init_seed, spec.seed);
  const std::uint64_t rng_seed = derive_seed(spec.seed, ~hp.init_seed);
  model.params = train_params(sub, train, init_params(hp, sub.feature_dim(), g.num_classes(), param_seed), hp,
                              rng_seed, trace);

  const std::vector<int> pred = argmax_rows(predict_logits(model.params, sub, train));
  std::vector<int> truth;
  for (NodeId v : train) truth.push_back(sub.label(v));
  model.train_f1 = micro_f1(pred, truth);
  return model;
}

Matrix predict_posterior(const BaseModel& model, const Graph& g, std::span<const NodeId> nodes) {
  const auto& mask = model.spec.feature_subset;
  if (mask.empty() || mask.back() >= g.feature_dim()) {
    throw InvalidArgument("predict_posterior: graph has " + std::to_string(g.feature_dim()) +
                          " feature dims, model mask needs " + std::to_string(mask.empty() ? 0 : mask.back() + 1));
  }
  return kernels::softmax_rows(predict_logits(model.params, g, nodes, mask));
}

namespace {
constexpr std::uint32_t kModelVersion = 1;
}

void write_base_model(std::ostream& out, const BaseModel& model) {
  using detail::put;
  out.write("GFBM", 4);
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint64_t>(out, model.spec.model_index);
  put<double>(out, model.spec.alpha);
  put<double>(out, model.spec.beta);
  put<std::uint64_t>(out, model.spec.seed);
  put<std::uint64_t>(out, model.spec.node_subset.size());
  for (NodeId v : model.spec.node_subset) put<std::uint32_t>(out, v);
  put<std::uint64_t>(out, model.spec.feature_subset.size());
  for (std::size_t c : model.spec.feature_subset) put<std::uint64_t>(out, c);
  put<double>(out, model.train_f1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.params.layers.size()));
  model.params.for_each([&](const Matrix& m) { detail::put_matrix(out, m); });
}

BaseModel read_base_model(std::istream& in) {
  using detail::get;
  detail::expect_magic(in, "GFBM");
  if (get<std::uint32_t>(in) != kModelVersion) throw Error("unsupported model version");
  BaseModel model;
  model.spec.model_index = get<std::uint64_t>(in);
  model.spec.alpha = get<double>(in);
  model.spec.beta = get<double>(in);
  model.spec.seed = get<std::uint64_t>(in);
  model.spec.node_subset.resize(get<std::uint64_t>(in));
  for (auto& v : model.spec.node_subset) v = get<std::uint32_t>(in);
  model.spec.feature_subset.resize(get<std::uint64_t>(in));
  for (auto& c : model.spec.feature_subset) c = get<std::uint64_t>(in);
  model.train_f1 = get<double>(in);
  model.params.layers.resize(get<std::uint32_t>(in));
  model.params.for_each([&](Matrix& m) { m = detail::get_matrix(in); });
  for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
    const auto& p = model.params.layers[l];
    if (p.neighbor.rows() != p.self.rows() || p.neighbor.cols() != p.self.cols() ||
        (l > 0 && p.self.cols() != model.params.layers[l - 1].self.rows())) {
      throw Error("model file: layer shapes do not chain");
    }
  }
  if (!model.params.layers.empty() && model.params.input_dim() != model.spec.feature_subset.size()) {
    throw Error("model file: input width differs from feature mask");
  }
  return model;
}

}  // namespace graph_forest
