#pragma once

#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "graph_forest/graph.hpp"
#include "graph_forest/kernels.hpp"
#include "graph_forest/sampler.hpp"

namespace graph_forest {

struct HyperParams {
  int layers = 3;
  int hidden = 64;
  int neighbor_cap = 0;  // per-layer neighbor cap r; 0 keeps full neighborhoods
  int batch_size = 0;    // training nodes per Adam step; 0 is full batch
  int epochs = 200;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t init_seed = 0;

  void validate() const;
};

/// Weights of one message-passing layer, both out x in:
/// h_v = act(neighbor * mean_{u in N(v)} h_u + self * h_v).
struct LayerParams {
  Matrix neighbor;
  Matrix self;
};

struct GnnParams {
  std::vector<LayerParams> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().self.cols()); }
  std::size_t output_dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().self.rows()); }
  std::size_t num_parameters() const;
  double squared_norm() const;
  GnnParams zeros_like() const;

  /// Visits every weight matrix in storage order (layer by layer, neighbor then self).
  template <typename F>
  void for_each(F&& f) {
    for (auto& layer : layers) {
      f(layer.neighbor);
      f(layer.self);
    }
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& layer : layers) {
      f(layer.neighbor);
      f(layer.self);
    }
  }

  friend bool operator==(const GnnParams& a, const GnnParams& b);
};

/// Glorot-uniform weights, deterministic in seed.
GnnParams init_params(const HyperParams& hp, std::size_t input_dim, int num_classes, std::uint64_t seed);

using OperatorList = std::vector<std::shared_ptr<const kernels::MeanAggregator>>;

/// Per-layer aggregation operators over g. With cap = 0 every layer shares the
/// full-neighborhood operator; otherwise each layer samples its own.
OperatorList layer_operators(const Graph& g, int layers, int cap, std::mt19937_64& rng);

/// Activations kept for the backward pass. Index l holds layer l+1.
struct ForwardCache {
  OperatorList ops;
  std::vector<Matrix> inputs;           // h^{l-1}
  std::vector<Matrix> aggregated;       // mean-aggregated h^{l-1}
  std::vector<Matrix> pre_activations;  // z^l; the last one is the logits

  const Matrix& logits() const { return pre_activations.back(); }
};

ForwardCache forward(const GnnParams& params, const Graph& g, int neighbor_cap, std::mt19937_64& rng);
ForwardCache forward_with(const GnnParams& params, const Matrix& features, OperatorList ops);
/// forward_with into an existing cache, reusing its buffers when shapes match.
void forward_into(const GnnParams& params, const Matrix& features, OperatorList ops, ForwardCache& cache);

struct LossAndGrad {
  double loss = 0;
  double cross_entropy = 0;  // loss without the weight-decay term
  GnnParams grads;
};

/// Mean softmax cross-entropy over `labeled` plus (weight_decay / 2) ||params||^2,
/// with exact gradients.
LossAndGrad loss_and_grad(const GnnParams& params, const Graph& g, std::span<const NodeId> labeled,
                          const ForwardCache& cache, double weight_decay);
/// loss_and_grad into an existing result, reusing its gradient buffers.
void loss_and_grad_into(const GnnParams& params, const Graph& g, std::span<const NodeId> labeled,
                        const ForwardCache& cache, double weight_decay, LossAndGrad& out);

/// Adam on the training-node loss of `train_graph`, starting from `init`.
/// `rng_seed` drives neighbor capping and minibatch order. When given,
/// `trace` receives the objective and its cross-entropy part before each step.
struct LossTrace {
  std::vector<double> objective;
  std::vector<double> cross_entropy;
};

GnnParams train_params(const Graph& train_graph, std::span<const NodeId> train_nodes, GnnParams init,
                       const HyperParams& hp, std::uint64_t rng_seed, LossTrace* trace = nullptr);

/// Logits at `nodes` (rows in the given order), computed only over their
/// receptive field with full neighborhoods. `feature_columns` selects input
/// columns of g's features; empty means all.
Matrix predict_logits(const GnnParams& params, const Graph& g, std::span<const NodeId> nodes,
                      std::span<const std::size_t> feature_columns = {});

/// Row argmax; ties go to the smallest column.
std::vector<int> argmax_rows(const Matrix& m);

struct BaseModel {
  GnnParams params;
  SubspaceSpec spec;
  double train_f1 = 0;

  friend bool operator==(const BaseModel&, const BaseModel&) = default;
};

/// Trains on induced_subgraph(g, spec.node_subset) restricted to spec.feature_subset.
BaseModel train_base_model(const Graph& g, const SubspaceSpec& spec, const HyperParams& hp,
                           LossTrace* trace = nullptr);

/// Row-stochastic class posteriors for `nodes`, using g's full structure and
/// the model's feature mask.
Matrix predict_posterior(const BaseModel& model, const Graph& g, std::span<const NodeId> nodes);

void write_base_model(std::ostream& out, const BaseModel& model);
BaseModel read_base_model(std::istream& in);

}  // namespace graph_forest
