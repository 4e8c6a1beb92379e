#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "graph_forest/gnn.hpp"

namespace graph_forest {

enum class Voting { hard, soft, weighted };

Voting parse_voting(const std::string& name);
std::string to_string(Voting v);

/// Where weighted voting takes each model's "past accuracy" from.
enum class WeightSource { training, validation };

struct EnsembleConfig {
  std::size_t k = 25;
  double alpha = 0.7;
  double beta = 0.5;
  std::uint64_t master_seed = 0;
  Voting voting = Voting::soft;
  WeightSource weight_source = WeightSource::training;
};

struct EnsembleModel {
  std::vector<BaseModel> models;
  double alpha = 1;
  double beta = 1;
  std::uint64_t master_seed = 0;
  Voting voting = Voting::soft;
  std::vector<double> weights;  // sums to 1; uniform unless voting is weighted

  std::size_t k() const noexcept { return models.size(); }
  friend bool operator==(const EnsembleModel&, const EnsembleModel&) = default;
};

/// Posteriors of every base model for the same node list: slice j is
/// |nodes| x s and row-stochastic.
struct PosteriorStack {
  std::vector<NodeId> nodes;
  std::vector<Matrix> slices;

  std::size_t num_models() const noexcept { return slices.size(); }
  std::size_t num_nodes() const noexcept { return slices.empty() ? 0 : static_cast<std::size_t>(slices.front().rows()); }
  std::size_t num_classes() const noexcept { return slices.empty() ? 0 : static_cast<std::size_t>(slices.front().cols()); }
};

/// Model j is trained on sample_subspace(g, alpha, beta, j, master_seed).
/// Models train on up to `parallelism` threads; the result does not depend on
/// the thread count. A degenerate subspace aborts with its model index.
EnsembleModel train_ensemble(const Graph& g, const EnsembleConfig& cfg, const HyperParams& hp, int parallelism = 1);

PosteriorStack ensemble_posteriors(const EnsembleModel& e, const Graph& g, std::span<const NodeId> nodes,
                                   int parallelism = 1);

/// out[x][c] = sum_j weights[j] * P_j(c | x).
Matrix discriminant(const PosteriorStack& stack, std::span<const double> weights);

std::vector<double> uniform_weights(std::size_t k);
/// Accuracies normalized to sum to 1. Throws when all are zero or any is negative.
std::vector<double> accuracy_weights(std::span<const double> accuracies);

/// Argmax of the discriminant, ties to the smallest class id.
std::vector<int> decide_soft(const PosteriorStack& stack, std::span<const double> weights);
/// Majority of per-model argmax votes. Vote ties go to the class whose voters
/// have the higher mean probability for it, then to the smallest class id.
std::vector<int> decide_hard(const PosteriorStack& stack);
/// decide_soft with accuracy-proportional weights.
std::vector<int> decide_weighted(const PosteriorStack& stack, std::span<const double> accuracies);

/// Decisions under the model's own voting rule.
std::vector<int> decide(const EnsembleModel& e, const PosteriorStack& stack);
std::vector<int> predict(const EnsembleModel& e, const Graph& g, std::span<const NodeId> nodes, int parallelism = 1);

/// Replaces weights with normalized validation micro-F1 of each model.
void set_validation_weights(EnsembleModel& e, const Graph& g);

void write_ensemble(std::ostream& out, const EnsembleModel& e);
EnsembleModel read_ensemble(std::istream& in);
void save_ensemble(const EnsembleModel& e, const std::filesystem::path& path);
EnsembleModel load_ensemble(const std::filesystem::path& path);

}  // namespace graph_forest
