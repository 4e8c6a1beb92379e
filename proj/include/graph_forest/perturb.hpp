#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "graph_forest/ensemble.hpp"
#include "graph_forest/graph.hpp"

namespace graph_forest {

/// Global edge budget: floor(fraction * m) flips.
struct AttackBudget {
  double fraction = 0.1;
  std::size_t resolved_edges = 0;

  static AttackBudget resolve(double fraction, std::size_t num_edges);
};

/// Each of budget.resolved_edges flips deletes a uniformly chosen original
/// edge or adds a uniformly chosen non-edge, 50/50. No pair is flipped twice.
Graph random_flip_attack(const Graph& g, const AttackBudget& budget, std::uint64_t seed);

/// Black-box victim: posteriors (|targets| x s) of the targets on a candidate graph.
using ScoringOracle = std::function<Matrix(const Graph&)>;

struct GreedyOptions {
  std::size_t candidate_pool_size = 32;
  /// Fresh pools drawn when no candidate keeps confidence from rising; after
  /// that the attack stops short of the budget.
  int max_resamples = 8;
  /// Threads used to score one step's candidates.
  int parallelism = 1;
};

struct GreedyTrace {
  std::vector<double> confidence;  // mean true-class confidence, [0] is the clean graph
  std::vector<Edge> flips;
};

/// Scores single-edge flips of one current graph. rebase() may do the heavy
/// work once; score_flip() runs concurrently for a step's candidates.
class FlipScorer {
 public:
  virtual ~FlipScorer() = default;
  virtual void rebase(const Graph& current) = 0;
  /// Target posteriors on the current graph.
  virtual Matrix score_current() const = 0;
  /// Target posteriors on current.with_edge_flipped(u, v).
  virtual Matrix score_flip(NodeId u, NodeId v) const = 0;
};

/// Calls the oracle on a flipped copy of the graph for every candidate.
std::unique_ptr<FlipScorer> oracle_flip_scorer(ScoringOracle victim);

/// Discriminant of the ensemble at `targets`. Keeps every base model's
/// full-graph activations and recomputes only the rows a flip can reach,
/// so a candidate costs about a 2-hop ball instead of a full forward pass.
/// Agrees with discriminant(ensemble_posteriors(...)) to rounding.
std::unique_ptr<FlipScorer> ensemble_flip_scorer(const EnsembleModel& e, std::span<const NodeId> targets,
                                                 int parallelism = 1);

/// Mean over targets of the posterior assigned to the target's true label.
double mean_true_confidence(const Matrix& posteriors, const Graph& g, std::span<const NodeId> targets);

/// Each step samples candidate flips with one endpoint in a target's 2-hop
/// ball, scores every candidate with the oracle and keeps the one with the
/// lowest mean true-class confidence (ties: first sampled).
Graph greedy_confidence_attack(const Graph& g, const ScoringOracle& victim, std::span<const NodeId> targets,
                               const AttackBudget& budget, const GreedyOptions& options, std::uint64_t seed,
                               GreedyTrace* trace = nullptr);
/// Same search with the candidates scored by `scorer`.
Graph greedy_confidence_attack(const Graph& g, FlipScorer& scorer, std::span<const NodeId> targets,
                               const AttackBudget& budget, const GreedyOptions& options, std::uint64_t seed,
                               GreedyTrace* trace = nullptr);

using Decider = std::function<std::vector<int>(const Graph&, std::span<const NodeId>)>;

struct RobustnessResult {
  double f1_clean = 0;
  double f1_attacked = 0;
  double drop = 0;
};

RobustnessResult robustness_eval(const Decider& decider, const Graph& clean, const Graph& attacked,
                                 std::span<const NodeId> eval_nodes, std::span<const int> truth);

/// Symmetric difference of the two edge sets.
std::size_t edge_edit_distance(const Graph& a, const Graph& b);

}  // namespace graph_forest
