#include "graph_forest/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <random>
#include <unordered_set>
#include <utility>

#include "graph_forest/kernels.hpp"
#include "graph_forest/metrics.hpp"

namespace graph_forest {

namespace {

std::uint64_t pair_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::size_t max_pairs(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace

AttackBudget AttackBudget::resolve(double fraction, std::size_t num_edges) {
  if (!(fraction >= 0 && fraction <= 1)) throw InvalidArgument("attack budget fraction must lie in [0, 1]");
  return {fraction, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(num_edges)))};
}

Graph random_flip_attack(const Graph& g, const AttackBudget& budget, std::uint64_t seed) {
  if (budget.resolved_edges == 0) return g;
  const std::size_t n = g.num_nodes();
  std::mt19937_64 rng(seed);
  std::vector<Edge> deletable = g.edge_list();
  std::unordered_set<std::uint64_t> present;
  for (const Edge& e : deletable) present.insert(pair_key(e.u, e.v));
  std::unordered_set<std::uint64_t> used;
  std::vector<Edge> added;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));

  const std::size_t flips = std::min(budget.resolved_edges, max_pairs(n));
  for (std::size_t f = 0; f < flips; ++f) {
    const bool can_add = present.size() < max_pairs(n);
    const bool remove = deletable.empty() ? false : (!can_add || coin(rng));
    if (remove) {
      std::uniform_int_distribution<std::size_t> pick(0, deletable.size() - 1);
      const std::size_t i = pick(rng);
      const Edge e = deletable[i];
      deletable[i] = deletable.back();
      deletable.pop_back();
      present.erase(pair_key(e.u, e.v));
      used.insert(pair_key(e.u, e.v));
    } else {
      while (true) {
        const NodeId u = node(rng), v = node(rng);
        if (u == v) continue;
        const auto key = pair_key(u, v);
        if (present.count(key) || used.count(key)) continue;
        present.insert(key);
        used.insert(key);
        added.push_back({u, v});
        break;
      }
    }
  }
  std::vector<Edge> edges = std::move(deletable);
  edges.insert(edges.end(), added.begin(), added.end());
  return g.with_edges(edges);
}

double mean_true_confidence(const Matrix& posteriors, const Graph& g, std::span<const NodeId> targets) {
  if (static_cast<std::size_t>(posteriors.rows()) != targets.size()) {
    throw InvalidArgument("oracle returned " + std::to_string(posteriors.rows()) + " rows for " +
                          std::to_string(targets.size()) + " targets");
  }
  double total = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) total += posteriors(static_cast<Eigen::Index>(i), g.label(targets[i]));
  return total / static_cast<double>(targets.size());
}

Graph greedy_confidence_attack(const Graph& g, const ScoringOracle& victim, std::span<const NodeId> targets,
                               const AttackBudget& budget, const GreedyOptions& options, std::uint64_t seed,
                               GreedyTrace* trace) {
  auto scorer = oracle_flip_scorer(victim);
  return greedy_confidence_attack(g, *scorer, targets, budget, options, seed, trace);
}

Graph greedy_confidence_attack(const Graph& g, FlipScorer& scorer, std::span<const NodeId> targets,
                               const AttackBudget& budget, const GreedyOptions& options, std::uint64_t seed,
                               GreedyTrace* trace) {
  if (targets.empty()) throw InvalidArgument("greedy attack needs at least one target");
  for (NodeId t : targets) {
    if (t >= g.num_nodes() || g.label(t) == kNoLabel) throw InvalidArgument("greedy attack targets must be labeled nodes");
  }
  if (options.candidate_pool_size < 1) throw InvalidArgument("candidate pool must be >= 1");
  const std::size_t n = g.num_nodes();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_target(0, targets.size() - 1);
  std::uniform_int_distribution<NodeId> any_node(0, static_cast<NodeId>(n - 1));
  std::unordered_set<std::uint64_t> used;

  Graph current = g;
  scorer.rebase(current);
  double confidence = mean_true_confidence(scorer.score_current(), g, targets);
  if (trace) {
    trace->confidence = {confidence};
    trace->flips.clear();
  }

  const std::size_t flips = std::min(budget.resolved_edges, max_pairs(n));
  for (std::size_t step = 0; step < flips; ++step) {
    bool accepted = false;
    for (int attempt = 0; attempt <= options.max_resamples && !accepted; ++attempt) {
      std::vector<Edge> pool;
      std::unordered_set<std::uint64_t> in_pool;
      // Bounded so a saturated neighborhood cannot spin forever.
      for (std::size_t tries = 0; pool.size() < options.candidate_pool_size && tries < 64 * options.candidate_pool_size; ++tries) {
        const NodeId target = targets[pick_target(rng)];
        const std::vector<NodeId> ball = k_hop_ball(current, std::span<const NodeId>(&target, 1), 2);
        std::uniform_int_distribution<std::size_t> pick_ball(0, ball.size() - 1);
        const NodeId u = ball[pick_ball(rng)];
        const NodeId v = any_node(rng);
        if (u == v) continue;
        const auto key = pair_key(u, v);
        if (used.count(key) || in_pool.count(key)) continue;
        in_pool.insert(key);
        pool.push_back({std::min(u, v), std::max(u, v)});
      }
      if (pool.empty()) break;

      std::vector<double> scores(pool.size());
      std::vector<std::exception_ptr> failures(pool.size());
      const auto pool_size = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.parallelism)) if (options.parallelism > 1)
      for (std::ptrdiff_t c = 0; c < pool_size; ++c) {
        try {
          scores[c] = mean_true_confidence(scorer.score_flip(pool[c].u, pool[c].v), g, targets);
        } catch (...) {
          failures[c] = std::current_exception();
        }
      }
      for (auto& failure : failures)
        if (failure) std::rethrow_exception(failure);
      const std::size_t best = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
      const double best_confidence = scores[best];
      if (best_confidence <= confidence) {
        current = current.with_edge_flipped(pool[best].u, pool[best].v);
        scorer.rebase(current);
        confidence = best_confidence;
        used.insert(pair_key(pool[best].u, pool[best].v));
        if (trace) {
          trace->confidence.push_back(confidence);
          trace->flips.push_back(pool[best]);
        }
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  return current;
}

namespace {

class OracleScorer final : public FlipScorer {
 public:
  explicit OracleScorer(ScoringOracle victim) : victim_(std::move(victim)) {}
  void rebase(const Graph& current) override { current_ = current; }
  Matrix score_current() const override { return victim_(graph()); }
  Matrix score_flip(NodeId u, NodeId v) const override { return victim_(graph().with_edge_flipped(u, v)); }

 private:
  const Graph& graph() const {
    if (!current_) throw InvalidArgument("flip scorer used before rebase");
    return *current_;
  }
  ScoringOracle victim_;
  std::optional<Graph> current_;
};

// Sorted, deduplicated union of `a` and the flipped-graph neighbors of every node in `a`.
template <typename Nbrs>
std::vector<NodeId> grow(const std::vector<NodeId>& a, Nbrs&& nbrs) {
  std::vector<NodeId> out = a;
  for (NodeId x : a) {
    auto row = nbrs(x);
    out.insert(out.end(), row.begin(), row.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<NodeId> intersect(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

class EnsembleScorer final : public FlipScorer {
 public:
  EnsembleScorer(const EnsembleModel& e, std::span<const NodeId> targets, int parallelism)
      : e_(e), targets_(targets.begin(), targets.end()), parallelism_(std::max(1, parallelism)) {
    if (e.models.empty()) throw InvalidArgument("flip scorer: empty ensemble");
    if (targets_.empty()) throw InvalidArgument("flip scorer: no targets");
    for (const auto& m : e.models)
      if (m.params.layers.size() != e.models.front().params.layers.size())
        throw InvalidArgument("flip scorer: base models differ in depth");
    sorted_targets_ = targets_;
    std::sort(sorted_targets_.begin(), sorted_targets_.end());
    sorted_targets_.erase(std::unique(sorted_targets_.begin(), sorted_targets_.end()), sorted_targets_.end());
  }

  void rebase(const Graph& current) override {
    const std::size_t n = current.num_nodes();
    for (NodeId t : targets_)
      if (t >= n) throw InvalidArgument("flip scorer: target " + std::to_string(t) + " out of range");
    if (!graph_) {
      masked_.resize(e_.k());
      for (std::size_t j = 0; j < e_.k(); ++j) {
        const auto& mask = e_.models[j].spec.feature_subset;
        if (mask.empty() || mask.back() >= current.feature_dim()) {
          throw InvalidArgument("flip scorer: model " + std::to_string(j) + " feature mask exceeds the graph");
        }
        Matrix& x = masked_[j];
        x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(mask.size()));
        for (std::size_t c = 0; c < mask.size(); ++c)
          x.col(static_cast<Eigen::Index>(c)) = current.features().col(static_cast<Eigen::Index>(mask[c]));
      }
      caches_.resize(e_.k());
      stack_.nodes = targets_;
      stack_.slices.resize(e_.k());
      rows_of_.assign(n, {});
      for (std::size_t i = 0; i < targets_.size(); ++i) rows_of_[targets_[i]].push_back(static_cast<Eigen::Index>(i));
    }
    graph_ = current;
    const auto k = static_cast<std::ptrdiff_t>(e_.k());
    std::vector<std::exception_ptr> failures(e_.k());
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallelism_) if (parallelism_ > 1)
    for (std::ptrdiff_t j = 0; j < k; ++j) {
      try {
        const auto& params = e_.models[j].params;
        std::mt19937_64 rng(0);
        forward_into(params, masked_[j], layer_operators(*graph_, static_cast<int>(params.layers.size()), 0, rng),
                     caches_[j]);
        const Matrix& logits = caches_[j].logits();
        Matrix rows(static_cast<Eigen::Index>(targets_.size()), logits.cols());
        for (std::size_t i = 0; i < targets_.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = logits.row(targets_[i]);
        stack_.slices[j] = kernels::softmax_rows(rows);
      } catch (...) {
        failures[j] = std::current_exception();
      }
    }
    for (auto& failure : failures)
      if (failure) std::rethrow_exception(failure);
  }

  Matrix score_current() const override {
    if (!graph_) throw InvalidArgument("flip scorer used before rebase");
    return discriminant(stack_, e_.weights);
  }

  Matrix score_flip(NodeId u, NodeId v) const override {
    if (!graph_) throw InvalidArgument("flip scorer used before rebase");
    const Graph& g = *graph_;
    const std::size_t n = g.num_nodes();
    if (u >= n || v >= n) throw InvalidArgument("flip scorer: node out of range");
    if (u == v) throw InvalidArgument("flip scorer: self-loop");

    // Neighbor lists of u and v after the flip, in the order with_edge_flipped keeps.
    const bool present = g.has_edge(u, v);
    auto flipped_row = [&](NodeId w, NodeId other) {
      auto row = g.neighbors(w);
      std::vector<NodeId> out;
      out.reserve(row.size() + 1);
      if (present) {
        for (NodeId x : row)
          if (x != other) out.push_back(x);
      } else {
        auto pos = std::lower_bound(row.begin(), row.end(), other);
        out.insert(out.end(), row.begin(), pos);
        out.push_back(other);
        out.insert(out.end(), pos, row.end());
      }
      return out;
    };
    const std::vector<NodeId> nu = flipped_row(u, v), nv = flipped_row(v, u);
    auto nbrs = [&](NodeId x) -> std::span<const NodeId> {
      if (x == u) return nu;
      if (x == v) return nv;
      return g.neighbors(x);
    };

    // changed[l]: nodes whose layer-l output can differ; layer 1 changes only
    // at the endpoints and each later layer spreads one hop.
    const std::size_t L = e_.models.front().params.layers.size();
    std::vector<std::vector<NodeId>> need(L + 1);
    need[1] = {std::min(u, v), std::max(u, v)};
    for (std::size_t l = 2; l <= L; ++l) need[l] = grow(need[l - 1], nbrs);
    need[L] = intersect(need[L], sorted_targets_);
    if (need[L].empty()) return score_current();
    // Keep only rows the changed targets actually read.
    for (std::size_t l = L - 1; l >= 1; --l) need[l] = intersect(need[l], grow(need[l + 1], nbrs));

    thread_local std::vector<std::int64_t> slot_prev, slot_cur;
    if (slot_prev.size() < n) {
      slot_prev.assign(n, -1);
      slot_cur.assign(n, -1);
    }
    PosteriorStack stack;
    stack.nodes = targets_;
    stack.slices.resize(e_.k());
    Matrix h_prev, h_cur, agg, self_rows, z;
    for (std::size_t j = 0; j < e_.k(); ++j) {
      const auto& params = e_.models[j].params;
      const ForwardCache& cache = caches_[j];
      for (std::size_t l = 0; l < L; ++l) {
        const Matrix& base = cache.inputs[l];
        const auto& rows = need[l + 1];
        auto src = [&](NodeId y) {
          return l > 0 && slot_prev[y] >= 0 ? std::as_const(h_prev).row(slot_prev[y]) : base.row(y);
        };
        agg.resize(static_cast<Eigen::Index>(rows.size()), base.cols());
        self_rows.resize(agg.rows(), base.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto r = static_cast<Eigen::Index>(i);
          auto dst = agg.row(r);
          dst.setZero();
          const auto row = nbrs(rows[i]);
          for (NodeId y : row) dst += src(y);
          dst *= row.empty() ? 0.0 : 1.0 / static_cast<double>(row.size());
          self_rows.row(r) = src(rows[i]);
        }
        z.noalias() = agg * params.layers[l].neighbor.transpose();
        z.noalias() += self_rows * params.layers[l].self.transpose();
        if (l > 0)
          for (NodeId y : need[l]) slot_prev[y] = -1;
        if (l + 1 < L) {
          h_cur = z.cwiseMax(0.0);
          for (std::size_t i = 0; i < rows.size(); ++i) slot_cur[rows[i]] = static_cast<std::int64_t>(i);
          std::swap(h_prev, h_cur);
          std::swap(slot_prev, slot_cur);
        }
      }
      const Matrix probs = kernels::softmax_rows(z);
      Matrix slice = stack_.slices[j];
      for (std::size_t i = 0; i < need[L].size(); ++i)
        for (Eigen::Index r : rows_of_[need[L][i]]) slice.row(r) = probs.row(static_cast<Eigen::Index>(i));
      stack.slices[j] = std::move(slice);
    }
    return discriminant(stack, e_.weights);
  }

 private:
  const EnsembleModel& e_;
  std::vector<NodeId> targets_;
  std::vector<NodeId> sorted_targets_;
  int parallelism_;
  std::optional<Graph> graph_;
  std::vector<Matrix> masked_;
  std::vector<ForwardCache> caches_;
  PosteriorStack stack_;
  std::vector<std::vector<Eigen::Index>> rows_of_;
};

}  // namespace

std::unique_ptr<FlipScorer> oracle_flip_scorer(ScoringOracle victim) {
  return std::make_unique<OracleScorer>(std::move(victim));
}

std::unique_ptr<FlipScorer> ensemble_flip_scorer(const EnsembleModel& e, std::span<const NodeId> targets,
                                                 int parallelism) {
  return std::make_unique<EnsembleScorer>(e, targets, parallelism);
}

RobustnessResult robustness_eval(const Decider& decider, const Graph& clean, const Graph& attacked,
                                 std::span<const NodeId> eval_nodes, std::span<const int> truth) {
  if (eval_nodes.size() != truth.size()) throw InvalidArgument("robustness_eval: one truth label per node required");
  RobustnessResult r;
  r.f1_clean = micro_f1(decider(clean, eval_nodes), truth);
  r.f1_attacked = micro_f1(decider(attacked, eval_nodes), truth);
  r.drop = r.f1_clean - r.f1_attacked;
  return r;
}

std::size_t edge_edit_distance(const Graph& a, const Graph& b) {
  auto ea = a.edge_list(), eb = b.edge_list();
  auto less = [](const Edge& x, const Edge& y) { return pair_key(x.u, x.v) < pair_key(y.u, y.v); };
  std::sort(ea.begin(), ea.end(), less);
  std::sort(eb.begin(), eb.end(), less);
  std::vector<Edge> diff;
  std::set_symmetric_difference(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(diff), less);
  return diff.size();
}

}  // namespace graph_forest
