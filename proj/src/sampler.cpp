#include "graph_forest/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace graph_forest {

namespace {

constexpr int kMaxRedraws = 16;

// Partial Fisher-Yates: the first `count` entries of a random permutation of [0, total).
template <typename Id>
std::vector<Id> draw_without_replacement(std::size_t total, std::size_t count, std::mt19937_64& rng) {
  std::vector<Id> pool(total);
  std::iota(pool.begin(), pool.end(), Id{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void check_fraction(double f, const char* name) {
  if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in (0, 1]");
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t model_index) {
  return mix64(mix64(master_seed) + 0x9e3779b97f4a7c15ULL * (model_index + 1));
}

std::size_t sample_size(double fraction, std::size_t total) {
  const double exact = fraction * static_cast<double>(total);
  auto size = static_cast<std::size_t>(std::ceil(exact * (1.0 - 1e-12)));
  return std::clamp<std::size_t>(size, total == 0 ? 0 : 1, total);
}

SubspaceSpec sample_subspace(const Graph& g, double alpha, double beta, std::size_t model_index,
                             std::uint64_t master_seed) {
  check_fraction(alpha, "alpha");
  check_fraction(beta, "beta");
  if (g.num_nodes() == 0 || g.feature_dim() == 0) throw InvalidArgument("sample_subspace: empty graph");
  const std::size_t node_count = sample_size(alpha, g.num_nodes());
  const std::size_t dim_count = sample_size(beta, g.feature_dim());

  std::vector<std::uint8_t> is_train(g.num_nodes(), 0);
  for (NodeId v : g.splits().train) is_train[v] = 1;

  std::uint64_t seed = derive_seed(master_seed, model_index);
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt, ++seed) {
    std::mt19937_64 rng(seed);
    SubspaceSpec spec;
    spec.model_index = model_index;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.seed = seed;
    spec.node_subset = draw_without_replacement<NodeId>(g.num_nodes(), node_count, rng);
    spec.feature_subset = draw_without_replacement<std::size_t>(g.feature_dim(), dim_count, rng);

    std::set<int> classes;
    for (NodeId v : spec.node_subset) {
      if (is_train[v] && g.label(v) != kNoLabel) classes.insert(g.label(v));
      if (classes.size() >= 2) return spec;
    }
  }
  throw DegenerateSubspace(model_index, "sampled training nodes cover fewer than 2 classes after " +
                                            std::to_string(kMaxRedraws) + " redraws (alpha too small or labels too sparse)");
}

std::vector<NodeId> sample_neighbors(std::span<const NodeId> neigh, std::size_t cap, std::mt19937_64& rng) {
  if (cap == 0) throw InvalidArgument("sample_neighbors: cap must be >= 1");
  if (neigh.size() <= cap) return {neigh.begin(), neigh.end()};
  std::vector<std::size_t> picks = draw_without_replacement<std::size_t>(neigh.size(), cap, rng);
  std::vector<NodeId> out;
  out.reserve(cap);
  for (std::size_t i : picks) out.push_back(neigh[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace graph_forest
