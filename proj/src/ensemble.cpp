#include "graph_forest/ensemble.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>

#include "binary_io.hpp"
#include "fs_util.hpp"
#include "graph_forest/metrics.hpp"

namespace graph_forest {

Voting parse_voting(const std::string& name) {
  if (name == "hard") return Voting::hard;
  if (name == "soft") return Voting::soft;
  if (name == "weighted") return Voting::weighted;
  throw InvalidArgument("unknown voting rule '" + name + "' (expected hard|soft|weighted)");
}

std::string to_string(Voting v) {
  switch (v) {
    case Voting::hard: return "hard";
    case Voting::soft: return "soft";
    case Voting::weighted: return "weighted";
  }
  return "?";
}

std::vector<double> uniform_weights(std::size_t k) {
  if (k == 0) throw InvalidArgument("ensemble needs at least one model");
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

std::vector<double> accuracy_weights(std::span<const double> accuracies) {
  double total = 0;
  for (double a : accuracies) {
    if (!(a >= 0) || !std::isfinite(a)) throw InvalidArgument("accuracy weights must be finite and non-negative");
    total += a;
  }
  if (total == 0) throw InvalidArgument("accuracy weights are all zero");
  std::vector<double> w(accuracies.begin(), accuracies.end());
  for (double& x : w) x /= total;
  return w;
}

EnsembleModel train_ensemble(const Graph& g, const EnsembleConfig& cfg, const HyperParams& hp, int parallelism) {
  if (cfg.k < 1) throw InvalidArgument("k must be >= 1");
  hp.validate();
  std::vector<SubspaceSpec> specs;
  specs.reserve(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j) specs.push_back(sample_subspace(g, cfg.alpha, cfg.beta, j, cfg.master_seed));

  std::vector<BaseModel> models(cfg.k);
  std::vector<std::exception_ptr> failures(cfg.k);
  const auto k = static_cast<std::ptrdiff_t>(cfg.k);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, parallelism))
  for (std::ptrdiff_t j = 0; j < k; ++j) {
    try {
      models[j] = train_base_model(g, specs[j], hp);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  }
  for (auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  EnsembleModel e;
  e.models = std::move(models);
  e.alpha = cfg.alpha;
  e.beta = cfg.beta;
  e.master_seed = cfg.master_seed;
  e.voting = cfg.voting;
  if (cfg.voting == Voting::weighted) {
    if (cfg.weight_source == WeightSource::validation) {
      set_validation_weights(e, g);
    } else {
      std::vector<double> acc;
      for (const auto& m : e.models) acc.push_back(m.train_f1);
      e.weights = accuracy_weights(acc);
    }
  } else {
    e.weights = uniform_weights(e.k());
  }
  return e;
}

PosteriorStack ensemble_posteriors(const EnsembleModel& e, const Graph& g, std::span<const NodeId> nodes,
                                   int parallelism) {
  PosteriorStack stack;
  stack.nodes.assign(nodes.begin(), nodes.end());
  stack.slices.resize(e.k());
  std::vector<std::exception_ptr> failures(e.k());
  const auto k = static_cast<std::ptrdiff_t>(e.k());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, parallelism)) if (parallelism > 1)
  for (std::ptrdiff_t j = 0; j < k; ++j) {
    try {
      stack.slices[j] = predict_posterior(e.models[j], g, nodes);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  }
  for (auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
  return stack;
}

Matrix discriminant(const PosteriorStack& stack, std::span<const double> weights) {
  if (weights.size() != stack.num_models()) {
    throw InvalidArgument("discriminant: " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(stack.num_models()) + " models");
  }
  Matrix out;
  kernels::weighted_sum(stack.slices, weights, out);
  return out;
}

std::vector<int> decide_soft(const PosteriorStack& stack, std::span<const double> weights) {
  return argmax_rows(discriminant(stack, weights));
}

std::vector<int> decide_hard(const PosteriorStack& stack) {
  const std::size_t n = stack.num_nodes();
  const std::size_t s = stack.num_classes();
  std::vector<std::vector<int>> votes_by_model;
  for (const Matrix& slice : stack.slices) votes_by_model.push_back(argmax_rows(slice));

  std::vector<int> out(n);
  std::vector<std::size_t> votes(s);
  std::vector<double> confidence(s);
  for (std::size_t x = 0; x < n; ++x) {
    std::fill(votes.begin(), votes.end(), 0);
    std::fill(confidence.begin(), confidence.end(), 0.0);
    for (std::size_t j = 0; j < stack.num_models(); ++j) {
      const int c = votes_by_model[j][x];
      ++votes[c];
      confidence[c] += stack.slices[j](static_cast<Eigen::Index>(x), c);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < s; ++c) {
      if (votes[c] > votes[best]) {
        best = c;
      } else if (votes[c] == votes[best] && votes[c] > 0 &&
                 confidence[c] / static_cast<double>(votes[c]) > confidence[best] / static_cast<double>(votes[best])) {
        best = c;
      }
    }
    out[x] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> decide_weighted(const PosteriorStack& stack, std::span<const double> accuracies) {
  if (accuracies.size() != stack.num_models()) throw InvalidArgument("decide_weighted: one accuracy per model required");
  const std::vector<double> w = accuracy_weights(accuracies);
  return decide_soft(stack, w);
}

std::vector<int> decide(const EnsembleModel& e, const PosteriorStack& stack) {
  switch (e.voting) {
    case Voting::hard: return decide_hard(stack);
    case Voting::soft:
    case Voting::weighted: return decide_soft(stack, e.weights);
  }
  return {};
}

std::vector<int> predict(const EnsembleModel& e, const Graph& g, std::span<const NodeId> nodes, int parallelism) {
  return decide(e, ensemble_posteriors(e, g, nodes, parallelism));
}

void set_validation_weights(EnsembleModel& e, const Graph& g) {
  const auto& val = g.splits().val;
  if (val.empty()) throw InvalidArgument("validation weights need a non-empty val split");
  std::vector<int> truth;
  for (NodeId v : val) truth.push_back(g.label(v));
  std::vector<double> acc;
  for (const auto& m : e.models) acc.push_back(micro_f1(argmax_rows(predict_posterior(m, g, val)), truth));
  e.weights = accuracy_weights(acc);
}

namespace {
constexpr std::uint32_t kEnsembleVersion = 1;
}

void write_ensemble(std::ostream& out, const EnsembleModel& e) {
  using detail::put;
  out.write("GFEN", 4);
  put<std::uint32_t>(out, kEnsembleVersion);
  put<std::uint64_t>(out, e.k());
  put<double>(out, e.alpha);
  put<double>(out, e.beta);
  put<std::uint64_t>(out, e.master_seed);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(e.voting));
  for (double w : e.weights) put<double>(out, w);
  for (const auto& m : e.models) write_base_model(out, m);
}

EnsembleModel read_ensemble(std::istream& in) {
  using detail::get;
  detail::expect_magic(in, "GFEN");
  if (get<std::uint32_t>(in) != kEnsembleVersion) throw Error("unsupported ensemble version");
  EnsembleModel e;
  const auto k = get<std::uint64_t>(in);
  if (k == 0 || k > (1u << 20)) throw Error("ensemble file: implausible model count");
  e.alpha = get<double>(in);
  e.beta = get<double>(in);
  e.master_seed = get<std::uint64_t>(in);
  const auto voting = get<std::uint8_t>(in);
  if (voting > 2) throw Error("ensemble file: bad voting rule");
  e.voting = static_cast<Voting>(voting);
  e.weights.resize(k);
  for (double& w : e.weights) w = get<double>(in);
  for (std::uint64_t j = 0; j < k; ++j) e.models.push_back(read_base_model(in));
  return e;
}

void save_ensemble(const EnsembleModel& e, const std::filesystem::path& path) {
  detail::make_dirs(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_ensemble(out, e);
  if (!out) throw Error("failed writing " + path.string());
}

EnsembleModel load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_ensemble(in);
}

}  // namespace graph_forest
