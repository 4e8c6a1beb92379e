#include "graph_forest/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "graph_forest/metrics.hpp"
#include "graph_forest/perturb.hpp"

namespace graph_forest {

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("bad value '" + text + "' for " + key);
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_value<T>(key, item));
  }
  if (out.empty()) throw UsageError(key + " must not be empty");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw UsageError("bad boolean '" + text + "' for " + key);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::string fmt(double x) { return format_real(x); }

std::string fixed4(const std::string& x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", std::stod(x));
  return buf;
}

// Columns with the config echo appended.
ReportTable echo_table(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  for (const auto& [key, value] : cfg.echo()) columns.push_back(key);
  return ReportTable{std::move(columns), {}};
}

void add_echo_row(ReportTable& t, const ExperimentConfig& cfg, std::vector<std::string> cells) {
  for (const auto& [key, value] : cfg.echo()) cells.push_back(value);
  t.add_row(std::move(cells));
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "dataset") dataset = value;
  else if (key == "k") k = parse_value<std::size_t>(key, value);
  else if (key == "alpha") alpha = parse_value<double>(key, value);
  else if (key == "beta") beta = parse_value<double>(key, value);
  else if (key == "voting") {
    try {
      voting = parse_voting(value);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  else if (key == "layers") hp.layers = parse_value<int>(key, value);
  else if (key == "hidden") hp.hidden = parse_value<int>(key, value);
  else if (key == "neighbor_cap") hp.neighbor_cap = parse_value<int>(key, value);
  else if (key == "batch_size") hp.batch_size = parse_value<int>(key, value);
  else if (key == "epochs") hp.epochs = parse_value<int>(key, value);
  else if (key == "learning_rate") hp.learning_rate = parse_value<double>(key, value);
  else if (key == "weight_decay") hp.weight_decay = parse_value<double>(key, value);
  else if (key == "init_seed") hp.init_seed = parse_value<std::uint64_t>(key, value);
  else if (key == "seed") master_seed = parse_value<std::uint64_t>(key, value);
  else if (key == "parallelism") parallelism = parse_value<int>(key, value);
  else if (key == "out") output_dir = value;
  else if (key == "alpha_list") alpha_list = parse_list<double>(key, value);
  else if (key == "beta_list") beta_list = parse_list<double>(key, value);
  else if (key == "reverse") reverse = parse_bool(key, value);
  else if (key == "hidden_list") hidden_list = parse_list<int>(key, value);
  else if (key == "attack") attack = value;
  else if (key == "budget") budget = parse_value<double>(key, value);
  else if (key == "pool") pool = parse_value<std::size_t>(key, value);
  else if (key == "targets") targets = parse_value<std::size_t>(key, value);
  else if (key == "victim") victim = value;
  else throw UsageError("unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
  auto fraction = [](double f, const char* name) {
    if (!(f > 0 && f <= 1)) throw UsageError(std::string(name) + " must lie in (0, 1]");
  };
  if (k < 1) throw UsageError("k must be >= 1");
  fraction(alpha, "alpha");
  fraction(beta, "beta");
  for (double a : alpha_list) fraction(a, "alpha_list entries");
  for (double b : beta_list) fraction(b, "beta_list entries");
  for (int h : hidden_list)
    if (h < 1) throw UsageError("hidden_list entries must be >= 1");
  if (parallelism < 1) throw UsageError("parallelism must be >= 1");
  if (attack != "random" && attack != "greedy") throw UsageError("attack must be random or greedy");
  if (victim != "each" && victim != "baseline" && victim != "ensemble") throw UsageError("victim must be each, baseline or ensemble");
  if (!(budget >= 0 && budget <= 1)) throw UsageError("budget must lie in [0, 1]");
  if (pool < 1) throw UsageError("pool must be >= 1");
  if (targets < 1) throw UsageError("targets must be >= 1");
  try {
    hp.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  return {{"cfg_k", std::to_string(k)},
          {"cfg_alpha", format_real(alpha)},
          {"cfg_beta", format_real(beta)},
          {"cfg_voting", to_string(voting)},
          {"cfg_master_seed", std::to_string(master_seed)},
          {"cfg_init_seed", std::to_string(hp.init_seed)},
          {"cfg_layers", std::to_string(hp.layers)},
          {"cfg_hidden", std::to_string(hp.hidden)},
          {"cfg_epochs", std::to_string(hp.epochs)},
          {"cfg_dataset", dataset}};
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

SbmConfig parse_sbm_spec(const std::string& spec) {
  if (spec.rfind("sbm:", 0) != 0) throw UsageError("not an sbm dataset spec: " + spec);
  SbmConfig cfg;
  std::stringstream ss(spec.substr(4));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("sbm spec entries are key=value: " + item);
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "n") cfg.n = parse_value<std::size_t>(key, value);
    else if (key == "s") cfg.s = parse_value<int>(key, value);
    else if (key == "p_in") cfg.p_in = parse_value<double>(key, value);
    else if (key == "p_out") cfg.p_out = parse_value<double>(key, value);
    else if (key == "d") cfg.d = parse_value<std::size_t>(key, value);
    else if (key == "signal") cfg.signal = parse_value<double>(key, value);
    else if (key == "noise_sd") cfg.noise_sd = parse_value<double>(key, value);
    else if (key == "train_fraction") cfg.train_fraction = parse_value<double>(key, value);
    else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(key, value);
    else throw UsageError("unknown sbm key '" + key + "'");
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

Graph load_dataset(const std::string& dataset) {
  if (dataset.rfind("sbm:", 0) == 0) return generate_sbm(parse_sbm_spec(dataset));
  return load_graph_dir(dataset);
}

Graph reverse_splits(const Graph& g) {
  SplitSets s = g.splits();
  std::swap(s.train, s.test);
  return g.with_splits(std::move(s));
}

std::vector<int> labels_of(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<int> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) out.push_back(g.label(v));
  return out;
}

double evaluate(const EnsembleModel& e, const Graph& g, std::span<const NodeId> nodes, int parallelism) {
  return micro_f1(predict(e, g, nodes, parallelism), labels_of(g, nodes));
}

EnsembleModel train_baseline(const Graph& g, const ExperimentConfig& cfg) {
  EnsembleConfig ec{1, 1.0, 1.0, cfg.master_seed, Voting::soft, WeightSource::training};
  return train_ensemble(g, ec, cfg.hp, cfg.parallelism);
}

EnsembleModel train_configured(const Graph& g, const ExperimentConfig& cfg) {
  EnsembleConfig ec{cfg.k, cfg.alpha, cfg.beta, cfg.master_seed, cfg.voting, WeightSource::training};
  return train_ensemble(g, ec, cfg.hp, cfg.parallelism);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string model_digest(const EnsembleModel& e) {
  std::ostringstream out(std::ios::binary);
  write_ensemble(out, e);
  return sha256_hex(out.str());
}

TrainOutcome run_train(const ExperimentConfig& cfg, const Graph& g) {
  cfg.validate();
  TrainOutcome result;
  result.model = train_configured(g, cfg);
  result.digest = model_digest(result.model);
  result.log = echo_table(cfg, {"model_index", "nodes", "features", "train_f1", "alpha_star", "subspace_seed"});
  for (const auto& m : result.model.models) {
    const Graph sub = induced_subgraph(g, m.spec.node_subset).first;
    add_echo_row(result.log, cfg,
                 {std::to_string(m.spec.model_index), std::to_string(m.spec.node_subset.size()),
                  std::to_string(m.spec.feature_subset.size()), fmt(m.train_f1), fmt(edge_preservation_ratio(g, sub)),
                  std::to_string(m.spec.seed)});
  }
  return result;
}

ReportTable run_sweep(const ExperimentConfig& cfg, const Graph& g) {
  cfg.validate();
  const auto& test = g.splits().test;
  if (test.empty()) throw InvalidArgument("sweep needs a non-empty test split");
  const auto truth = labels_of(g, test);
  ReportTable t = echo_table(cfg, {"model", "k", "alpha", "beta", "test_f1", "hard_f1", "soft_f1", "mean_alpha_star"});

  auto row = [&](const std::string& name, const EnsembleModel& e) {
    const PosteriorStack stack = ensemble_posteriors(e, g, test, cfg.parallelism);
    const double hard = micro_f1(decide_hard(stack), truth);
    const double soft = micro_f1(decide_soft(stack, uniform_weights(e.k())), truth);
    const double chosen = micro_f1(decide(e, stack), truth);
    double alpha_star = 0;
    for (const auto& m : e.models) alpha_star += edge_preservation_ratio(g, induced_subgraph(g, m.spec.node_subset).first);
    alpha_star /= static_cast<double>(e.k());
    add_echo_row(t, cfg, {name, std::to_string(e.k()), format_real(e.alpha), format_real(e.beta), fmt(chosen), fmt(hard),
                          fmt(soft), fmt(alpha_star)});
  };

  row("baseline", train_baseline(g, cfg));
  for (double a : cfg.alpha_list) {
    for (double b : cfg.beta_list) {
      ExperimentConfig cell = cfg;
      cell.alpha = a;
      cell.beta = b;
      row("ensemble", train_configured(g, cell));
    }
  }
  return t;
}

ReportTable sweep_pivot(const ReportTable& sweep) {
  std::vector<std::string> alphas, betas;
  std::map<std::pair<std::string, std::string>, std::string> cell;
  std::string baseline = "-";
  for (std::size_t r = 0; r < sweep.rows.size(); ++r) {
    if (sweep.at(r, "model") == "baseline") {
      baseline = fixed4(sweep.at(r, "test_f1"));
      continue;
    }
    const auto& a = sweep.at(r, "alpha");
    const auto& b = sweep.at(r, "beta");
    if (std::find(alphas.begin(), alphas.end(), a) == alphas.end()) alphas.push_back(a);
    if (std::find(betas.begin(), betas.end(), b) == betas.end()) betas.push_back(b);
    cell[{a, b}] = fixed4(sweep.at(r, "test_f1"));
  }
  ReportTable pivot;
  pivot.columns = {"subgraph %", "baseline (100%)"};
  auto percent = [](const std::string& f) { return std::to_string(std::lround(100 * std::stod(f))); };
  for (const auto& b : betas) pivot.columns.push_back("subfeature " + percent(b) + "%");
  for (const auto& a : alphas) {
    std::vector<std::string> row{percent(a), baseline};
    for (const auto& b : betas) {
      auto it = cell.find({a, b});
      row.push_back(it == cell.end() ? "-" : it->second);
    }
    pivot.add_row(std::move(row));
  }
  return pivot;
}

ReportTable run_overfit(const ExperimentConfig& cfg, const Graph& g_in) {
  cfg.validate();
  const Graph g = cfg.reverse ? reverse_splits(g_in) : g_in;
  const auto& train = g.splits().train;
  const auto& test = g.splits().test;
  if (train.empty() || test.empty()) throw InvalidArgument("overfit needs both train and test splits");
  ReportTable t = echo_table(cfg, {"setup", "hidden", "baseline_train_f1", "baseline_test_f1", "baseline_gap",
                                   "ensemble_train_f1", "ensemble_test_f1", "ensemble_gap"});
  for (int hidden : cfg.hidden_list) {
    ExperimentConfig c = cfg;
    c.hp.hidden = hidden;
    const EnsembleModel base = train_baseline(g, c);
    const EnsembleModel ens = train_configured(g, c);
    const double btr = evaluate(base, g, train, c.parallelism), bte = evaluate(base, g, test, c.parallelism);
    const double etr = evaluate(ens, g, train, c.parallelism), ete = evaluate(ens, g, test, c.parallelism);
    add_echo_row(t, cfg, {cfg.reverse ? "reverse" : "vanilla", std::to_string(hidden), fmt(btr), fmt(bte),
                          fmt(overfit_gap(btr, bte)), fmt(etr), fmt(ete), fmt(overfit_gap(etr, ete))});
  }
  return t;
}

ReportTable run_attack(const ExperimentConfig& cfg, const Graph& g) {
  cfg.validate();
  const auto& test = g.splits().test;
  if (test.empty()) throw InvalidArgument("attack needs a non-empty test split");
  const EnsembleModel base = train_baseline(g, cfg);
  const EnsembleModel ens = train_configured(g, cfg);
  const AttackBudget budget = AttackBudget::resolve(cfg.budget, g.num_edges());
  const std::uint64_t attack_seed = derive_seed(cfg.master_seed, 0xa77ac4ULL);

  auto decider_for = [&](const EnsembleModel& e) -> Decider {
    return [&e, &cfg](const Graph& graph, std::span<const NodeId> nodes) { return predict(e, graph, nodes, cfg.parallelism); };
  };

  ReportTable t = echo_table(cfg, {"attack", "budget", "resolved_edges", "victim", "decider", "eval_nodes", "flips",
                                   "f1_clean", "f1_attacked", "drop"});
  auto add = [&](const std::string& victim, const std::string& name, const EnsembleModel& e, const Graph& attacked,
                 std::span<const NodeId> nodes) {
    const RobustnessResult r = robustness_eval(decider_for(e), g, attacked, nodes, labels_of(g, nodes));
    add_echo_row(t, cfg, {cfg.attack, format_real(cfg.budget), std::to_string(budget.resolved_edges), victim, name,
                          std::to_string(nodes.size()), std::to_string(edge_edit_distance(g, attacked)), fmt(r.f1_clean),
                          fmt(r.f1_attacked), fmt(r.drop)});
  };

  if (cfg.attack == "random") {
    const Graph attacked = random_flip_attack(g, budget, attack_seed);
    add("none", "baseline", base, attacked, test);
    add("none", "ensemble", ens, attacked, test);
    return t;
  }

  std::vector<NodeId> targets = test;
  std::mt19937_64 rng(attack_seed);
  std::shuffle(targets.begin(), targets.end(), rng);
  targets.resize(std::min(cfg.targets, targets.size()));
  std::sort(targets.begin(), targets.end());

  GreedyOptions options;
  options.candidate_pool_size = cfg.pool;
  options.parallelism = cfg.parallelism;
  auto attack_against = [&](const EnsembleModel& e) {
    auto victim = ensemble_flip_scorer(e, targets);
    return greedy_confidence_attack(g, *victim, targets, budget, options, attack_seed);
  };

  if (cfg.victim == "each") {
    add("baseline", "baseline", base, attack_against(base), targets);
    add("ensemble", "ensemble", ens, attack_against(ens), targets);
  } else {
    const Graph attacked = attack_against(cfg.victim == "baseline" ? base : ens);
    add(cfg.victim, "baseline", base, attacked, targets);
    add(cfg.victim, "ensemble", ens, attacked, targets);
  }
  return t;
}

ReportTable run_report(const ExperimentConfig& cfg, const Graph& g, const EnsembleModel& e) {
  const auto& test = g.splits().test;
  if (test.empty()) throw InvalidArgument("report needs a non-empty test split");
  const auto truth = labels_of(g, test);
  const PosteriorStack stack = ensemble_posteriors(e, g, test, cfg.parallelism);
  std::vector<double> acc;
  for (const auto& m : e.models) acc.push_back(m.train_f1);

  ReportTable t = echo_table(cfg, {"model_k", "model_alpha", "model_beta", "model_master_seed", "voting", "test_f1"});
  auto add = [&](const std::string& rule, const std::vector<int>& pred) {
    add_echo_row(t, cfg, {std::to_string(e.k()), format_real(e.alpha), format_real(e.beta), std::to_string(e.master_seed),
                          rule, fmt(micro_f1(pred, truth))});
  };
  add("hard", decide_hard(stack));
  add("soft", decide_soft(stack, uniform_weights(e.k())));
  bool any_positive = std::any_of(acc.begin(), acc.end(), [](double a) { return a > 0; });
  if (any_positive) add("weighted", decide_weighted(stack, acc));
  return t;
}

}  // namespace graph_forest
