// graph_forest: train, sweep, overfit, attack and report for subspace GNN ensembles.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "graph_forest/experiment.hpp"

namespace fs = std::filesystem;
using namespace graph_forest;

namespace {

struct Overrides {
  std::string config;
  std::vector<std::string> settings;  // key=value
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<std::string> out;
  std::optional<std::string> dataset;
  std::optional<std::size_t> k;
  std::optional<double> alpha, beta, budget;
  std::optional<std::string> voting, attack, victim;
  std::optional<int> hidden, epochs, layers;
  std::optional<std::string> alphas, betas, hiddens;
  bool reverse = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key=value config file");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--parallelism", o.parallelism, "worker threads (GRAPH_FOREST_THREADS overrides)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--dataset", o.dataset, "sbm:key=value,... or a dataset directory");
  cmd->add_option("--k", o.k, "base models");
  cmd->add_option("--alpha", o.alpha, "node sampling fraction");
  cmd->add_option("--beta", o.beta, "feature sampling fraction");
  cmd->add_option("--voting", o.voting, "hard|soft|weighted");
  cmd->add_option("--hidden", o.hidden, "hidden width");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--layers", o.layers, "message-passing layers");
  cmd->add_option("--set", o.settings, "extra key=value setting (repeatable)");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = load_config_file(o.config);
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.parallelism) cfg.parallelism = *o.parallelism;
  if (o.out) cfg.output_dir = *o.out;
  if (o.dataset) cfg.dataset = *o.dataset;
  if (o.k) cfg.k = *o.k;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.beta) cfg.beta = *o.beta;
  if (o.voting) cfg.set("voting", *o.voting);
  if (o.hidden) cfg.hp.hidden = *o.hidden;
  if (o.epochs) cfg.hp.epochs = *o.epochs;
  if (o.layers) cfg.hp.layers = *o.layers;
  if (o.alphas) cfg.set("alpha_list", *o.alphas);
  if (o.betas) cfg.set("beta_list", *o.betas);
  if (o.hiddens) cfg.set("hidden_list", *o.hiddens);
  if (o.budget) cfg.budget = *o.budget;
  if (o.attack) cfg.attack = *o.attack;
  if (o.victim) cfg.victim = *o.victim;
  if (o.reverse) cfg.reverse = true;
  if (const char* env = std::getenv("GRAPH_FOREST_THREADS")) cfg.set("parallelism", env);
  cfg.validate();
  return cfg;
}

void write_both(const ReportTable& t, const fs::path& dir, const std::string& stem) {
  save_report(t, dir / (stem + ".csv"), ReportFormat::csv);
  save_report(t, dir / (stem + ".md"), ReportFormat::markdown);
  std::cout << "wrote " << (dir / (stem + ".csv")).string() << " and .md\n";
}

void print(const ReportTable& t, std::size_t columns) {
  for (std::size_t c = 0; c < columns && c < t.columns.size(); ++c) std::cout << (c ? "\t" : "") << t.columns[c];
  std::cout << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < columns && c < row.size(); ++c) std::cout << (c ? "\t" : "") << row[c];
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace-sampled GNN ensembles for node classification"};
  app.require_subcommand(1);
  Overrides o;
  std::string model_path;

  auto* train = app.add_subcommand("train", "train an ensemble and write model + log");
  add_common(train, o);
  auto* sweep = app.add_subcommand("sweep", "micro-F1 over an alpha x beta grid");
  add_common(sweep, o);
  sweep->add_option("--alphas", o.alphas, "comma-separated alpha values");
  sweep->add_option("--betas", o.betas, "comma-separated beta values");
  auto* overfit = app.add_subcommand("overfit", "train/test gap for baseline and ensemble");
  add_common(overfit, o);
  overfit->add_flag("--reverse", o.reverse, "swap train and test splits");
  overfit->add_option("--hidden-list", o.hiddens, "comma-separated hidden widths");
  auto* attack = app.add_subcommand("attack", "robustness under edge-flip attacks");
  add_common(attack, o);
  attack->add_option("--attack", o.attack, "random|greedy");
  attack->add_option("--budget", o.budget, "edge budget fraction (default 0.1)");
  attack->add_option("--victim", o.victim, "greedy victim: each|baseline|ensemble");
  auto* report = app.add_subcommand("report", "evaluate a saved ensemble under every voting rule");
  add_common(report, o);
  report->add_option("--model", model_path, "model file written by train")->required();
  auto* generate = app.add_subcommand("generate", "write a synthetic SBM dataset directory");
  add_common(generate, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const ExperimentConfig cfg = resolve(o);
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    if (*generate) {
      save_graph_dir(generate_sbm(parse_sbm_spec(cfg.dataset)), out);
      std::cout << "wrote dataset to " << out.string() << '\n';
      return 0;
    }
    const Graph g = load_dataset(cfg.dataset);
    std::cout << "graph: n=" << g.num_nodes() << " m=" << g.num_edges() << " d=" << g.feature_dim()
              << " classes=" << g.num_classes() << " train=" << g.splits().train.size()
              << " test=" << g.splits().test.size() << '\n';

    if (*train) {
      TrainOutcome r = run_train(cfg, g);
      save_ensemble(r.model, out / "ensemble.gfm");
      write_both(r.log, out, "train_log");
      print(r.log, 5);
      std::cout << "model digest sha256:" << r.digest << '\n';
    } else if (*sweep) {
      const ReportTable t = run_sweep(cfg, g);
      write_both(t, out, "sweep");
      save_report(sweep_pivot(t), out / "sweep_table.md", ReportFormat::markdown);
      print(t, 8);
    } else if (*overfit) {
      const ReportTable t = run_overfit(cfg, g);
      write_both(t, out, "overfit");
      print(t, 8);
    } else if (*attack) {
      const ReportTable t = run_attack(cfg, g);
      write_both(t, out, "attack");
      print(t, 10);
    } else if (*report) {
      const ReportTable t = run_report(cfg, g, load_ensemble(model_path));
      write_both(t, out, "report");
      print(t, 6);
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
