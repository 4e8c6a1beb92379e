#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "graph_forest/dataset_io.hpp"
#include "graph_forest/ensemble.hpp"

namespace graph_forest {

/// Bad command line or configuration value (exit code 1 in the CLI).
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct ExperimentConfig {
  /// "sbm:key=value,..." for a generated graph, otherwise a directory holding
  /// edges.tsv, features.csv, labels.csv and splits.csv.
  std::string dataset = "sbm:";
  std::size_t k = 25;
  double alpha = 0.7;
  double beta = 0.5;
  Voting voting = Voting::soft;
  HyperParams hp;
  std::uint64_t master_seed = 1;
  int parallelism = 1;
  std::string output_dir = "out";

  std::vector<double> alpha_list{0.3, 0.7, 1.0};
  std::vector<double> beta_list{0.1, 0.3, 0.5, 0.7, 1.0};

  bool reverse = false;
  std::vector<int> hidden_list{256, 2048};

  std::string attack = "random";  // random | greedy
  double budget = 0.1;
  std::size_t pool = 32;
  std::size_t targets = 30;
  std::string victim = "each";  // each | baseline | ensemble

  /// Applies one key=value setting; throws UsageError on an unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  /// (key, value) pairs echoed into every report for provenance.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Reads a flat key=value file ('#' comments, blank lines ignored) on top of `base`.
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

SbmConfig parse_sbm_spec(const std::string& spec);
Graph load_dataset(const std::string& dataset);

/// Train and test split swapped.
Graph reverse_splits(const Graph& g);

/// Micro-F1 of the ensemble's decisions on `nodes`.
double evaluate(const EnsembleModel& e, const Graph& g, std::span<const NodeId> nodes, int parallelism = 1);
std::vector<int> labels_of(const Graph& g, std::span<const NodeId> nodes);

/// k = 1, alpha = beta = 1 model on the full graph.
EnsembleModel train_baseline(const Graph& g, const ExperimentConfig& cfg);
EnsembleModel train_configured(const Graph& g, const ExperimentConfig& cfg);

std::string sha256_hex(const std::string& bytes);
std::string model_digest(const EnsembleModel& e);

struct TrainOutcome {
  EnsembleModel model;
  std::string digest;
  ReportTable log;  // one row per base model: train F1 and edge preservation ratio
};

TrainOutcome run_train(const ExperimentConfig& cfg, const Graph& g);
/// Baseline row, then one row per (alpha, beta).
ReportTable run_sweep(const ExperimentConfig& cfg, const Graph& g);
/// Alpha rows by beta columns, baseline first, from a run_sweep table.
ReportTable sweep_pivot(const ReportTable& sweep);
/// Per hidden width: train/test F1 and gap for baseline and ensemble.
ReportTable run_overfit(const ExperimentConfig& cfg, const Graph& g);
/// Clean/attacked F1 and drop for baseline and ensemble.
ReportTable run_attack(const ExperimentConfig& cfg, const Graph& g);
/// Test F1 of a trained ensemble under every voting rule.
ReportTable run_report(const ExperimentConfig& cfg, const Graph& g, const EnsembleModel& e);

}  // namespace graph_forest
