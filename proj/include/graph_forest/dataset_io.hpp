#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "graph_forest/graph.hpp"

namespace graph_forest {

struct SbmConfig {
  std::size_t n = 600;
  int s = 3;
  double p_in = 0.1;
  double p_out = 0.01;
  std::size_t d = 60;
  double signal = 0.6;
  double noise_sd = 1.0;
  double train_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reads the four-file text format:
///   edges     "u<TAB>v" per line, '#' starts a comment
///   features  CSV, row i = node i
///   labels    CSV "node,label" (optional header)
///   splits    CSV "node,split" with split in {train,val,test} (optional header)
/// An empty label or split path means the graph has none.
Graph load_graph(const std::filesystem::path& edge_path, const std::filesystem::path& feature_path,
                 const std::filesystem::path& label_path, const std::filesystem::path& split_path);

/// Loads edges.tsv, features.csv, labels.csv, splits.csv from one directory.
Graph load_graph_dir(const std::filesystem::path& dir);

/// Writes the four files into `dir` (created if missing). Reals use the shortest
/// representation that round-trips, so load_graph_dir(save) == original.
void save_graph_dir(const Graph& g, const std::filesystem::path& dir);

/// Stochastic block model with class-block feature means and a stratified
/// train/test split. Deterministic in cfg.seed.
Graph generate_sbm(const SbmConfig& cfg);

/// Block (= class) of node i: contiguous near-equal blocks.
int sbm_block(std::size_t i, std::size_t n, int s);

/// Tabular experiment output: every row has one string cell per column.
struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// Cell lookup by column name; throws when the column is missing.
  const std::string& at(std::size_t row, const std::string& column) const;
  friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

enum class ReportFormat { csv, markdown };

void save_report(const ReportTable& table, const std::filesystem::path& path, ReportFormat format);
ReportTable load_report_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal text for a double.
std::string format_real(double x);

}  // namespace graph_forest
