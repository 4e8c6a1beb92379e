#include "graph_forest/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fs_util.hpp"

namespace graph_forest {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

struct NodeValueRow {
  std::size_t line;
  std::uint64_t node;
  std::string value;
};

// Reads "node,value" CSV rows; a first line whose node field is not numeric is a header.
std::vector<NodeValueRow> read_node_value_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<NodeValueRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split(view, ',');
    if (fields.size() != 2) throw ParseError(path.string(), lineno, "expected 2 fields");
    std::uint64_t node = 0;
    if (!parse_number(fields[0], node)) {
      if (rows.empty() && lineno == 1) continue;
      throw ParseError(path.string(), lineno, "bad node id '" + std::string(fields[0]) + "'");
    }
    rows.push_back({lineno, node, std::string(fields[1])});
  }
  return rows;
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void SbmConfig::validate() const {
  if (s < 2) throw InvalidArgument("sbm: need at least 2 classes");
  if (n < static_cast<std::size_t>(s)) throw InvalidArgument("sbm: n must be >= s");
  if (!(p_in >= 0 && p_in <= 1) || !(p_out >= 0 && p_out <= 1)) {
    throw InvalidArgument("sbm: probabilities must lie in [0, 1]");
  }
  if (d < 1) throw InvalidArgument("sbm: feature dim must be >= 1");
  if (!(signal >= 0)) throw InvalidArgument("sbm: signal must be >= 0");
  if (!(noise_sd > 0)) throw InvalidArgument("sbm: noise_sd must be > 0");
  if (!(train_fraction > 0 && train_fraction < 1)) throw InvalidArgument("sbm: train_fraction must be in (0, 1)");
}

int sbm_block(std::size_t i, std::size_t n, int s) {
  return static_cast<int>(i * static_cast<std::size_t>(s) / n);
}

Graph generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.n;

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = sbm_block(i, n, cfg.s);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? cfg.p_in : cfg.p_out;
      if (unit(rng) < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  }

  // Class c shifts feature column c mod d by `signal`.
  Matrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.d));
  std::normal_distribution<double> noise(0.0, cfg.noise_sd);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hot = static_cast<std::size_t>(labels[i]) % cfg.d;
    for (std::size_t j = 0; j < cfg.d; ++j) {
      const double mean = j == hot ? cfg.signal : 0.0;
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mean + noise(rng);
    }
  }

  SplitSets splits;
  for (int c = 0; c < cfg.s; ++c) {
    std::vector<NodeId> members;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == c) members.push_back(static_cast<NodeId>(i));
    std::shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(members.size())));
    take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    splits.train.insert(splits.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    splits.test.insert(splits.test.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  return build_graph(edges, std::move(features), std::move(labels), std::move(splits), cfg.s);
}

Graph load_graph(const fs::path& edge_path, const fs::path& feature_path, const fs::path& label_path,
                 const fs::path& split_path) {
  std::vector<std::vector<double>> rows;
  {
    std::ifstream in = open_in(feature_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view view = trim(line);
      if (view.empty()) continue;
      std::vector<double> row;
      for (std::string_view field : split(view, ',')) {
        double x = 0;
        if (!parse_number(field, x)) {
          throw ParseError(feature_path.string(), lineno, "bad real '" + std::string(field) + "'");
        }
        row.push_back(x);
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw ParseError(feature_path.string(), lineno,
                         "expected " + std::to_string(rows.front().size()) + " columns, got " +
                             std::to_string(row.size()));
      }
      rows.push_back(std::move(row));
    }
  }
  const std::size_t n = rows.size();
  const std::size_t d = n == 0 ? 0 : rows.front().size();
  Matrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  std::vector<Edge> edges;
  {
    std::ifstream in = open_in(edge_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view view = line;
      if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
      view = trim(view);
      if (view.empty()) continue;
      auto fields = split(view, '\t');
      if (fields.size() != 2) throw ParseError(edge_path.string(), lineno, "expected 'u<TAB>v'");
      std::uint64_t u = 0, v = 0;
      if (!parse_number(fields[0], u) || !parse_number(fields[1], v)) {
        throw ParseError(edge_path.string(), lineno, "bad node id");
      }
      if (u >= n || v >= n) {
        throw ParseError(edge_path.string(), lineno,
                         "node id " + std::to_string(std::max(u, v)) + " out of range for " +
                             std::to_string(n) + " feature rows");
      }
      edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }

  std::vector<int> labels;
  if (!label_path.empty()) {
    labels.assign(n, kNoLabel);
    for (const auto& row : read_node_value_csv(label_path)) {
      if (row.node >= n) throw ParseError(label_path.string(), row.line, "unknown node id " + std::to_string(row.node));
      int y = 0;
      if (!parse_number(std::string_view(row.value), y) || y < 0) {
        throw ParseError(label_path.string(), row.line, "bad label '" + row.value + "'");
      }
      labels[row.node] = y;
    }
  }

  SplitSets splits;
  if (!split_path.empty()) {
    for (const auto& row : read_node_value_csv(split_path)) {
      if (row.node >= n) throw ParseError(split_path.string(), row.line, "unknown node id " + std::to_string(row.node));
      const auto v = static_cast<NodeId>(row.node);
      if (row.value == "train") splits.train.push_back(v);
      else if (row.value == "val") splits.val.push_back(v);
      else if (row.value == "test") splits.test.push_back(v);
      else throw ParseError(split_path.string(), row.line, "unknown split '" + row.value + "'");
    }
  }
  return build_graph(edges, std::move(features), std::move(labels), std::move(splits));
}

Graph load_graph_dir(const fs::path& dir) {
  auto optional = [&](const char* name) { return fs::exists(dir / name) ? dir / name : fs::path(); };
  return load_graph(dir / "edges.tsv", dir / "features.csv", optional("labels.csv"), optional("splits.csv"));
}

void save_graph_dir(const Graph& g, const fs::path& dir) {
  detail::make_dirs(dir);
  {
    std::ofstream out = open_out(dir / "edges.tsv");
    for (const Edge& e : g.edge_list()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out = open_out(dir / "features.csv");
    const Matrix& f = g.features();
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        if (j) out << ',';
        out << format_real(f(i, j));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "labels.csv");
    out << "node,label\n";
    for (std::size_t v = 0; v < g.labels().size(); ++v)
      if (g.labels()[v] != kNoLabel) out << v << ',' << g.labels()[v] << '\n';
  }
  {
    std::ofstream out = open_out(dir / "splits.csv");
    out << "node,split\n";
    for (NodeId v : g.splits().train) out << v << ",train\n";
    for (NodeId v : g.splits().val) out << v << ",val\n";
    for (NodeId v : g.splits().test) out << v << ",test\n";
  }
}

void ReportTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw InvalidArgument("report row has " + std::to_string(row.size()) + " cells, schema has " +
                          std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

const std::string& ReportTable::at(std::size_t row, const std::string& column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw InvalidArgument("report has no column '" + column + "'");
  return rows.at(row).at(static_cast<std::size_t>(it - columns.begin()));
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << csv_cell(cells[i]);
  }
  out << '\n';
}

std::vector<std::string> parse_csv_line(const std::string& line, const std::string& file, std::size_t lineno) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw ParseError(file, lineno, "unterminated quote");
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace

void save_report(const ReportTable& table, const fs::path& path, ReportFormat format) {
  detail::make_dirs(path.parent_path());
  std::ofstream out = open_out(path);
  if (format == ReportFormat::csv) {
    write_csv_line(out, table.columns);
    for (const auto& row : table.rows) write_csv_line(out, row);
  } else {
    auto line = [&](const std::vector<std::string>& cells) {
      out << '|';
      for (const auto& c : cells) out << ' ' << c << " |";
      out << '\n';
    };
    line(table.columns);
    out << '|';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& row : table.rows) line(row);
  }
  if (!out) throw Error("failed writing " + path.string());
}

ReportTable load_report_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  ReportTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      table.columns = parse_csv_line(line, path.string(), lineno);
      continue;
    }
    if (line.empty()) continue;
    auto cells = parse_csv_line(line, path.string(), lineno);
    if (cells.size() != table.columns.size()) throw ParseError(path.string(), lineno, "cell count differs from header");
    table.rows.push_back(std::move(cells));
  }
  if (lineno == 0) throw ParseError(path.string(), 1, "missing header");
  return table;
}

}  // namespace graph_forest
