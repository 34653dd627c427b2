#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patchy/error.hpp"
#include "patchy/graph.hpp"

namespace patchy {

/// How the attribute channels of a bundle were formed: one-hot blocks for
/// the discrete labels (in the sorted order of their original values)
/// followed by any continuous attributes.
struct AttributeInfo {
  std::vector<long long> node_label_values;
  std::vector<long long> edge_label_values;
  std::size_t node_continuous = 0;
  std::size_t edge_continuous = 0;

  std::size_t node_channels() const noexcept { return node_label_values.size() + node_continuous; }
  std::size_t edge_channels() const noexcept { return edge_label_values.size() + edge_continuous; }
};

struct DatasetBundle {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> class_labels;         // contiguous 0..C-1
  std::vector<long long> class_values;   // original value of class c
  AttributeInfo attributes;

  std::size_t class_count() const noexcept { return class_values.size(); }

  double mean_node_count() const {
    if (graphs.empty()) return 0;
    double s = 0;
    for (const auto& g : graphs) s += static_cast<double>(g.node_count());
    return s / static_cast<double>(graphs.size());
  }

  std::size_t max_node_count() const {
    std::size_t m = 0;
    for (const auto& g : graphs) m = std::max(m, g.node_count());
    return m;
  }
};

namespace detail {

struct TextTable {
  std::filesystem::path path;
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
  std::string storage;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Reads a comma- or whitespace-separated file; blank lines are skipped.
inline TextTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::missing_file, path.string());
  TextTable t;
  t.path = path;
  t.storage.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  std::string_view all(t.storage);
  std::size_t line_no = 0;
  while (!all.empty()) {
    auto nl = all.find('\n');
    auto line = all.substr(0, nl);
    all.remove_prefix(nl == std::string_view::npos ? all.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto next = line.find_first_of(", \t", pos);
      auto tok = line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
      if (!trim(tok).empty()) fields.push_back(trim(tok));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  return t;
}

[[noreturn]] inline void malformed(const TextTable& t, std::size_t row, const std::string& why) {
  throw error(errc::malformed_line, t.path.string() + ":" + std::to_string(t.line_numbers[row]) +
                                        ": " + why);
}

inline long long parse_int(const TextTable& t, std::size_t row, std::string_view tok) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    malformed(t, row, "expected integer, got '" + std::string(tok) + "'");
  return v;
}

inline double parse_real(const TextTable& t, std::size_t row, std::string_view tok) {
  try {
    std::size_t used = 0;
    std::string s(tok);
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    malformed(t, row, "expected real, got '" + std::string(tok) + "'");
  }
}

inline std::vector<long long> read_column(const std::filesystem::path& path) {
  auto t = read_table(path);
  std::vector<long long> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != 1) malformed(t, r, "expected a single value");
    out.push_back(parse_int(t, r, t.rows[r][0]));
  }
  return out;
}

inline std::vector<std::vector<double>> read_real_rows(const std::filesystem::path& path) {
  auto t = read_table(path);
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<double> row;
    for (auto tok : t.rows[r]) row.push_back(parse_real(t, r, tok));
    if (!out.empty() && row.size() != out.front().size())
      malformed(t, r, "attribute row length differs from the first row");
    out.push_back(std::move(row));
  }
  return out;
}

inline std::vector<long long> sorted_distinct(std::vector<long long> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::size_t index_of(const std::vector<long long>& sorted, long long x) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
}

}  // namespace detail

/// Loads a dataset in the TU benchmark layout from `directory`:
/// `{name}_A.txt` (1-based "row, col" node pairs), `{name}_graph_indicator.txt`,
/// `{name}_graph_labels.txt`, and optionally `{name}_node_labels.txt`,
/// `{name}_edge_labels.txt`, `{name}_node_attributes.txt`,
/// `{name}_edge_attributes.txt`.
inline DatasetBundle load_tu_dataset(const std::filesystem::path& directory, const std::string& name) {
  namespace fs = std::filesystem;
  auto file = [&](const char* suffix) { return directory / (name + "_" + suffix + ".txt"); };
  if (!fs::is_directory(directory)) throw error(errc::missing_file, directory.string());

  auto indicator = detail::read_column(file("graph_indicator"));
  auto graph_values = detail::read_column(file("graph_labels"));
  auto edges_table = detail::read_table(file("A"));

  std::optional<std::vector<long long>> node_labels, edge_labels;
  std::optional<std::vector<std::vector<double>>> node_attrs, edge_attrs;
  if (fs::exists(file("node_labels"))) node_labels = detail::read_column(file("node_labels"));
  if (fs::exists(file("edge_labels"))) edge_labels = detail::read_column(file("edge_labels"));
  if (fs::exists(file("node_attributes"))) node_attrs = detail::read_real_rows(file("node_attributes"));
  if (fs::exists(file("edge_attributes"))) edge_attrs = detail::read_real_rows(file("edge_attributes"));

  const auto n_total = indicator.size();
  const auto n_graphs = graph_values.size();
  if (node_labels && node_labels->size() != n_total)
    throw error(errc::inconsistent_indicator, "node label count differs from indicator length");
  if (node_attrs && node_attrs->size() != n_total)
    throw error(errc::inconsistent_indicator, "node attribute count differs from indicator length");
  if (edge_labels && edge_labels->size() != edges_table.rows.size())
    throw error(errc::inconsistent_indicator, "edge label count differs from edge count");
  if (edge_attrs && edge_attrs->size() != edges_table.rows.size())
    throw error(errc::inconsistent_indicator, "edge attribute count differs from edge count");

  // graph g owns nodes [first[g], first[g+1]) in global 0-based numbering
  std::vector<std::size_t> first(n_graphs + 1, 0);
  {
    std::vector<std::size_t> count(n_graphs, 0);
    long long prev = 1;
    for (std::size_t i = 0; i < n_total; ++i) {
      auto gid = indicator[i];
      if (gid < 1 || static_cast<std::size_t>(gid) > n_graphs)
        throw error(errc::inconsistent_indicator, "node " + std::to_string(i + 1) +
                                                      " assigned to graph " + std::to_string(gid) +
                                                      " of " + std::to_string(n_graphs));
      if (gid < prev)
        throw error(errc::inconsistent_indicator,
                    "graph indicator not grouped at node " + std::to_string(i + 1));
      prev = gid;
      ++count[static_cast<std::size_t>(gid - 1)];
    }
    for (std::size_t g = 0; g < n_graphs; ++g) first[g + 1] = first[g] + count[g];
  }

  DatasetBundle b;
  b.name = name;
  if (node_labels) b.attributes.node_label_values = detail::sorted_distinct(*node_labels);
  if (edge_labels) b.attributes.edge_label_values = detail::sorted_distinct(*edge_labels);
  if (node_attrs && !node_attrs->empty()) b.attributes.node_continuous = node_attrs->front().size();
  if (edge_attrs && !edge_attrs->empty()) b.attributes.edge_continuous = edge_attrs->front().size();
  const auto a_v = b.attributes.node_channels();
  const auto a_e = b.attributes.edge_channels();

  std::vector<std::vector<Edge>> edges(n_graphs);
  std::vector<std::vector<double>> eattr(n_graphs);
  for (std::size_t r = 0; r < edges_table.rows.size(); ++r) {
    const auto& row = edges_table.rows[r];
    if (row.size() != 2) detail::malformed(edges_table, r, "expected 'row, col'");
    auto u = detail::parse_int(edges_table, r, row[0]);
    auto v = detail::parse_int(edges_table, r, row[1]);
    if (u < 1 || v < 1 || static_cast<std::size_t>(u) > n_total || static_cast<std::size_t>(v) > n_total)
      detail::malformed(edges_table, r, "node id out of range");
    auto gu = indicator[static_cast<std::size_t>(u - 1)];
    auto gv = indicator[static_cast<std::size_t>(v - 1)];
    if (gu != gv)
      throw error(errc::inconsistent_indicator, "edge on line " +
                                                    std::to_string(edges_table.line_numbers[r]) +
                                                    " joins graphs " + std::to_string(gu) + " and " +
                                                    std::to_string(gv));
    if (u == v) continue;  // self-loops are not representable
    const auto g = static_cast<std::size_t>(gu - 1);
    const auto base = first[g];
    edges[g].push_back({static_cast<NodeId>(static_cast<std::size_t>(u - 1) - base),
                        static_cast<NodeId>(static_cast<std::size_t>(v - 1) - base)});
    std::vector<double> ea(a_e, 0.0);
    if (edge_labels)
      ea[detail::index_of(b.attributes.edge_label_values, (*edge_labels)[r])] = 1.0;
    if (edge_attrs) {
      const auto& src = (*edge_attrs)[r];
      std::copy(src.begin(), src.end(), ea.begin() + static_cast<std::ptrdiff_t>(b.attributes.edge_label_values.size()));
    }
    eattr[g].insert(eattr[g].end(), ea.begin(), ea.end());
  }

  auto class_values = detail::sorted_distinct(graph_values);
  b.class_values = class_values;
  b.graphs.reserve(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) {
    const auto n = first[g + 1] - first[g];
    std::vector<double> nattr(n * a_v, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto gi = first[g] + i;
      if (node_labels)
        nattr[i * a_v + detail::index_of(b.attributes.node_label_values, (*node_labels)[gi])] = 1.0;
      if (node_attrs) {
        const auto& src = (*node_attrs)[gi];
        std::copy(src.begin(), src.end(),
                  nattr.begin() + static_cast<std::ptrdiff_t>(i * a_v + b.attributes.node_label_values.size()));
      }
    }
    b.graphs.push_back(build_graph_flat(n, edges[g], a_v, std::move(nattr), a_e, std::move(eattr[g])));
    b.class_labels.push_back(static_cast<int>(detail::index_of(class_values, graph_values[g])));
  }
  return b;
}

/// Original discrete node labels of graph `i`, recovered from the one-hot
/// channels.
inline std::vector<long long> decode_node_labels(const DatasetBundle& b, std::size_t i) {
  const auto& g = b.graphs.at(i);
  const auto& values = b.attributes.node_label_values;
  std::vector<long long> out;
  if (values.empty()) return out;
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    auto row = g.node_attributes(static_cast<NodeId>(v));
    auto hot = std::max_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(values.size()));
    out.push_back(values[static_cast<std::size_t>(hot - row.begin())]);
  }
  return out;
}

/// Two-column edge list ("u v" or "u,v"; lines starting with '#' or '%' are
/// comments). Ids may be sparse and are re-indexed densely in ascending
/// order.
inline Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream probe(path);
  if (!probe) throw error(errc::missing_file, path.string());
  probe.close();
  auto t = detail::read_table(path);
  std::vector<std::pair<long long, long long>> raw;
  std::vector<long long> ids;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (!row.empty() && (row[0].front() == '#' || row[0].front() == '%')) continue;
    if (row.size() < 2) detail::malformed(t, r, "expected two node ids");
    auto u = detail::parse_int(t, r, row[0]);
    auto v = detail::parse_int(t, r, row[1]);
    raw.push_back({u, v});
    ids.push_back(u);
    ids.push_back(v);
  }
  ids = detail::sorted_distinct(std::move(ids));
  std::vector<Edge> edges;
  for (auto [u, v] : raw) {
    if (u == v) continue;
    edges.push_back({static_cast<NodeId>(detail::index_of(ids, u)),
                     static_cast<NodeId>(detail::index_of(ids, v))});
  }
  return build_graph_flat(ids.size(), edges, 0, {}, 0, {});
}

}  // namespace patchy
