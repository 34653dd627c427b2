#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "patchy/error.hpp"

namespace patchy {

using NodeId = std::int32_t;

struct Edge {
  NodeId u;
  NodeId v;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Square 0/1 matrix, stored row-major. Symmetric with a zero diagonal when
/// built from an undirected graph.
struct AdjacencyMatrix {
  std::size_t order = 0;
  std::vector<std::uint8_t> bits;

  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t k) : order(k), bits(k * k, 0) {}

  std::uint8_t operator()(std::size_t i, std::size_t j) const { return bits[i * order + j]; }
  std::uint8_t& operator()(std::size_t i, std::size_t j) { return bits[i * order + j]; }

  /// Row-major reading, e.g. "011100100" for a path centered at position 0.
  std::string bit_string() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;
};

class Graph;

Graph build_graph_flat(std::size_t node_count, std::span<const Edge> edges,
                       std::size_t node_channels, std::vector<double> node_attrs,
                       std::size_t edge_channels, std::vector<double> edge_attrs);

/// Immutable undirected attributed graph. Construct through `build_graph`.
///
/// Node ids are dense `0..n-1`. Edges are stored once with `u < v`, sorted,
/// and every neighbor list is sorted ascending. Node attributes form an
/// `n x node_channels()` row-major block; edge attributes an
/// `m x edge_channels()` block aligned with `edges()`.
class Graph {
 public:
  Graph() = default;

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t node_channels() const noexcept { return node_channels_; }
  std::size_t edge_channels() const noexcept { return edge_channels_; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    check(v);
    auto b = offsets_[static_cast<std::size_t>(v)];
    auto e = offsets_[static_cast<std::size_t>(v) + 1];
    return {adjacency_.data() + b, e - b};
  }

  std::size_t degree(NodeId v) const { return neighbors(v).size(); }

  std::span<const double> node_attributes(NodeId v) const {
    check(v);
    return {node_attrs_.data() + static_cast<std::size_t>(v) * node_channels_, node_channels_};
  }

  std::span<const double> edge_attributes(std::size_t edge_index) const {
    return {edge_attrs_.data() + edge_index * edge_channels_, edge_channels_};
  }

  const std::vector<double>& node_attribute_block() const noexcept { return node_attrs_; }
  const std::vector<double>& edge_attribute_block() const noexcept { return edge_attrs_; }

  /// Index into `edges()` of the edge {u, v}, if present.
  std::optional<std::size_t> edge_index(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return std::nullopt;
    auto pos = static_cast<std::size_t>(it - nb.begin()) + offsets_[static_cast<std::size_t>(u)];
    return edge_of_slot_[pos];
  }

  bool adjacent(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  bool contains(NodeId v) const noexcept {
    return v >= 0 && static_cast<std::size_t>(v) < node_count_;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.node_channels_ == b.node_channels_ &&
           a.edge_channels_ == b.edge_channels_ && a.edges_ == b.edges_ &&
           a.node_attrs_ == b.node_attrs_ && a.edge_attrs_ == b.edge_attrs_;
  }

 private:
  friend Graph build_graph_flat(std::size_t, std::span<const Edge>, std::size_t,
                                std::vector<double>, std::size_t, std::vector<double>);

  void check(NodeId v) const {
    if (!contains(v))
      throw error(errc::index_out_of_range,
                  "node " + std::to_string(v) + " not in graph of " + std::to_string(node_count_));
  }

  std::size_t node_count_ = 0;
  std::size_t node_channels_ = 0;
  std::size_t edge_channels_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<std::size_t> edge_of_slot_;
  std::vector<double> node_attrs_;
  std::vector<double> edge_attrs_;
};

/// Flat-array constructor. `edges` may contain duplicates in either
/// orientation; the first occurrence keeps its attributes.
inline Graph build_graph_flat(std::size_t node_count, std::span<const Edge> edges,
                              std::size_t node_channels, std::vector<double> node_attrs,
                              std::size_t edge_channels, std::vector<double> edge_attrs) {
  if (node_attrs.size() != node_count * node_channels)
    throw error(errc::attribute_shape_mismatch, "node attribute block has " +
                                                    std::to_string(node_attrs.size()) +
                                                    " values, expected " +
                                                    std::to_string(node_count * node_channels));
  if (edge_attrs.size() != edges.size() * edge_channels)
    throw error(errc::attribute_shape_mismatch, "edge attribute block has " +
                                                    std::to_string(edge_attrs.size()) +
                                                    " values, expected " +
                                                    std::to_string(edges.size() * edge_channels));

  // (normalized edge, original position) so that dedup keeps the first one
  std::vector<std::pair<Edge, std::size_t>> norm;
  norm.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= node_count ||
        static_cast<std::size_t>(v) >= node_count)
      throw error(errc::index_out_of_range, "edge (" + std::to_string(u) + "," +
                                                std::to_string(v) + ") outside 0.." +
                                                std::to_string(node_count));
    if (u == v) throw error(errc::self_loop, "self-loop on node " + std::to_string(u));
    if (u > v) std::swap(u, v);
    norm.push_back({Edge{u, v}, i});
  }
  std::sort(norm.begin(), norm.end());
  norm.erase(std::unique(norm.begin(), norm.end(),
                         [](const auto& a, const auto& b) { return a.first == b.first; }),
             norm.end());

  Graph g;
  g.node_count_ = node_count;
  g.node_channels_ = node_channels;
  g.edge_channels_ = edge_channels;
  g.node_attrs_ = std::move(node_attrs);
  g.edges_.reserve(norm.size());
  g.edge_attrs_.reserve(norm.size() * edge_channels);
  for (const auto& [e, src] : norm) {
    g.edges_.push_back(e);
    for (std::size_t c = 0; c < edge_channels; ++c)
      g.edge_attrs_.push_back(edge_attrs[src * edge_channels + c]);
  }

  std::vector<std::size_t> deg(node_count, 0);
  for (const auto& e : g.edges_) {
    ++deg[static_cast<std::size_t>(e.u)];
    ++deg[static_cast<std::size_t>(e.v)];
  }
  g.offsets_.assign(node_count + 1, 0);
  for (std::size_t v = 0; v < node_count; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.adjacency_.resize(g.offsets_.back());
  g.edge_of_slot_.resize(g.offsets_.back());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const auto& e = g.edges_[i];
    auto su = fill[static_cast<std::size_t>(e.u)]++;
    g.adjacency_[su] = e.v;
    g.edge_of_slot_[su] = i;
    auto sv = fill[static_cast<std::size_t>(e.v)]++;
    g.adjacency_[sv] = e.u;
    g.edge_of_slot_[sv] = i;
  }
  // smaller and larger neighbors arrive interleaved
  for (std::size_t v = 0; v < node_count; ++v) {
    auto b = g.offsets_[v], e = g.offsets_[v + 1];
    std::vector<std::pair<NodeId, std::size_t>> tmp;
    tmp.reserve(e - b);
    for (auto s = b; s < e; ++s) tmp.push_back({g.adjacency_[s], g.edge_of_slot_[s]});
    std::sort(tmp.begin(), tmp.end());
    for (auto s = b; s < e; ++s) {
      g.adjacency_[s] = tmp[s - b].first;
      g.edge_of_slot_[s] = tmp[s - b].second;
    }
  }
  return g;
}

/// Builds a graph from per-node and per-edge attribute vectors. Empty
/// attribute arrays mean zero channels.
inline Graph build_graph(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edge_list,
                         const std::vector<std::vector<double>>& node_attrs = {},
                         const std::vector<std::vector<double>>& edge_attrs = {}) {
  std::vector<Edge> edges;
  edges.reserve(edge_list.size());
  for (auto [u, v] : edge_list) edges.push_back({u, v});

  std::size_t a_v = 0;
  std::vector<double> nflat;
  if (!node_attrs.empty()) {
    if (node_attrs.size() != node_count)
      throw error(errc::attribute_shape_mismatch, "expected one attribute vector per node");
    a_v = node_attrs.front().size();
    for (const auto& row : node_attrs) {
      if (row.size() != a_v)
        throw error(errc::attribute_shape_mismatch, "node attribute vectors differ in length");
      nflat.insert(nflat.end(), row.begin(), row.end());
    }
  }
  std::size_t a_e = 0;
  std::vector<double> eflat;
  if (!edge_attrs.empty()) {
    if (edge_attrs.size() != edges.size())
      throw error(errc::attribute_shape_mismatch, "expected one attribute vector per edge");
    a_e = edge_attrs.front().size();
    for (const auto& row : edge_attrs) {
      if (row.size() != a_e)
        throw error(errc::attribute_shape_mismatch, "edge attribute vectors differ in length");
      eflat.insert(eflat.end(), row.begin(), row.end());
    }
  }
  return build_graph_flat(node_count, edges, a_v, std::move(nflat), a_e, std::move(eflat));
}

inline Graph build_graph(std::size_t node_count,
                         std::initializer_list<std::pair<NodeId, NodeId>> edge_list) {
  std::vector<std::pair<NodeId, NodeId>> e(edge_list);
  return build_graph(node_count, std::span<const std::pair<NodeId, NodeId>>(e));
}

/// Shortest-path hop counts from `source`. Unreachable nodes are absent.
inline std::map<NodeId, int> bfs_distances(const Graph& g, NodeId source) {
  if (!g.contains(source))
    throw error(errc::index_out_of_range, "bfs source " + std::to_string(source));
  std::vector<int> dist(g.node_count(), -1);
  std::vector<NodeId> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto u = queue[head];
    for (auto w : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(w);
      }
    }
  }
  std::map<NodeId, int> out;
  for (auto v : queue) out.emplace(v, dist[static_cast<std::size_t>(v)]);
  return out;
}

struct Subgraph {
  Graph graph;
  std::vector<NodeId> back_map;  // new id -> original id
};

/// G[nodes]; new ids follow the order of `nodes`.
inline Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<std::pair<NodeId, NodeId>> lookup;  // (original, new), sorted
  lookup.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!g.contains(nodes[i]))
      throw error(errc::index_out_of_range, "node " + std::to_string(nodes[i]));
    lookup.push_back({nodes[i], static_cast<NodeId>(i)});
  }
  std::sort(lookup.begin(), lookup.end());
  for (std::size_t i = 1; i < lookup.size(); ++i)
    if (lookup[i].first == lookup[i - 1].first)
      throw error(errc::duplicate_node, "node " + std::to_string(lookup[i].first) + " repeated");
  auto new_id = [&](NodeId orig) -> std::optional<NodeId> {
    auto it = std::lower_bound(lookup.begin(), lookup.end(), std::pair<NodeId, NodeId>{orig, -1});
    if (it == lookup.end() || it->first != orig) return std::nullopt;
    return it->second;
  };

  const auto a_v = g.node_channels();
  const auto a_e = g.edge_channels();
  std::vector<double> nattr;
  nattr.reserve(nodes.size() * a_v);
  for (auto v : nodes) {
    auto a = g.node_attributes(v);
    nattr.insert(nattr.end(), a.begin(), a.end());
  }
  std::vector<Edge> edges;
  std::vector<double> eattr;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto nb = g.neighbors(nodes[i]);
    for (auto w : nb) {
      if (w <= nodes[i]) continue;  // each undirected edge once
      if (auto j = new_id(w)) {
        edges.push_back({static_cast<NodeId>(i), *j});
        auto ea = g.edge_attributes(*g.edge_index(nodes[i], w));
        eattr.insert(eattr.end(), ea.begin(), ea.end());
      }
    }
  }
  return {build_graph_flat(nodes.size(), edges, a_v, std::move(nattr), a_e, std::move(eattr)),
          std::vector<NodeId>(nodes.begin(), nodes.end())};
}

/// Relabels nodes: original node v becomes node `perm[v]`.
inline Graph relabel(const Graph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.node_count())
    throw error(errc::shape_mismatch, "permutation size differs from node count");
  std::vector<NodeId> inverse(perm.size(), -1);
  for (std::size_t v = 0; v < perm.size(); ++v) {
    if (perm[v] < 0 || static_cast<std::size_t>(perm[v]) >= perm.size() ||
        inverse[static_cast<std::size_t>(perm[v])] >= 0)
      throw error(errc::shape_mismatch, "not a permutation");
    inverse[static_cast<std::size_t>(perm[v])] = static_cast<NodeId>(v);
  }
  std::vector<double> nattr;
  nattr.reserve(g.node_attribute_block().size());
  for (auto old : inverse) {
    auto a = g.node_attributes(old);
    nattr.insert(nattr.end(), a.begin(), a.end());
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    edges.push_back({perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)]});
  return build_graph_flat(g.node_count(), edges, g.node_channels(), std::move(nattr),
                          g.edge_channels(), g.edge_attribute_block());
}

inline AdjacencyMatrix adjacency_matrix(const Graph& g) {
  AdjacencyMatrix a(g.node_count());
  for (const auto& e : g.edges()) {
    a(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v)) = 1;
    a(static_cast<std::size_t>(e.v), static_cast<std::size_t>(e.u)) = 1;
  }
  return a;
}

/// Exhaustive isomorphism test, attributes ignored. Test oracle for graphs of
/// at most 8 nodes.
inline bool isomorphic_bruteforce(const Graph& g1, const Graph& g2) {
  if (g1.node_count() > 8 || g2.node_count() > 8)
    throw error(errc::too_large, "isomorphic_bruteforce supports at most 8 nodes");
  if (g1.node_count() != g2.node_count() || g1.edge_count() != g2.edge_count()) return false;
  const auto n = g1.node_count();
  auto a1 = adjacency_matrix(g1);
  auto a2 = adjacency_matrix(g2);
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = i + 1; j < n && ok; ++j) ok = a1(i, j) == a2(p[i], p[j]);
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

}  // namespace patchy
