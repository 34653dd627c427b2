#pragma once

// Slow reference implementations used only by the tests.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "patchy/graph.hpp"
#include "patchy/rng.hpp"

namespace oracle {

using patchy::Graph;
using patchy::NodeId;

inline Graph random_graph(std::size_t n, double p, patchy::Rng& rng, std::size_t label_count = 0) {
  std::vector<patchy::Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  std::vector<double> attrs(n * label_count, 0.0);
  for (std::size_t v = 0; v < n && label_count; ++v) attrs[v * label_count + rng.below(label_count)] = 1.0;
  return patchy::build_graph_flat(n, edges, label_count, std::move(attrs), 0, {});
}

inline std::vector<NodeId> random_permutation(std::size_t n, patchy::Rng& rng) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), NodeId{0});
  rng.shuffle(std::span<NodeId>(p));
  return p;
}

constexpr int unreachable = 1 << 20;

/// Floyd-Warshall on the adjacency matrix.
inline std::vector<std::vector<int>> all_pairs_distances(const Graph& g) {
  const auto n = g.node_count();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, unreachable));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges()) d[e.u][e.v] = d[e.v][e.u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

/// Enumerates every shortest path of every unordered pair and counts, for
/// each node, the fraction of paths it lies on.
inline std::vector<double> betweenness(const Graph& g) {
  const auto n = g.node_count();
  const auto d = all_pairs_distances(g);
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      if (d[s][t] >= unreachable) continue;
      std::vector<std::vector<NodeId>> paths;
      std::vector<NodeId> path{static_cast<NodeId>(s)};
      std::function<void()> walk = [&] {
        auto at = static_cast<std::size_t>(path.back());
        if (at == t) {
          paths.push_back(path);
          return;
        }
        if (path.size() - 1 >= static_cast<std::size_t>(d[s][t])) return;
        for (std::size_t x = 0; x < n; ++x) {
          if (!g.adjacent(static_cast<NodeId>(at), static_cast<NodeId>(x))) continue;
          if (std::find(path.begin(), path.end(), static_cast<NodeId>(x)) != path.end()) continue;
          path.push_back(static_cast<NodeId>(x));
          walk();
          path.pop_back();
        }
      };
      walk();
      std::vector<double> through(n, 0.0);
      std::size_t shortest = 0;
      for (const auto& p : paths) {
        if (p.size() - 1 != static_cast<std::size_t>(d[s][t])) continue;
        ++shortest;
        for (std::size_t i = 1; i + 1 < p.size(); ++i) through[static_cast<std::size_t>(p[i])] += 1;
      }
      for (std::size_t v = 0; v < n; ++v) out[v] += through[v] / static_cast<double>(shortest);
    }
  }
  return out;
}

/// Naive refinement with string signatures. Returns the stable partition as a
/// set of node sets plus the partition after every round.
struct WlTrace {
  std::set<std::set<NodeId>> stable;
  std::vector<std::set<std::set<NodeId>>> rounds;
};

inline std::set<std::set<NodeId>> partition_of(const std::vector<std::string>& colors) {
  std::map<std::string, std::set<NodeId>> by;
  for (std::size_t v = 0; v < colors.size(); ++v) by[colors[v]].insert(static_cast<NodeId>(v));
  std::set<std::set<NodeId>> out;
  for (auto& [c, s] : by) out.insert(s);
  return out;
}

inline WlTrace wl(const Graph& g, const std::vector<int>& initial) {
  const auto n = g.node_count();
  std::vector<std::string> colors(n);
  for (std::size_t v = 0; v < n; ++v) colors[v] = std::to_string(initial[v]);
  WlTrace tr;
  tr.rounds.push_back(partition_of(colors));
  for (std::size_t round = 0; round <= n; ++round) {
    std::vector<std::string> next(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::multiset<std::string> nb;
      for (std::size_t u = 0; u < n; ++u)
        if (g.adjacent(static_cast<NodeId>(v), static_cast<NodeId>(u))) nb.insert(colors[u]);
      std::string s = "(" + colors[v] + "|";
      for (const auto& c : nb) s += c + ",";
      next[v] = s + ")";
    }
    auto p = partition_of(next);
    if (p.size() == tr.rounds.back().size()) break;
    tr.rounds.push_back(p);
    colors = std::move(next);
  }
  tr.stable = tr.rounds.back();
  return tr;
}

/// True when partition `fine` refines `coarse`.
inline bool refines(const std::set<std::set<NodeId>>& fine, const std::set<std::set<NodeId>>& coarse) {
  for (const auto& cell : fine) {
    bool inside = false;
    for (const auto& big : coarse)
      if (std::includes(big.begin(), big.end(), cell.begin(), cell.end())) inside = true;
    if (!inside) return false;
  }
  return true;
}

}  // namespace oracle
