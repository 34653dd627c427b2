#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchy/error.hpp"
#include "patchy/graph.hpp"
#include "patchy/rng.hpp"

namespace patchy {

/// One comparable value per node. Larger values rank first.
struct Labeling {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t v) const { return values[v]; }
};

enum class TieBreak { node_id, none };

/// Ranking induced by a labeling: `rank[v]` is in 1..n and `order[i]` is the
/// node of rank i+1. `partition` holds the equal-label groups in rank order.
struct Ranking {
  std::vector<std::size_t> rank;
  std::vector<NodeId> order;
  std::vector<std::vector<NodeId>> partition;
};

/// r(u) < r(v) iff l(u) > l(v). Both tie-break modes assign ascending node
/// ids inside a tie group; with `TieBreak::none` only `partition` is
/// meaningful inside a group, which is how canonicalization consumes it.
inline Ranking ranking_from_labeling(const Labeling& l, TieBreak tie_break = TieBreak::node_id) {
  (void)tie_break;
  const auto n = l.size();
  Ranking r;
  r.order.resize(n);
  std::iota(r.order.begin(), r.order.end(), NodeId{0});
  std::stable_sort(r.order.begin(), r.order.end(), [&](NodeId a, NodeId b) {
    return l.values[static_cast<std::size_t>(a)] > l.values[static_cast<std::size_t>(b)];
  });
  r.rank.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = static_cast<std::size_t>(r.order[i]);
    r.rank[v] = i + 1;
    if (i == 0 || l.values[v] != l.values[static_cast<std::size_t>(r.order[i - 1])])
      r.partition.emplace_back();
    r.partition.back().push_back(r.order[i]);
  }
  return r;
}

inline Labeling degree_labeling(const Graph& g) {
  Labeling l;
  l.values.resize(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v)
    l.values[v] = static_cast<double>(g.degree(static_cast<NodeId>(v)));
  return l;
}

/// Exact betweenness centrality, unweighted, each unordered pair counted once.
inline Labeling betweenness(const Graph& g) {
  const auto n = g.node_count();
  std::vector<double> bc(n, 0.0), delta(n), sigma(n);
  std::vector<int> dist(n);
  std::vector<NodeId> stack;
  std::vector<NodeId> queue;
  stack.reserve(n);
  queue.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    stack.clear();
    queue.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(static_cast<NodeId>(s));
    for (std::size_t head = 0; head < queue.size(); ++head) {
      auto v = queue[head];
      stack.push_back(v);
      const auto dv = dist[static_cast<std::size_t>(v)];
      for (auto w : g.neighbors(v)) {
        auto wi = static_cast<std::size_t>(w);
        if (dist[wi] < 0) {
          dist[wi] = dv + 1;
          queue.push_back(w);
        }
        if (dist[wi] == dv + 1) sigma[wi] += sigma[static_cast<std::size_t>(v)];
      }
    }
    // predecessors of w are exactly the neighbors one layer closer
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      auto w = static_cast<std::size_t>(*it);
      for (auto v : g.neighbors(*it)) {
        auto vi = static_cast<std::size_t>(v);
        if (dist[vi] == dist[w] - 1) delta[vi] += sigma[vi] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) bc[w] += delta[w];
    }
  }
  for (auto& x : bc) x *= 0.5;
  return {std::move(bc)};
}

/// Color classes of a discrete node-label channel: when every node attribute
/// row is one-hot the class is its hot index, otherwise all nodes share 0.
inline std::vector<int> discrete_node_colors(const Graph& g) {
  const auto n = g.node_count();
  const auto a = g.node_channels();
  std::vector<int> colors(n, 0);
  if (a == 0) return colors;
  for (std::size_t v = 0; v < n; ++v) {
    auto row = g.node_attributes(static_cast<NodeId>(v));
    int hot = -1;
    for (std::size_t c = 0; c < a; ++c) {
      if (row[c] == 1.0) {
        if (hot >= 0) return std::vector<int>(n, 0);
        hot = static_cast<int>(c);
      } else if (row[c] != 0.0) {
        return std::vector<int>(n, 0);
      }
    }
    if (hot < 0) return std::vector<int>(n, 0);
    colors[v] = hot;
  }
  return colors;
}

struct WlResult {
  std::vector<int> colors;
  std::size_t iterations = 0;  // rounds that refined the partition

  Labeling labeling() const { return {std::vector<double>(colors.begin(), colors.end())}; }
};

namespace detail {

inline std::size_t compress_colors(std::span<const int> in, std::vector<int>& out) {
  std::vector<int> distinct(in.begin(), in.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  out.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), in[i]) -
                              distinct.begin());
  return distinct.size();
}

}  // namespace detail

/// 1-dimensional Weisfeiler-Lehman color refinement.
///
/// Each round replaces a node's color by the rank of its signature
/// (own color, sorted neighbor colors) among all signatures of the graph in
/// lexicographic order, so colors are numbered 0.. independent of node ids.
/// Stops once a round no longer splits a class, or after `max_iterations`
/// rounds. `trace`, when given, receives the coloring after the initial
/// compression and after every round.
inline WlResult wl_refine(const Graph& g, std::span<const int> initial_colors,
                          std::optional<std::size_t> max_iterations = std::nullopt,
                          std::vector<std::vector<int>>* trace = nullptr) {
  const auto n = g.node_count();
  if (initial_colors.size() != n)
    throw error(errc::shape_mismatch, "initial colors: " + std::to_string(initial_colors.size()) +
                                          " entries for " + std::to_string(n) + " nodes");
  WlResult res;
  auto classes = detail::compress_colors(initial_colors, res.colors);
  if (trace) trace->push_back(res.colors);

  std::vector<int> sig;
  std::vector<std::size_t> offset(n + 1);
  std::vector<NodeId> idx(n);
  std::vector<int> next(n);
  const std::size_t limit = max_iterations.value_or(n + 1);
  for (std::size_t round = 0; round < limit && classes < n; ++round) {
    sig.clear();
    for (std::size_t v = 0; v < n; ++v) {
      offset[v] = sig.size();
      sig.push_back(res.colors[v]);
      auto first = sig.size();
      for (auto w : g.neighbors(static_cast<NodeId>(v)))
        sig.push_back(res.colors[static_cast<std::size_t>(w)]);
      std::sort(sig.begin() + static_cast<std::ptrdiff_t>(first), sig.end());
    }
    offset[n] = sig.size();
    auto view = [&](NodeId v) {
      auto i = static_cast<std::size_t>(v);
      return std::span<const int>(sig.data() + offset[i], offset[i + 1] - offset[i]);
    };
    std::iota(idx.begin(), idx.end(), NodeId{0});
    std::sort(idx.begin(), idx.end(), [&](NodeId a, NodeId b) {
      auto sa = view(a), sb = view(b);
      return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
    });
    int c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        auto sa = view(idx[i - 1]), sb = view(idx[i]);
        if (!std::equal(sa.begin(), sa.end(), sb.begin(), sb.end())) ++c;
      }
      next[static_cast<std::size_t>(idx[i])] = c;
    }
    const auto new_classes = n == 0 ? 0 : static_cast<std::size_t>(c) + 1;
    if (new_classes == classes) break;
    classes = new_classes;
    res.colors.swap(next);
    ++res.iterations;
    if (trace) trace->push_back(res.colors);
  }
  return res;
}

/// Named graph labeling procedure; the pipeline's pluggable ordering source.
struct LabelingProcedure {
  std::string name;
  std::function<Labeling(const Graph&)> run;

  Labeling operator()(const Graph& g) const { return run(g); }
};

inline LabelingProcedure wl_labeling() {
  return {"wl", [](const Graph& g) {
            auto init = discrete_node_colors(g);
            return wl_refine(g, init).labeling();
          }};
}

inline LabelingProcedure degree_procedure() { return {"degree", degree_labeling}; }

inline LabelingProcedure betweenness_procedure() { return {"betweenness", betweenness}; }

/// FNV-1a over structure and attributes; equal graphs hash equally.
inline std::uint64_t structural_hash(const Graph& g) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(g.node_count());
  for (const auto& e : g.edges()) {
    mix(static_cast<std::uint64_t>(e.u));
    mix(static_cast<std::uint64_t>(e.v));
  }
  for (double a : g.node_attribute_block()) mix(std::bit_cast<std::uint64_t>(a));
  return h;
}

/// Control labeling: i.i.d. uniform values per node. The stream is seeded
/// from `seed` and the graph's content, so a graph always receives the same
/// labels.
inline LabelingProcedure random_labeling(std::uint64_t seed) {
  return {"random", [seed](const Graph& g) {
            Rng rng(mix_seed(seed, structural_hash(g)));
            Labeling l;
            l.values.resize(g.node_count());
            for (auto& x : l.values) x = rng.uniform();
            return l;
          }};
}

inline std::optional<LabelingProcedure> labeling_by_name(const std::string& name,
                                                         std::uint64_t seed = 0) {
  if (name == "wl") return wl_labeling();
  if (name == "degree") return degree_procedure();
  if (name == "betweenness") return betweenness_procedure();
  if (name == "random") return random_labeling(seed);
  return std::nullopt;
}

}  // namespace patchy
