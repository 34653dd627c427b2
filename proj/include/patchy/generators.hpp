#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "patchy/error.hpp"
#include "patchy/graph.hpp"
#include "patchy/rng.hpp"

namespace patchy {

/// 4-neighbor lattice, optionally wrapped on both axes. Node `r * cols + c`
/// has a single attribute channel holding its own index, which serves as a
/// unique pixel intensity.
inline Graph generate_grid(std::size_t rows, std::size_t cols, bool torus = false) {
  const std::size_t min_side = torus ? 3 : 2;
  if (rows < min_side || cols < min_side)
    throw error(errc::too_small, std::string(torus ? "torus" : "grid") + " sides must be >= " +
                                     std::to_string(min_side));
  const auto n = rows * cols;
  auto id = [cols](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * cols + c); };
  std::vector<Edge> edges;
  edges.reserve(2 * n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols)
        edges.push_back({id(r, c), id(r, c + 1)});
      else if (torus)
        edges.push_back({id(r, 0), id(r, c)});
      if (r + 1 < rows)
        edges.push_back({id(r, c), id(r + 1, c)});
      else if (torus)
        edges.push_back({id(0, c), id(r, c)});
    }
  }
  std::vector<double> attrs(n);
  for (std::size_t v = 0; v < n; ++v) attrs[v] = static_cast<double>(v);
  return build_graph_flat(n, edges, 1, std::move(attrs), 0, {});
}

/// Barabasi-Albert growth. The core is `attach_degree` isolated nodes; the
/// first new node links to all of them, and every later node links to
/// `attach_degree` distinct nodes drawn with probability proportional to
/// degree (uniform draws from the list of edge endpoints). The graph has
/// `(n - attach_degree) * attach_degree` edges.
inline Graph generate_preferential_attachment(std::size_t n, std::size_t attach_degree,
                                              std::uint64_t seed) {
  if (attach_degree < 1 || n <= attach_degree)
    throw error(errc::bad_params, "preferential attachment needs n > attach_degree >= 1");
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve((n - attach_degree) * attach_degree);
  std::vector<NodeId> endpoints;
  endpoints.reserve(2 * (n - attach_degree) * attach_degree);
  std::vector<NodeId> targets;
  for (std::size_t i = 0; i < attach_degree; ++i) targets.push_back(static_cast<NodeId>(i));
  std::vector<std::uint8_t> picked(n, 0);
  for (std::size_t src = attach_degree; src < n; ++src) {
    const auto s = static_cast<NodeId>(src);
    for (auto t : targets) {
      edges.push_back({t, s});
      endpoints.push_back(t);
      endpoints.push_back(s);
    }
    targets.clear();
    while (targets.size() < attach_degree) {
      auto cand = endpoints[static_cast<std::size_t>(rng.below(endpoints.size()))];
      if (!picked[static_cast<std::size_t>(cand)]) {
        picked[static_cast<std::size_t>(cand)] = 1;
        targets.push_back(cand);
      }
    }
    for (auto t : targets) picked[static_cast<std::size_t>(t)] = 0;
  }
  return build_graph_flat(n, edges, 0, {}, 0, {});
}

/// Configuration-model graph with target degrees drawn from P(d) ~ 1/d on
/// 1..k_max. An odd stub total loses one uniformly chosen stub. Stubs are
/// shuffled and paired; pairs forming self-loops or repeated edges are
/// reshuffled up to 16 times and then dropped.
inline Graph generate_random_powerlaw(std::size_t n, std::size_t k_max, std::uint64_t seed) {
  if (n < 2 || k_max < 1) throw error(errc::bad_params, "power-law graph needs n >= 2, k_max >= 1");
  Rng rng(seed);
  std::vector<double> cdf(k_max);
  double total = 0;
  for (std::size_t d = 1; d <= k_max; ++d) {
    total += 1.0 / static_cast<double>(d);
    cdf[d - 1] = total;
  }
  std::vector<NodeId> stubs;
  for (std::size_t v = 0; v < n; ++v) {
    const double u = rng.uniform() * total;
    std::size_t d = 1;
    while (d < k_max && u >= cdf[d - 1]) ++d;
    for (std::size_t i = 0; i < d; ++i) stubs.push_back(static_cast<NodeId>(v));
  }
  if (stubs.size() % 2 == 1) {
    auto drop = static_cast<std::size_t>(rng.below(stubs.size()));
    stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(drop));
  }

  std::unordered_set<std::uint64_t> present;
  std::vector<Edge> edges;
  auto key = [n](NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * n + static_cast<std::uint64_t>(b);
  };
  for (int round = 0; round < 16 && stubs.size() >= 2; ++round) {
    rng.shuffle(std::span<NodeId>(stubs));
    std::vector<NodeId> rest;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      auto a = stubs[i], b = stubs[i + 1];
      if (a != b && present.insert(key(a, b)).second) {
        edges.push_back({a, b});
      } else {
        rest.push_back(a);
        rest.push_back(b);
      }
    }
    stubs.swap(rest);
  }
  return build_graph_flat(n, edges, 0, {}, 0, {});
}

}  // namespace patchy
