#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "patchy/canonical.hpp"
#include "patchy/error.hpp"
#include "patchy/graph.hpp"
#include "patchy/labeling.hpp"
#include "patchy/receptive_field.hpp"
#include "patchy/rng.hpp"

namespace patchy {

struct EstimatorReport {
  std::string labeling;
  double theta_hat = 0;
  std::size_t pair_count = 0;
  std::uint64_t seed = 0;
};

/// Adjacency matrix of `g` in the order induced by `l`: the equal-label
/// groups, highest label first, form the prior coloring and canonicalization
/// orders nodes inside each group.
inline AdjacencyMatrix labeling_ordered_matrix(const Graph& g, const Labeling& l) {
  auto ranking = ranking_from_labeling(l, TieBreak::none);
  std::vector<int> prior(g.node_count());
  for (std::size_t c = 0; c < ranking.partition.size(); ++c)
    for (auto v : ranking.partition[c]) prior[static_cast<std::size_t>(v)] = static_cast<int>(c);
  CanonicalOptions opts;
  opts.max_nodes = std::max(opts.max_nodes, g.node_count());
  return canonical_form(g, prior, opts).matrix;
}

/// Hamming distance over the strict upper triangle.
inline std::size_t hamming_distance(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
  if (a.order != b.order) throw error(errc::mixed_sizes, "matrices differ in order");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.order; ++i)
    for (std::size_t j = i + 1; j < a.order; ++j) d += a(i, j) != b(i, j);
  return d;
}

/// Builds a collection of graphs with exactly `k` nodes: a uniform graph and
/// a uniform root are drawn, the breadth-first neighborhood is assembled and
/// cropped to its first `k` nodes by (distance, id). Neighborhoods with
/// fewer than `k` nodes are skipped; after `100 * count` failed draws the
/// sampler gives up.
inline std::vector<Graph> sample_neighborhood_collection(std::span<const Graph> graphs,
                                                         std::size_t k, std::size_t count,
                                                         std::uint64_t seed) {
  if (count < 1) throw error(errc::bad_params, "count must be positive");
  if (k < 1) throw error(errc::bad_params, "k must be positive");
  if (graphs.empty()) throw error(errc::empty_collection, "no graphs to sample from");
  Rng rng(seed);
  std::vector<Graph> out;
  out.reserve(count);
  std::size_t failures = 0;
  while (out.size() < count) {
    const auto& g = graphs[static_cast<std::size_t>(rng.below(graphs.size()))];
    bool ok = g.node_count() >= k;
    if (ok) {
      auto root = static_cast<NodeId>(rng.below(g.node_count()));
      auto nb = assemble_neighborhood(g, root, k);
      ok = nb.size() >= k;
      if (ok) {
        std::vector<std::size_t> idx(nb.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
          if (nb.layer[a] != nb.layer[b]) return nb.layer[a] < nb.layer[b];
          return nb.nodes[a] < nb.nodes[b];
        });
        std::vector<NodeId> kept;
        for (std::size_t i = 0; i < k; ++i) kept.push_back(nb.nodes[idx[i]]);
        out.push_back(induced_subgraph(g, kept).graph);
      }
    }
    if (!ok && ++failures > 100 * count)
      throw error(errc::exhausted, "found only " + std::to_string(out.size()) + " of " +
                                       std::to_string(count) + " neighborhoods with " +
                                       std::to_string(k) + " nodes");
  }
  return out;
}

namespace detail {

inline void check_collection(std::span<const Graph> collection) {
  if (collection.empty()) throw error(errc::empty_collection, "collection is empty");
  for (const auto& g : collection)
    if (g.node_count() != collection.front().node_count())
      throw error(errc::mixed_sizes, "collection mixes graphs of " +
                                         std::to_string(collection.front().node_count()) +
                                         " and " + std::to_string(g.node_count()) + " nodes");
}

inline std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t size,
                                                                     std::size_t pairs,
                                                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> out(pairs);
  for (auto& [a, b] : out) {
    a = static_cast<std::size_t>(rng.below(size));
    b = static_cast<std::size_t>(rng.below(size));
  }
  return out;
}

inline EstimatorReport estimate(std::span<const Graph> collection, const LabelingProcedure& proc,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                std::uint64_t seed) {
  std::vector<AdjacencyMatrix> mats;
  mats.reserve(collection.size());
  for (const auto& g : collection) mats.push_back(labeling_ordered_matrix(g, proc(g)));
  // distances are integers, so the sum is exact and order-independent
  std::uint64_t total = 0;
  for (auto [a, b] : pairs) total += hamming_distance(mats[a], mats[b]);
  return {proc.name, static_cast<double>(total) / static_cast<double>(pairs.size()), pairs.size(),
          seed};
}

}  // namespace detail

/// Mean labeling-ordered Hamming distance over `pair_count` pairs drawn
/// uniformly with replacement.
inline EstimatorReport theta_hat(std::span<const Graph> collection, const LabelingProcedure& proc,
                                 std::size_t pair_count, std::uint64_t seed) {
  detail::check_collection(collection);
  if (pair_count < 1) throw error(errc::bad_params, "pair count must be positive");
  return detail::estimate(collection, proc, detail::sample_pairs(collection.size(), pair_count, seed),
                          seed);
}

/// Evaluates every procedure on the same pair sequence and sorts ascending
/// by estimate; ties keep the input order.
inline std::vector<EstimatorReport> compare_labelings(std::span<const Graph> collection,
                                                      std::span<const LabelingProcedure> procs,
                                                      std::size_t pair_count, std::uint64_t seed) {
  detail::check_collection(collection);
  if (pair_count < 1) throw error(errc::bad_params, "pair count must be positive");
  auto pairs = detail::sample_pairs(collection.size(), pair_count, seed);
  std::vector<EstimatorReport> out;
  for (const auto& p : procs) out.push_back(detail::estimate(collection, p, pairs, seed));
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.theta_hat < b.theta_hat; });
  return out;
}

}  // namespace patchy
