#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "patchy/canonical.hpp"
#include "patchy/error.hpp"
#include "patchy/graph.hpp"
#include "patchy/labeling.hpp"

namespace patchy {

inline constexpr NodeId dummy_slot = -1;

/// Nodes collected by breadth-first assembly, in discovery order, with the
/// hop distance of each node from the root.
struct Neighborhood {
  NodeId root = 0;
  std::vector<NodeId> nodes;
  std::vector<int> layer;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// One normalized field of `k` slots. `slots[i]` is an original node id or
/// `dummy_slot`; a zero-field has no root and only dummy slots.
struct ReceptiveField {
  std::optional<NodeId> root;
  std::size_t field_size = 0;
  std::size_t node_channels = 0;
  std::size_t edge_channels = 0;
  std::vector<NodeId> slots;
  std::vector<float> node_patch;  // k x a_v
  std::vector<float> edge_patch;  // k x k x a_e
  AdjacencyMatrix adjacency;

  bool is_zero() const noexcept { return !root.has_value(); }
};

/// Width-many fields of one graph. `node_tensor` is (w, k, a_v) and
/// `edge_tensor` (w, k, k, a_e), both row-major, so they read directly as the
/// flat (w*k, a_v) and (w*k*k, a_e) views fed to the first convolution.
struct TensorBatch {
  std::size_t width = 0;
  std::size_t field_size = 0;
  std::size_t node_channels = 0;
  std::size_t edge_channels = 0;
  std::size_t stride = 1;
  std::vector<float> node_tensor;
  std::vector<float> edge_tensor;
  std::vector<std::optional<NodeId>> roots;

  std::size_t node_values_per_field() const noexcept { return field_size * node_channels; }
  std::size_t edge_values_per_field() const noexcept {
    return field_size * field_size * edge_channels;
  }

  std::span<const float> node_field(std::size_t i) const {
    return {node_tensor.data() + i * node_values_per_field(), node_values_per_field()};
  }
  std::span<const float> edge_field(std::size_t i) const {
    return {edge_tensor.data() + i * edge_values_per_field(), edge_values_per_field()};
  }

  friend bool operator==(const TensorBatch& a, const TensorBatch& b) {
    return a.width == b.width && a.field_size == b.field_size &&
           a.node_channels == b.node_channels && a.edge_channels == b.edge_channels &&
           a.node_tensor == b.node_tensor && a.edge_tensor == b.edge_tensor;
  }
};

/// Where the labeling that orders a neighborhood comes from. `graph` uses the
/// labeling of the whole input graph; `neighborhood` reruns the labeling
/// procedure on the assembled subgraph G[U].
enum class LabelingScope { graph, neighborhood };

struct PatchConfig {
  std::size_t width = 1;
  std::size_t stride = 1;
  std::size_t field_size = 1;
  LabelingScope scope = LabelingScope::graph;
};

/// Accumulated wall time of the pipeline stages, for benchmarking.
struct FieldStats {
  double assembly_seconds = 0;
  double labeling_seconds = 0;
  double canonical_seconds = 0;
  std::size_t fields = 0;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

}  // namespace detail

/// Nodes sorted by descending label (ties by ascending id), then visited at
/// positions 0, s, 2s, ... until `w` entries exist; positions past the end
/// yield an empty entry (a zero-field).
inline std::vector<std::optional<NodeId>> select_node_sequence(const Graph& g, const Labeling& l,
                                                               std::size_t w, std::size_t s) {
  if (s == 0) throw error(errc::bad_params, "stride must be positive");
  if (l.size() != g.node_count())
    throw error(errc::shape_mismatch, "labeling size differs from node count");
  auto ranking = ranking_from_labeling(l, TieBreak::node_id);
  std::vector<std::optional<NodeId>> seq;
  seq.reserve(w);
  for (std::size_t j = 0, i = 0; j < w; ++j, i += s) {
    if (i < ranking.order.size())
      seq.emplace_back(ranking.order[i]);
    else
      seq.emplace_back(std::nullopt);
  }
  return seq;
}

/// Breadth-first assembly: whole layers are added until at least `k` nodes
/// are collected or the component is exhausted, so the result may be larger
/// or smaller than `k`.
inline Neighborhood assemble_neighborhood(const Graph& g, NodeId v, std::size_t k) {
  if (!g.contains(v)) throw error(errc::index_out_of_range, "root " + std::to_string(v));
  Neighborhood nb;
  nb.root = v;
  nb.nodes.push_back(v);
  nb.layer.push_back(0);
  std::unordered_map<NodeId, int> seen;
  seen.reserve(2 * k + 8);
  seen.emplace(v, 0);
  std::size_t frontier_begin = 0;
  int depth = 0;
  while (nb.size() < k && frontier_begin < nb.size()) {
    const auto frontier_end = nb.size();
    ++depth;
    for (auto i = frontier_begin; i < frontier_end; ++i) {
      for (auto w : g.neighbors(nb.nodes[i])) {
        if (seen.emplace(w, depth).second) {
          nb.nodes.push_back(w);
          nb.layer.push_back(depth);
        }
      }
    }
    frontier_begin = frontier_end;
  }
  return nb;
}

inline ReceptiveField zero_receptive_field(std::size_t k, std::size_t a_v, std::size_t a_e) {
  ReceptiveField f;
  f.field_size = k;
  f.node_channels = a_v;
  f.edge_channels = a_e;
  f.slots.assign(k, dummy_slot);
  f.node_patch.assign(k * a_v, 0.0F);
  f.edge_patch.assign(k * k * a_e, 0.0F);
  f.adjacency = AdjacencyMatrix(k);
  return f;
}

namespace detail {

/// Nodes of a field in rank order with their distance and label.
struct RankedNodes {
  std::vector<NodeId> nodes;
  std::vector<int> dist;
  std::vector<double> label;
};

/// Ranks by (distance, label desc, id) and keeps the top `k`. The root is
/// the only node at distance 0.
inline RankedNodes rank_and_crop(const Neighborhood& nb, NodeId v, std::span<const double> labels,
                                 std::size_t k) {
  auto root_it = std::find(nb.nodes.begin(), nb.nodes.end(), v);
  if (root_it == nb.nodes.end())
    throw error(errc::root_missing, "root " + std::to_string(v) + " not in neighborhood");
  const auto root_idx = static_cast<std::size_t>(root_it - nb.nodes.begin());
  auto dist = [&](std::size_t i) { return i == root_idx ? 0 : std::max(nb.layer[i], 1); };
  std::vector<std::size_t> idx(nb.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (dist(a) != dist(b)) return dist(a) < dist(b);
    if (labels[a] != labels[b]) return labels[a] > labels[b];
    return nb.nodes[a] < nb.nodes[b];
  });
  if (idx.size() > k) idx.resize(k);
  RankedNodes out;
  for (auto i : idx) {
    out.nodes.push_back(nb.nodes[i]);
    out.dist.push_back(dist(i));
    out.label.push_back(labels[i]);
  }
  return out;
}

/// Re-sorts `r` after its labels were replaced.
inline void rerank(RankedNodes& r) {
  std::vector<std::size_t> idx(r.nodes.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (r.dist[a] != r.dist[b]) return r.dist[a] < r.dist[b];
    if (r.label[a] != r.label[b]) return r.label[a] > r.label[b];
    return r.nodes[a] < r.nodes[b];
  });
  RankedNodes s;
  for (auto i : idx) {
    s.nodes.push_back(r.nodes[i]);
    s.dist.push_back(r.dist[i]);
    s.label.push_back(r.label[i]);
  }
  r = std::move(s);
}

/// Canonicalizes G[N] with the (distance, label) classes as prior coloring
/// and fills the patches; slots past |N| stay dummies.
inline ReceptiveField build_field(const Graph& g, NodeId v, const RankedNodes& r, std::size_t k,
                                  FieldStats* stats) {
  std::vector<int> prior;
  prior.reserve(r.nodes.size());
  int cls = -1;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    if (i == 0 || r.dist[i] != r.dist[i - 1] || r.label[i] != r.label[i - 1]) ++cls;
    prior.push_back(cls);
  }

  auto t0 = clock::now();
  auto sub = induced_subgraph(g, r.nodes);
  CanonicalOptions opts;
  opts.max_nodes = std::max(opts.max_nodes, k);
  auto canon = canonical_form(sub.graph, prior, opts);
  if (stats) stats->canonical_seconds += seconds_since(t0);

  const auto a_v = g.node_channels();
  const auto a_e = g.edge_channels();
  const auto real = canon.permutation.size();
  auto f = zero_receptive_field(k, a_v, a_e);
  f.root = v;
  for (std::size_t i = 0; i < real; ++i)
    f.slots[i] = r.nodes[static_cast<std::size_t>(canon.permutation[i])];
  for (std::size_t i = 0; i < real; ++i) {
    auto attrs = g.node_attributes(f.slots[i]);
    for (std::size_t c = 0; c < a_v; ++c) f.node_patch[i * a_v + c] = static_cast<float>(attrs[c]);
    for (std::size_t j = 0; j < real; ++j) {
      if (!canon.matrix(i, j)) continue;
      f.adjacency(i, j) = 1;
      if (a_e == 0) continue;
      auto ea = g.edge_attributes(*g.edge_index(f.slots[i], f.slots[j]));
      for (std::size_t c = 0; c < a_e; ++c)
        f.edge_patch[(i * k + j) * a_e + c] = static_cast<float>(ea[c]);
    }
  }
  if (stats) ++stats->fields;
  return f;
}

}  // namespace detail

/// Normalizes an assembled neighborhood with the graph-level labeling `l`:
/// nodes are ranked by (distance to root, label descending, id), cropped to
/// the top `k`, padded with dummies, and ties inside equal (distance, label)
/// classes are broken by canonicalization of the induced subgraph.
inline ReceptiveField normalize_graph(const Graph& g, const Neighborhood& nb, NodeId v,
                                      const Labeling& l, std::size_t k,
                                      FieldStats* stats = nullptr) {
  if (l.size() != g.node_count())
    throw error(errc::shape_mismatch, "labeling size differs from node count");
  std::vector<double> labels(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i)
    labels[i] = l.values[static_cast<std::size_t>(nb.nodes[i])];
  // survivors of a crop keep their order: labels are not recomputed
  return detail::build_field(g, v, detail::rank_and_crop(nb, v, labels, k), k, stats);
}

/// As above, but the ranking comes from `proc` run on G[U]; when U is
/// cropped, the survivors N are ranked again by `proc` run on G[N].
inline ReceptiveField normalize_graph(const Graph& g, const Neighborhood& nb, NodeId v,
                                      const LabelingProcedure& proc, std::size_t k,
                                      FieldStats* stats = nullptr) {
  auto t0 = detail::clock::now();
  auto local = proc(induced_subgraph(g, nb.nodes).graph);
  auto ranked = detail::rank_and_crop(nb, v, local.values, k);
  if (nb.size() > k) {
    ranked.label = proc(induced_subgraph(g, ranked.nodes).graph).values;
    detail::rerank(ranked);
  }
  if (stats) stats->labeling_seconds += detail::seconds_since(t0);
  return detail::build_field(g, v, ranked, k, stats);
}

inline ReceptiveField receptive_field(const Graph& g, NodeId v, const Labeling& l, std::size_t k,
                                      FieldStats* stats = nullptr) {
  auto t0 = detail::clock::now();
  auto nb = assemble_neighborhood(g, v, k);
  if (stats) stats->assembly_seconds += detail::seconds_since(t0);
  return normalize_graph(g, nb, v, l, k, stats);
}

inline ReceptiveField receptive_field(const Graph& g, NodeId v, const LabelingProcedure& proc,
                                      std::size_t k, FieldStats* stats = nullptr) {
  auto t0 = detail::clock::now();
  auto nb = assemble_neighborhood(g, v, k);
  if (stats) stats->assembly_seconds += detail::seconds_since(t0);
  return normalize_graph(g, nb, v, proc, k, stats);
}

namespace detail {

template <typename MakeField>
TensorBatch assemble_batch(const Graph& g, const std::vector<std::optional<NodeId>>& seq,
                           std::size_t k, std::size_t s, MakeField&& make) {
  TensorBatch b;
  b.width = seq.size();
  b.field_size = k;
  b.node_channels = g.node_channels();
  b.edge_channels = g.edge_channels();
  b.stride = s;
  b.node_tensor.assign(b.width * b.node_values_per_field(), 0.0F);
  b.edge_tensor.assign(b.width * b.edge_values_per_field(), 0.0F);
  b.roots = seq;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!seq[i]) continue;
    ReceptiveField f = make(*seq[i]);
    std::copy(f.node_patch.begin(), f.node_patch.end(),
              b.node_tensor.begin() + static_cast<std::ptrdiff_t>(i * b.node_values_per_field()));
    std::copy(f.edge_patch.begin(), f.edge_patch.end(),
              b.edge_tensor.begin() + static_cast<std::ptrdiff_t>(i * b.edge_values_per_field()));
  }
  return b;
}

}  // namespace detail

/// Select, assemble and normalize with a precomputed graph labeling.
inline TensorBatch graph_to_tensors(const Graph& g, const Labeling& l, std::size_t w,
                                    std::size_t s, std::size_t k, FieldStats* stats = nullptr) {
  if (k == 0) throw error(errc::bad_params, "field size must be positive");
  auto seq = select_node_sequence(g, l, w, s);
  return detail::assemble_batch(g, seq, k, s,
                                [&](NodeId v) { return receptive_field(g, v, l, k, stats); });
}

/// Labels the graph with `proc` for node selection; fields are normalized
/// with that labeling or, for `LabelingScope::neighborhood`, with `proc`
/// rerun on every assembled neighborhood.
inline TensorBatch graph_to_tensors(const Graph& g, const LabelingProcedure& proc,
                                    const PatchConfig& cfg, FieldStats* stats = nullptr) {
  if (cfg.field_size == 0) throw error(errc::bad_params, "field size must be positive");
  auto t0 = detail::clock::now();
  auto l = proc(g);
  if (stats) stats->labeling_seconds += detail::seconds_since(t0);
  if (cfg.scope == LabelingScope::graph) return graph_to_tensors(g, l, cfg.width, cfg.stride, cfg.field_size, stats);
  auto seq = select_node_sequence(g, l, cfg.width, cfg.stride);
  return detail::assemble_batch(g, seq, cfg.field_size, cfg.stride, [&](NodeId v) {
    return receptive_field(g, v, proc, cfg.field_size, stats);
  });
}

}  // namespace patchy
