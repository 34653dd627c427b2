#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "patchy/error.hpp"
#include "patchy/graph.hpp"

namespace patchy {

/// Prior node coloring for canonicalization. Classes are placed in ascending
/// color order; only permutations inside a class are admissible.
struct PriorColoring {
  std::vector<int> color;
};

/// `permutation[i]` is the original id of the node placed at position i;
/// `matrix` is the adjacency matrix in that order.
struct CanonicalForm {
  std::vector<NodeId> permutation;
  AdjacencyMatrix matrix;
};

struct CanonicalOptions {
  std::size_t max_nodes = 32;
  std::size_t max_automorphisms = 256;
};

inline AdjacencyMatrix permuted_matrix(const Graph& g, std::span<const NodeId> order) {
  const auto n = order.size();
  AdjacencyMatrix a(n);
  std::vector<std::size_t> pos(g.node_count());
  for (std::size_t i = 0; i < n; ++i) pos[static_cast<std::size_t>(order[i])] = i;
  for (const auto& e : g.edges()) {
    auto i = pos[static_cast<std::size_t>(e.u)], j = pos[static_cast<std::size_t>(e.v)];
    a(i, j) = 1;
    a(j, i) = 1;
  }
  return a;
}

namespace detail {

inline void check_prior(const Graph& g, std::span<const int> prior) {
  if (prior.size() != g.node_count())
    throw error(errc::shape_mismatch, "prior coloring has " + std::to_string(prior.size()) +
                                          " entries for " + std::to_string(g.node_count()) +
                                          " nodes");
}

/// Nodes sorted by (prior color, id), with the start of each class marked.
inline std::vector<NodeId> prior_order(std::span<const int> prior) {
  std::vector<NodeId> order(prior.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return prior[static_cast<std::size_t>(a)] < prior[static_cast<std::size_t>(b)];
  });
  return order;
}

/// Branch-and-bound search for the lexicographically maximal adjacency
/// matrix under a prior coloring.
///
/// The row-major string is compared row by row. Once positions 0..t-1 are
/// fixed, row t only depends on which node v takes position t and on how
/// many neighbors v has in every remaining cell of the ordered partition:
/// the maximal row puts those neighbors first in each cell. Choosing v thus
/// splits every later cell into (neighbors of v, the rest), and the search
/// branches only over the nodes of the current cell whose row is maximal.
/// Automorphisms found at tied leaves prune candidates that lie in one
/// orbit of the subgroup fixing the current prefix.
///
/// Among all optimal orders the first one reached is returned; candidates
/// are tried in ascending id, so that is the lexicographically smallest
/// optimal sequence of original ids.
class CanonicalSearch {
 public:
  CanonicalSearch(const Graph& g, std::span<const int> prior, std::size_t max_automorphisms)
      : n_(g.node_count()), words_((n_ + 63) / 64), max_autos_(max_automorphisms) {
    adj_.assign(n_ * words_, 0);
    for (const auto& e : g.edges()) {
      set_bit(adj_row(static_cast<std::size_t>(e.u)), static_cast<std::size_t>(e.v));
      set_bit(adj_row(static_cast<std::size_t>(e.v)), static_cast<std::size_t>(e.u));
    }
    states_.resize(n_ + 1);
    auto& root = states_[0];
    root.order = prior_order(prior);
    root.cell_end.assign(n_, 0);
    for (std::size_t s = 0; s < n_;) {
      auto e = s + 1;
      while (e < n_ && prior[static_cast<std::size_t>(root.order[e])] ==
                           prior[static_cast<std::size_t>(root.order[s])])
        ++e;
      root.cell_end[s] = e;
      s = e;
    }
    path_rows_.assign(n_ * words_, 0);
    best_rows_.assign(n_ * words_, 0);
    row_buf_.assign(words_, 0);
    masks_.assign(n_ * words_, 0);
  }

  std::vector<NodeId> run() {
    if (n_ == 0) return {};
    dfs(0, true);
    return best_perm_;
  }

 private:
  struct State {
    std::vector<NodeId> order;
    std::vector<std::size_t> cell_end;  // valid at cell start positions
  };

  std::uint64_t* adj_row(std::size_t v) { return adj_.data() + v * words_; }
  const std::uint64_t* adj_row(std::size_t v) const { return adj_.data() + v * words_; }

  // position p maps to bit (63 - p % 64) of word p / 64, so comparing words
  // as unsigned integers compares the bit strings lexicographically
  static void set_pos(std::uint64_t* row, std::size_t p) {
    row[p / 64] |= std::uint64_t{1} << (63 - p % 64);
  }
  static void set_bit(std::uint64_t* row, std::size_t v) {
    row[v / 64] |= std::uint64_t{1} << (v % 64);
  }
  static bool test_bit(const std::uint64_t* row, std::size_t v) {
    return (row[v / 64] >> (v % 64)) & 1U;
  }

  int compare_rows(const std::uint64_t* a, const std::uint64_t* b) const {
    for (std::size_t w = 0; w < words_; ++w)
      if (a[w] != b[w]) return a[w] < b[w] ? -1 : 1;
    return 0;
  }

  void build_masks(const State& st, std::size_t t) {
    for (std::size_t p = t; p < n_;) {
      auto e = st.cell_end[p];
      auto* m = masks_.data() + p * words_;
      std::fill(m, m + words_, 0);
      for (auto q = p; q < e; ++q) set_bit(m, static_cast<std::size_t>(st.order[q]));
      p = e;
    }
  }

  std::size_t neighbors_in(std::size_t v, std::size_t cell_start) const {
    const auto* a = adj_row(v);
    const auto* m = masks_.data() + cell_start * words_;
    std::size_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::size_t>(std::popcount(a[w] & m[w]));
    return c;
  }

  void row_for(const State& st, std::size_t t, std::size_t v, std::uint64_t* out) const {
    std::fill(out, out + words_, 0);
    auto e0 = st.cell_end[t];
    // v leaves its own cell, which then occupies t+1..e0-1
    auto c = neighbors_in(v, t);
    for (std::size_t q = 0; q < c; ++q) set_pos(out, t + 1 + q);
    for (std::size_t p = e0; p < n_;) {
      auto e = st.cell_end[p];
      c = neighbors_in(v, p);
      for (std::size_t q = 0; q < c; ++q) set_pos(out, p + q);
      p = e;
    }
  }

  void split(State& st, std::size_t s, std::size_t e, std::size_t v) {
    if (e - s < 2) {
      if (e > s) st.cell_end[s] = e;
      return;
    }
    const auto* a = adj_row(v);
    auto mid = std::stable_partition(
        st.order.begin() + static_cast<std::ptrdiff_t>(s), st.order.begin() + static_cast<std::ptrdiff_t>(e),
        [&](NodeId u) { return test_bit(a, static_cast<std::size_t>(u)); });
    auto m = static_cast<std::size_t>(mid - st.order.begin());
    if (m == s || m == e) {
      st.cell_end[s] = e;
    } else {
      st.cell_end[s] = m;
      st.cell_end[m] = e;
    }
  }

  void individualize(State& st, std::size_t t, NodeId v) {
    auto e0 = st.cell_end[t];
    auto it = std::find(st.order.begin() + static_cast<std::ptrdiff_t>(t),
                        st.order.begin() + static_cast<std::ptrdiff_t>(e0), v);
    // keep the remaining members in their relative order
    std::rotate(st.order.begin() + static_cast<std::ptrdiff_t>(t), it, it + 1);
    st.cell_end[t] = t + 1;
    const auto vi = static_cast<std::size_t>(v);
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    if (t + 1 < e0) cells.push_back({t + 1, e0});
    for (std::size_t p = e0; p < n_; p = st.cell_end[p]) cells.push_back({p, st.cell_end[p]});
    for (auto [s, e] : cells) split(st, s, e, vi);
  }

  bool same_orbit(NodeId v, const std::vector<NodeId>& tried, const State& st, std::size_t t) {
    if (tried.empty() || autos_.empty()) return false;
    parent_.resize(n_);
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
      return x;
    };
    bool any = false;
    for (const auto& gamma : autos_) {
      bool fixes = true;
      for (std::size_t p = 0; p < t && fixes; ++p) {
        auto u = static_cast<std::size_t>(st.order[p]);
        fixes = static_cast<std::size_t>(gamma[u]) == u;
      }
      if (!fixes) continue;
      any = true;
      for (std::size_t x = 0; x < n_; ++x) {
        auto a = find(x), b = find(static_cast<std::size_t>(gamma[x]));
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
      }
    }
    if (!any) return false;
    auto rv = find(static_cast<std::size_t>(v));
    for (auto u : tried)
      if (find(static_cast<std::size_t>(u)) == rv) return true;
    return false;
  }

  void leaf(const State& st, bool greater) {
    if (greater || best_perm_.empty()) {
      best_perm_ = st.order;
      best_rows_ = path_rows_;
      ++best_version_;
      return;
    }
    if (autos_.size() >= max_autos_) return;
    std::vector<NodeId> gamma(n_);
    bool identity = true;
    for (std::size_t i = 0; i < n_; ++i) {
      gamma[static_cast<std::size_t>(best_perm_[i])] = st.order[i];
      identity = identity && best_perm_[i] == st.order[i];
    }
    if (!identity) autos_.push_back(std::move(gamma));
  }

  void dfs(std::size_t t, bool greater) {
    auto& st = states_[t];
    if (t == n_) {
      leaf(st, greater);
      return;
    }
    const auto e0 = st.cell_end[t];
    build_masks(st, t);

    auto* best_here = path_rows_.data() + t * words_;
    std::vector<NodeId> cands;
    for (auto p = t; p < e0; ++p) {
      auto v = st.order[p];
      row_for(st, t, static_cast<std::size_t>(v), row_buf_.data());
      int c = cands.empty() ? 1 : compare_rows(row_buf_.data(), best_here);
      if (c > 0) {
        cands.clear();
        std::copy(row_buf_.begin(), row_buf_.end(), best_here);
      }
      if (c >= 0) cands.push_back(v);
    }
    std::sort(cands.begin(), cands.end());

    bool child_greater = greater;
    if (!greater) {
      int c = compare_rows(best_here, best_rows_.data() + t * words_);
      if (c < 0) return;
      child_greater = c > 0;
    }

    std::vector<NodeId> tried;
    for (auto v : cands) {
      if (same_orbit(v, tried, st, t)) continue;
      auto& next = states_[t + 1];
      next = st;
      individualize(next, t, v);
      auto version = best_version_;
      dfs(t + 1, child_greater);
      tried.push_back(v);
      if (best_version_ != version) child_greater = false;
    }
  }

  std::size_t n_;
  std::size_t words_;
  std::size_t max_autos_;
  std::vector<std::uint64_t> adj_;
  std::vector<State> states_;
  std::vector<std::uint64_t> path_rows_;
  std::vector<std::uint64_t> best_rows_;
  std::vector<std::uint64_t> row_buf_;
  std::vector<std::uint64_t> masks_;
  std::vector<NodeId> best_perm_;
  std::size_t best_version_ = 0;
  std::vector<std::vector<NodeId>> autos_;
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Canonical order of `g` under `prior`: among node orders that list the
/// prior classes by ascending color and permute only inside a class, the one
/// whose adjacency matrix read row-major is lexicographically maximal.
/// Node attributes play no role.
inline CanonicalForm canonical_form(const Graph& g, std::span<const int> prior,
                                    const CanonicalOptions& opts = {}) {
  if (g.node_count() > opts.max_nodes)
    throw error(errc::too_large, "canonical_form: " + std::to_string(g.node_count()) +
                                     " nodes exceeds limit " + std::to_string(opts.max_nodes));
  detail::check_prior(g, prior);
  detail::CanonicalSearch search(g, prior, opts.max_automorphisms);
  CanonicalForm out;
  out.permutation = search.run();
  out.matrix = permuted_matrix(g, out.permutation);
  return out;
}

inline CanonicalForm canonical_form(const Graph& g, const PriorColoring& prior,
                                    const CanonicalOptions& opts = {}) {
  return canonical_form(g, std::span<const int>(prior.color), opts);
}

/// Reference implementation by full enumeration of admissible orders, in
/// lexicographic order of the id sequence; the first maximal one wins.
inline CanonicalForm canonical_oracle(const Graph& g, std::span<const int> prior) {
  const auto n = g.node_count();
  if (n > 8) throw error(errc::too_large, "canonical_oracle supports at most 8 nodes");
  detail::check_prior(g, prior);
  auto order = detail::prior_order(prior);
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  for (std::size_t s = 0; s < n;) {
    auto e = s + 1;
    while (e < n && prior[static_cast<std::size_t>(order[e])] ==
                        prior[static_cast<std::size_t>(order[s])])
      ++e;
    blocks.push_back({s, e});
    s = e;
  }
  auto adj = adjacency_matrix(g);
  auto key = [&](const std::vector<NodeId>& o) {
    std::string s(n * n, '0');
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (adj(static_cast<std::size_t>(o[i]), static_cast<std::size_t>(o[j]))) s[i * n + j] = '1';
    return s;
  };
  std::vector<NodeId> best = order;
  std::string best_key = key(order);
  std::vector<NodeId> cur = order;
  // odometer over the blocks, most significant first
  auto recurse = [&](auto&& self, std::size_t b) -> void {
    if (b == blocks.size()) {
      auto k = key(cur);
      if (k > best_key) {
        best_key = std::move(k);
        best = cur;
      }
      return;
    }
    auto [s, e] = blocks[b];
    auto first = cur.begin() + static_cast<std::ptrdiff_t>(s);
    auto last = cur.begin() + static_cast<std::ptrdiff_t>(e);
    std::sort(first, last);
    do {
      self(self, b + 1);
    } while (std::next_permutation(first, last));
  };
  recurse(recurse, 0);
  return {best, permuted_matrix(g, best)};
}

inline CanonicalForm canonical_oracle(const Graph& g, const PriorColoring& prior) {
  return canonical_oracle(g, std::span<const int>(prior.color));
}

}  // namespace patchy
