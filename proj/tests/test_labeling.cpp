#include <gtest/gtest.h>

#include "oracles.hpp"
#include "patchy/labeling.hpp"

using namespace patchy;

namespace {

Graph star(std::size_t leaves) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (std::size_t i = 1; i <= leaves; ++i) e.push_back({0, static_cast<NodeId>(i)});
  return build_graph(leaves + 1, e);
}

Graph complete(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) e.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  return build_graph(n, e);
}

std::set<std::set<NodeId>> partition(const std::vector<int>& colors) {
  std::map<int, std::set<NodeId>> by;
  for (std::size_t v = 0; v < colors.size(); ++v) by[colors[v]].insert(static_cast<NodeId>(v));
  std::set<std::set<NodeId>> out;
  for (auto& [c, s] : by) out.insert(s);
  return out;
}

}  // namespace

TEST(Ranking, ReversesLabelOrder) {
  auto r = ranking_from_labeling({{5, 9, 1}});
  EXPECT_EQ(r.rank, (std::vector<std::size_t>{2, 1, 3}));
}

TEST(Ranking, TiesByNodeId) {
  auto r = ranking_from_labeling({{7, 7}}, TieBreak::node_id);
  EXPECT_EQ(r.rank, (std::vector<std::size_t>{1, 2}));
  ASSERT_EQ(r.partition.size(), 1u);
  EXPECT_EQ(r.partition[0], (std::vector<NodeId>{0, 1}));
}

TEST(Ranking, MixedTies) {
  auto r = ranking_from_labeling({{2, 3, 3, 1}});
  EXPECT_EQ(r.rank, (std::vector<std::size_t>{3, 1, 2, 4}));
}

TEST(Ranking, BijectionAndStrictOrder) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Labeling l;
    const auto n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) l.values.push_back(static_cast<double>(rng.below(4)));
    auto r = ranking_from_labeling(l);
    auto sorted = r.rank;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(sorted[i], i + 1);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v)
        if (l[u] > l[v]) EXPECT_LT(r.rank[u], r.rank[v]);
  }
}

TEST(Degree, Examples) {
  EXPECT_EQ(degree_labeling(build_graph(3, {{0, 1}, {1, 2}})).values, (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(degree_labeling(complete(4)).values, (std::vector<double>{3, 3, 3, 3}));
  EXPECT_EQ(degree_labeling(build_graph(1, {})).values, (std::vector<double>{0}));
}

TEST(Betweenness, Examples) {
  EXPECT_EQ(betweenness(build_graph(3, {{0, 1}, {1, 2}})).values, (std::vector<double>{0, 1, 0}));
  for (double x : betweenness(complete(4)).values) EXPECT_EQ(x, 0.0);
  auto s = betweenness(star(5)).values;
  EXPECT_DOUBLE_EQ(s[0], 10.0);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_EQ(s[i], 0.0);
}

TEST(Betweenness, MatchesPathEnumeration) {
  Rng rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    auto g = oracle::random_graph(1 + rng.below(7), rng.uniform(0.2, 0.8), rng);
    auto want = oracle::betweenness(g);
    auto got = betweenness(g).values;
    for (std::size_t v = 0; v < want.size(); ++v) EXPECT_NEAR(got[v], want[v], 1e-9);
  }
}

TEST(Wl, PathEndpointsShareColor) {
  auto g = build_graph(3, {{0, 1}, {1, 2}});
  std::vector<int> init(3, 0);
  auto r = wl_refine(g, init);
  EXPECT_EQ(r.colors[0], r.colors[2]);
  EXPECT_NE(r.colors[0], r.colors[1]);
  EXPECT_EQ(r.iterations, 1u);
}

TEST(Wl, VertexTransitiveStaysUniform) {
  auto g = build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto r = wl_refine(g, std::vector<int>(4, 0));
  EXPECT_EQ(partition(r.colors).size(), 1u);
  EXPECT_EQ(r.iterations, 0u);
}

TEST(Wl, HandTracedSixNodes) {
  auto g = build_graph(6, {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {4, 5}});
  auto r = wl_refine(g, std::vector<int>(6, 0));
  std::set<std::set<NodeId>> want{{0}, {1, 2}, {3}, {4, 5}};
  EXPECT_EQ(partition(r.colors), want);
  EXPECT_EQ(oracle::wl(g, std::vector<int>(6, 0)).stable, want);
}

TEST(Wl, MatchesStringOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.below(10);
    auto g = oracle::random_graph(n, rng.uniform(0.1, 0.6), rng);
    std::vector<int> init(n);
    for (auto& c : init) c = static_cast<int>(rng.below(2));
    std::vector<std::vector<int>> trace;
    auto r = wl_refine(g, init, std::nullopt, &trace);
    auto want = oracle::wl(g, init);
    EXPECT_EQ(partition(r.colors), want.stable);
    ASSERT_EQ(trace.size(), want.rounds.size());
    for (std::size_t i = 0; i < trace.size(); ++i) EXPECT_EQ(partition(trace[i]), want.rounds[i]);
    EXPECT_EQ(r.iterations + 1, trace.size());
  }
}

TEST(Wl, MaxIterationsCaps) {
  // path of 7: splits over three rounds from uniform
  auto g = build_graph(7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}});
  auto full = wl_refine(g, std::vector<int>(7, 0));
  EXPECT_EQ(full.iterations, 3u);
  auto one = wl_refine(g, std::vector<int>(7, 0), 1);
  EXPECT_EQ(one.iterations, 1u);
  EXPECT_EQ(partition(one.colors).size(), 2u);
}

TEST(Wl, ColorsIgnoreNodeIds) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.below(8);
    auto g = oracle::random_graph(n, 0.4, rng, 2);
    auto perm = oracle::random_permutation(n, rng);
    auto h = relabel(g, perm);
    auto a = wl_labeling()(g).values;
    auto b = wl_labeling()(h).values;
    for (std::size_t v = 0; v < n; ++v) EXPECT_EQ(a[v], b[static_cast<std::size_t>(perm[v])]);
  }
}

TEST(Wl, DiscreteColorsFromOneHot) {
  std::vector<std::pair<NodeId, NodeId>> e{{0, 1}};
  auto g = build_graph(2, e, {{0, 1}, {1, 0}});
  EXPECT_EQ(discrete_node_colors(g), (std::vector<int>{1, 0}));
  auto real = build_graph(2, e, {{0.5}, {1.0}});
  EXPECT_EQ(discrete_node_colors(real), (std::vector<int>{0, 0}));
}

TEST(Wl, ShapeMismatch) {
  auto g = build_graph(3, {});
  EXPECT_THROW(wl_refine(g, std::vector<int>(2, 0)), error);
}

TEST(RandomLabeling, StablePerGraph) {
  auto p = random_labeling(4);
  auto g = build_graph(5, {{0, 1}, {2, 3}});
  EXPECT_EQ(p(g).values, p(g).values);
  EXPECT_NE(p(g).values, random_labeling(5)(g).values);
}

TEST(LabelingByName, Known) {
  for (auto name : {"wl", "degree", "betweenness", "random"}) {
    auto p = labeling_by_name(name);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(p->name, name);
  }
  EXPECT_FALSE(labeling_by_name("pagerank").has_value());
}
