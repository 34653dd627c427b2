#include <gtest/gtest.h>

#include <chrono>

#include "oracles.hpp"
#include "patchy/canonical.hpp"
#include "patchy/labeling.hpp"

using namespace patchy;

namespace {

std::vector<int> random_prior(std::size_t n, Rng& rng) {
  const auto classes = 1 + rng.below(n > 0 ? n : 1);
  std::vector<int> p(n);
  for (auto& c : p) c = static_cast<int>(rng.below(classes));
  return p;
}

}  // namespace

TEST(Canonical, TriangleIdentity) {
  auto g = build_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  auto f = canonical_form(g, std::vector<int>(3, 0));
  EXPECT_EQ(f.permutation, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(f.matrix.bit_string(), "011101110");
}

TEST(Canonical, PathCenterFirst) {
  auto g = build_graph(3, {{0, 1}, {1, 2}});
  auto f = canonical_form(g, std::vector<int>(3, 0));
  EXPECT_EQ(f.permutation.front(), 1);
  EXPECT_EQ(f.matrix.bit_string(), "011100100");
}

TEST(Canonical, PathWithPinnedEndpoint) {
  auto g = build_graph(3, {{0, 1}, {1, 2}});
  auto f = canonical_form(g, std::vector<int>{0, 1, 1});
  EXPECT_EQ(f.permutation, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(f.matrix.bit_string(), "010101010");
}

TEST(Canonical, EmptyGraphIdentity) {
  auto g = build_graph(3, {});
  auto f = canonical_oracle(g, std::vector<int>(3, 0));
  EXPECT_EQ(f.permutation, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(f.matrix.bit_string(), "000000000");
  EXPECT_EQ(canonical_form(g, std::vector<int>(3, 0)).permutation, f.permutation);
}

TEST(Canonical, CycleRelabelingsAgree) {
  auto c4 = build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto want = canonical_form(c4, std::vector<int>(4, 0)).matrix;
  std::vector<NodeId> p{0, 1, 2, 3};
  do {
    auto h = relabel(c4, p);
    EXPECT_EQ(canonical_form(h, std::vector<int>(4, 0)).matrix, want);
  } while (std::next_permutation(p.begin(), p.end()));
}

TEST(Canonical, MatchesOracleOnRandomGraphs) {
  Rng rng(1234);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = rng.below(9);
    auto g = oracle::random_graph(n, rng.uniform(0.1, 0.9), rng);
    auto prior = random_prior(n, rng);
    auto a = canonical_form(g, prior);
    auto b = canonical_oracle(g, prior);
    ASSERT_EQ(a.matrix, b.matrix) << "trial " << trial;
    ASSERT_EQ(a.permutation, b.permutation) << "trial " << trial;
  }
}

TEST(Canonical, PriorClassesStayContiguous) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.below(10);
    auto g = oracle::random_graph(n, 0.4, rng);
    auto prior = random_prior(n, rng);
    auto f = canonical_form(g, prior);
    for (std::size_t i = 1; i < n; ++i)
      EXPECT_LE(prior[static_cast<std::size_t>(f.permutation[i - 1])],
                prior[static_cast<std::size_t>(f.permutation[i])]);
  }
}

TEST(Canonical, IsomorphismCollapse) {
  Rng rng(5150);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.below(12);
    auto g = oracle::random_graph(n, rng.uniform(0.2, 0.7), rng);
    auto prior = random_prior(n, rng);
    auto perm = oracle::random_permutation(n, rng);
    auto h = relabel(g, perm);
    std::vector<int> hp(n);
    for (std::size_t v = 0; v < n; ++v) hp[static_cast<std::size_t>(perm[v])] = prior[v];
    EXPECT_EQ(canonical_form(g, prior).matrix, canonical_form(h, hp).matrix);
  }
}

TEST(Canonical, HighlySymmetricGraphs) {
  // disjoint triangles and a 4x4 rook graph exercise automorphism pruning
  std::vector<std::pair<NodeId, NodeId>> tri;
  for (NodeId t = 0; t < 6; ++t) {
    tri.push_back({3 * t, 3 * t + 1});
    tri.push_back({3 * t + 1, 3 * t + 2});
    tri.push_back({3 * t, 3 * t + 2});
  }
  auto g = build_graph(18, tri);
  auto f = canonical_form(g, std::vector<int>(18, 0));
  EXPECT_EQ(f.matrix, permuted_matrix(g, f.permutation));
  Rng rng(3);
  auto a = oracle::random_permutation(18, rng);
  EXPECT_EQ(canonical_form(relabel(g, a), std::vector<int>(18, 0)).matrix, f.matrix);

  std::vector<std::pair<NodeId, NodeId>> rook;
  for (NodeId u = 0; u < 16; ++u)
    for (NodeId v = u + 1; v < 16; ++v)
      if (u / 4 == v / 4 || u % 4 == v % 4) rook.push_back({u, v});
  auto r = build_graph(16, rook);
  auto rf = canonical_form(r, std::vector<int>(16, 0));
  EXPECT_EQ(rf.matrix, permuted_matrix(r, rf.permutation));
}

TEST(Canonical, Errors) {
  auto g = build_graph(3, {});
  EXPECT_THROW(canonical_form(g, std::vector<int>(2, 0)), error);
  EXPECT_THROW(canonical_oracle(build_graph(9, {}), std::vector<int>(9, 0)), error);
  CanonicalOptions small;
  small.max_nodes = 2;
  EXPECT_THROW(canonical_form(g, std::vector<int>(3, 0), small), error);
}

TEST(Canonical, WlPriorOnTenNodeNeighborhoodsIsFast) {
  Rng rng(42);
  std::vector<double> times;
  for (int trial = 0; trial < 201; ++trial) {
    auto g = oracle::random_graph(10, 0.3, rng);
    auto colors = wl_refine(g, std::vector<int>(10, 0)).colors;
    auto t0 = std::chrono::steady_clock::now();
    (void)canonical_form(g, colors);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::nth_element(times.begin(), times.begin() + 100, times.end());
  EXPECT_LT(times[100], 1e-3);
}
