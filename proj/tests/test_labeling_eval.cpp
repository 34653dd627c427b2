#include <gtest/gtest.h>

#include "oracles.hpp"
#include "patchy/generators.hpp"
#include "patchy/labeling_eval.hpp"

using namespace patchy;

TEST(ThetaHat, SingleGraphIsZero) {
  std::vector<Graph> one{build_graph(4, {{0, 1}, {1, 2}})};
  for (const auto& p : {wl_labeling(), degree_procedure(), random_labeling(1)})
    EXPECT_EQ(theta_hat(one, p, 50, 0).theta_hat, 0.0);
}

TEST(ThetaHat, TwoGraphsMatchPairProbabilities) {
  // P3 and the empty graph differ in exactly two upper-triangle entries
  std::vector<Graph> c{build_graph(3, {{0, 1}, {1, 2}}), build_graph(3, {})};
  const std::size_t pairs = 4000;
  auto rep = theta_hat(c, wl_labeling(), pairs, 9);
  // count mixed pairs in the same sample stream
  Rng rng(9);
  std::size_t mixed = 0;
  for (std::size_t i = 0; i < pairs; ++i) mixed += rng.below(2) != rng.below(2);
  EXPECT_DOUBLE_EQ(rep.theta_hat, 2.0 * static_cast<double>(mixed) / pairs);
  EXPECT_NEAR(rep.theta_hat, 1.0, 0.05);
}

TEST(ThetaHat, RelabeledCopiesAreZero) {
  Rng rng(10);
  auto g = oracle::random_graph(9, 0.4, rng);
  std::vector<Graph> copies;
  for (int i = 0; i < 30; ++i) copies.push_back(relabel(g, oracle::random_permutation(9, rng)));
  EXPECT_EQ(theta_hat(copies, wl_labeling(), 500, 0).theta_hat, 0.0);
  EXPECT_EQ(theta_hat(copies, degree_procedure(), 500, 0).theta_hat, 0.0);
}

TEST(ThetaHat, InvariantUnderRelabeling) {
  Rng rng(12);
  std::vector<Graph> a, b;
  for (int i = 0; i < 40; ++i) {
    auto g = oracle::random_graph(7, 0.4, rng);
    b.push_back(relabel(g, oracle::random_permutation(7, rng)));
    a.push_back(std::move(g));
  }
  EXPECT_EQ(theta_hat(a, wl_labeling(), 300, 3).theta_hat, theta_hat(b, wl_labeling(), 300, 3).theta_hat);
}

TEST(ThetaHat, Errors) {
  std::vector<Graph> none;
  EXPECT_THROW(theta_hat(none, wl_labeling(), 10, 0), error);
  std::vector<Graph> mixed{build_graph(2, {}), build_graph(3, {})};
  EXPECT_THROW(theta_hat(mixed, wl_labeling(), 10, 0), error);
  std::vector<Graph> ok{build_graph(2, {})};
  EXPECT_THROW(theta_hat(ok, wl_labeling(), 0, 0), error);
}

TEST(Hamming, UpperTriangle) {
  auto a = adjacency_matrix(build_graph(3, {{0, 1}, {1, 2}}));
  auto b = adjacency_matrix(build_graph(3, {{0, 2}}));
  EXPECT_EQ(hamming_distance(a, b), 3u);
  EXPECT_EQ(hamming_distance(a, a), 0u);
}

TEST(Sampling, SingleNodes) {
  std::vector<Graph> gs{build_graph(3, {{0, 1}})};
  auto s = sample_neighborhood_collection(gs, 1, 5, 0);
  ASSERT_EQ(s.size(), 5u);
  for (const auto& g : s) EXPECT_EQ(g.node_count(), 1u);
}

TEST(Sampling, GridNeighborhoods) {
  std::vector<Graph> gs{generate_grid(5, 5)};
  auto s = sample_neighborhood_collection(gs, 9, 10, 1);
  ASSERT_EQ(s.size(), 10u);
  for (const auto& g : s) EXPECT_EQ(g.node_count(), 9u);
}

TEST(Sampling, Exhausted) {
  std::vector<Graph> gs{build_graph(3, {})};
  EXPECT_THROW(sample_neighborhood_collection(gs, 2, 3, 0), error);
}

TEST(Compare, SortedAndPaired) {
  Rng rng(1);
  std::vector<Graph> c;
  for (int i = 0; i < 50; ++i) c.push_back(oracle::random_graph(6, 0.5, rng));
  std::vector<LabelingProcedure> procs{random_labeling(0), wl_labeling(), degree_procedure()};
  auto r = compare_labelings(c, procs, 400, 7);
  ASSERT_EQ(r.size(), 3u);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i - 1].theta_hat, r[i].theta_hat);
  for (const auto& rep : r) {
    auto single = std::find_if(procs.begin(), procs.end(), [&](const auto& p) { return p.name == rep.labeling; });
    EXPECT_EQ(theta_hat(c, *single, 400, 7).theta_hat, rep.theta_hat);
  }
  EXPECT_EQ(compare_labelings(c, procs, 400, 7)[0].labeling, r[0].labeling);
}
