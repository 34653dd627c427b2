#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "patchy/datasets.hpp"
#include "patchy/generators.hpp"
#include "patchy/labeling.hpp"
#include "patchy/tensor_io.hpp"

#ifndef PATCHY_DATA_DIR
#define PATCHY_DATA_DIR "data"
#endif

using namespace patchy;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("patchy_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
  }

 private:
  fs::path path_;
};

// Two graphs: a labeled triangle (class 5) and a single edge (class -1).
void write_toy(const TempDir& d) {
  d.write("TOY_A.txt", "1, 2\n2, 3\n3, 1\n2, 1\n4, 5\n5, 4\n");
  d.write("TOY_graph_indicator.txt", "1\n1\n1\n2\n2\n");
  d.write("TOY_graph_labels.txt", "5\n-1\n");
  d.write("TOY_node_labels.txt", "3\n0\n3\n7\n0\n");
  d.write("TOY_edge_labels.txt", "1\n1\n2\n1\n0\n0\n");
}

template <typename F>
errc code_of(F&& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no patchy::error thrown";
  return errc::bad_params;
}

}  // namespace

TEST(TuLoader, Toy) {
  TempDir d;
  write_toy(d);
  auto b = load_tu_dataset(d.path(), "TOY");
  ASSERT_EQ(b.graphs.size(), 2u);
  EXPECT_EQ(b.graphs[0].node_count(), 3u);
  EXPECT_EQ(b.graphs[0].edge_count(), 3u);
  EXPECT_EQ(b.graphs[1].edge_count(), 1u);
  EXPECT_EQ(b.class_labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(b.class_values, (std::vector<long long>{-1, 5}));
  EXPECT_EQ(b.attributes.node_label_values, (std::vector<long long>{0, 3, 7}));
  EXPECT_EQ(b.attributes.node_channels(), 3u);
  EXPECT_EQ(b.attributes.edge_channels(), 3u);
  EXPECT_EQ(decode_node_labels(b, 0), (std::vector<long long>{3, 0, 3}));
  EXPECT_EQ(decode_node_labels(b, 1), (std::vector<long long>{7, 0}));
  auto e = b.graphs[0].edge_attributes(*b.graphs[0].edge_index(2, 0));
  EXPECT_EQ(std::vector<double>(e.begin(), e.end()), (std::vector<double>{0, 0, 1}));
}

TEST(TuLoader, Deterministic) {
  TempDir d;
  write_toy(d);
  auto a = load_tu_dataset(d.path(), "TOY");
  auto b = load_tu_dataset(d.path(), "TOY");
  EXPECT_EQ(a.graphs, b.graphs);
  EXPECT_EQ(a.class_labels, b.class_labels);
}

TEST(TuLoader, Errors) {
  TempDir d;
  EXPECT_EQ(code_of([&] { load_tu_dataset(d.path(), "TOY"); }), errc::missing_file);
  EXPECT_EQ(code_of([&] { load_tu_dataset(d.path() / "nope", "TOY"); }), errc::missing_file);

  write_toy(d);
  d.write("TOY_A.txt", "1, 2\n2, x\n3, 1\n2, 1\n4, 5\n5, 4\n");
  try {
    load_tu_dataset(d.path(), "TOY");
    ADD_FAILURE();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::malformed_line);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }

  write_toy(d);
  d.write("TOY_A.txt", "1, 4\n");
  EXPECT_EQ(code_of([&] { load_tu_dataset(d.path(), "TOY"); }), errc::inconsistent_indicator);

  write_toy(d);
  d.write("TOY_graph_indicator.txt", "1\n1\n3\n2\n2\n");
  EXPECT_EQ(code_of([&] { load_tu_dataset(d.path(), "TOY"); }), errc::inconsistent_indicator);

  write_toy(d);
  d.write("TOY_node_labels.txt", "1\n2\n");
  EXPECT_EQ(code_of([&] { load_tu_dataset(d.path(), "TOY"); }), errc::inconsistent_indicator);
}

TEST(TuLoader, Mutag) {
  auto b = load_tu_dataset(fs::path(PATCHY_DATA_DIR) / "MUTAG", "MUTAG");
  EXPECT_EQ(b.graphs.size(), 188u);
  EXPECT_NEAR(b.mean_node_count(), 17.93, 0.01);
  EXPECT_EQ(b.max_node_count(), 28u);
  EXPECT_EQ(b.class_count(), 2u);
  EXPECT_EQ(b.attributes.node_channels(), 7u);
  for (std::size_t i = 0; i < b.graphs.size(); ++i) {
    auto labels = decode_node_labels(b, i);
    ASSERT_EQ(labels.size(), b.graphs[i].node_count());
  }
}

TEST(EdgeList, SparseIds) {
  TempDir d;
  d.write("g.txt", "# comment\n10 20\n20 30\n30 10\n10 20\n");
  auto g = load_edge_list(d.path() / "g.txt");
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 3u);
}

TEST(Generators, Grid) {
  auto g = generate_grid(2, 2);
  EXPECT_EQ(g.node_count(), 4u);
  EXPECT_EQ(g.edge_count(), 4u);
  auto t = generate_grid(3, 3, true);
  for (NodeId v = 0; v < 9; ++v) EXPECT_EQ(t.degree(v), 4u);
  EXPECT_EQ(generate_grid(100, 100, true).node_count(), 10000u);
  EXPECT_EQ(generate_grid(3, 4).node_attributes(7)[0], 7.0);
  EXPECT_EQ(code_of([] { generate_grid(1, 5); }), errc::too_small);
  EXPECT_EQ(code_of([] { generate_grid(2, 5, true); }), errc::too_small);
}

TEST(Generators, PreferentialAttachment) {
  auto tree = generate_preferential_attachment(5, 1, 0);
  EXPECT_EQ(tree.edge_count(), 4u);
  EXPECT_EQ(generate_preferential_attachment(1000, 3, 0).edge_count(), 3u * 997u);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto g = generate_preferential_attachment(10000, 3, seed);
    std::size_t max_degree = 0;
    for (NodeId v = 0; v < 10000; ++v) max_degree = std::max(max_degree, g.degree(v));
    const double avg = 2.0 * static_cast<double>(g.edge_count()) / 10000.0;
    EXPECT_GT(static_cast<double>(max_degree), 3 * avg);
  }
  EXPECT_EQ(generate_preferential_attachment(200, 3, 7), generate_preferential_attachment(200, 3, 7));
  EXPECT_EQ(code_of([] { generate_preferential_attachment(3, 3, 0); }), errc::bad_params);
  EXPECT_EQ(code_of([] { generate_preferential_attachment(3, 0, 0); }), errc::bad_params);
}

TEST(Generators, PowerLaw) {
  auto m = generate_random_powerlaw(101, 1, 0);
  std::size_t zero = 0;
  for (NodeId v = 0; v < 101; ++v) {
    EXPECT_LE(m.degree(v), 1u);
    zero += m.degree(v) == 0;
  }
  EXPECT_EQ(zero, 1u);

  auto g = generate_random_powerlaw(10000, 3, 0);
  std::array<double, 4> frac{};
  for (NodeId v = 0; v < 10000; ++v) {
    ASSERT_LE(g.degree(v), 3u);
    frac[g.degree(v)] += 1.0 / 10000;
  }
  EXPECT_NEAR(frac[1], 6.0 / 11, 0.03);
  EXPECT_NEAR(frac[2], 3.0 / 11, 0.03);
  EXPECT_NEAR(frac[3], 2.0 / 11, 0.03);
  EXPECT_EQ(generate_random_powerlaw(500, 3, 4), generate_random_powerlaw(500, 3, 4));
  EXPECT_EQ(code_of([] { generate_random_powerlaw(1, 3, 0); }), errc::bad_params);
}

TEST(Rng, StandardTestVector) {
  Rng r(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = r.next();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, BelowAndUniformRanges) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_LT(r.below(7), 7u);
    auto u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 2), mix_seed(1, 3));
}

TEST(TensorFile, RoundTrip) {
  TempDir d;
  auto g = generate_grid(4, 5);
  std::vector<TensorBatch> bs;
  for (int i = 0; i < 3; ++i) bs.push_back(graph_to_tensors(g, degree_labeling(g), 6, 1 + i % 2, 4));
  for (auto& b : bs) b.stride = 1;
  write_tensor_file(d.path() / "t.bin", bs, "degree");
  auto tf = read_tensor_file(d.path() / "t.bin");
  EXPECT_EQ(tf.header.graph_count, 3u);
  EXPECT_EQ(tf.header.labeling_name, "degree");
  EXPECT_EQ(tf.header.width, 6u);
  ASSERT_EQ(tf.batches.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(std::memcmp(tf.batches[i].node_tensor.data(), bs[i].node_tensor.data(), bs[i].node_tensor.size() * 4), 0);
    EXPECT_EQ(tf.batches[i], bs[i]);
  }
  EXPECT_EQ(encode_tensor_file(tf.batches, "degree"), encode_tensor_file(bs, "degree"));
}

TEST(TensorFile, PayloadLength) {
  TensorBatch b;
  b.width = 2;
  b.field_size = 3;
  b.node_channels = 2;
  b.edge_channels = 1;
  b.node_tensor.assign(12, 0.5f);
  b.edge_tensor.assign(18, -1.0f);
  std::vector<TensorBatch> bs{b, b};
  auto bytes = encode_tensor_file(bs, "x");
  const std::uint32_t len = static_cast<unsigned char>(bytes[0]) | (static_cast<unsigned char>(bytes[1]) << 8);
  EXPECT_EQ(bytes.size() - 4 - len, 2u * (12 + 18) * 4);
}

TEST(TensorFile, ZeroGraphs) {
  TempDir d;
  write_tensor_file(d.path() / "z.bin", std::vector<TensorBatch>{}, "wl");
  auto tf = read_tensor_file(d.path() / "z.bin");
  EXPECT_EQ(tf.header.graph_count, 0u);
  EXPECT_TRUE(tf.batches.empty());
}

TEST(TensorFile, Errors) {
  auto g = generate_grid(3, 3);
  auto a = graph_to_tensors(g, degree_labeling(g), 2, 1, 3);
  auto b = graph_to_tensors(g, degree_labeling(g), 3, 1, 3);
  std::vector<TensorBatch> mixed{a, b};
  EXPECT_EQ(code_of([&] { encode_tensor_file(mixed, "x"); }), errc::heterogeneous_batches);

  std::vector<TensorBatch> ok{a};
  auto bytes = encode_tensor_file(ok, "x");
  EXPECT_EQ(code_of([&] { decode_tensor_file(std::string_view(bytes).substr(0, bytes.size() - 1)); }),
            errc::truncated_payload);
  EXPECT_EQ(code_of([] { decode_tensor_file("ab"); }), errc::corrupt_header);
  auto broken = bytes;
  broken[5] = '#';
  EXPECT_EQ(code_of([&] { decode_tensor_file(broken); }), errc::corrupt_header);
}
