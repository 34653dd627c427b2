#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchy/error.hpp"
#include "patchy/receptive_field.hpp"

namespace patchy {

inline constexpr int tensor_file_version = 1;

struct TensorFileHeader {
  std::size_t width = 0;
  std::size_t field_size = 0;
  std::size_t node_channels = 0;
  std::size_t edge_channels = 0;
  std::size_t graph_count = 0;
  std::size_t stride = 1;
  std::string labeling_name;
  int version = tensor_file_version;

  std::size_t values_per_graph() const noexcept {
    return width * field_size * node_channels + width * field_size * field_size * edge_channels;
  }
};

struct TensorFile {
  TensorFileHeader header;
  std::vector<TensorBatch> batches;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

inline void put_floats(std::string& out, std::span<const float> xs) {
  const auto at = out.size();
  out.resize(at + xs.size() * 4);
  if constexpr (std::endian::native == std::endian::little) {
    if (!xs.empty()) std::memcpy(out.data() + at, xs.data(), xs.size() * 4);
  } else {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto u = std::bit_cast<std::uint32_t>(xs[i]);
      for (int b = 0; b < 4; ++b) out[at + 4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xff);
    }
  }
}

inline void get_floats(const unsigned char* src, std::size_t count, std::vector<float>& dst) {
  dst.resize(count);
  if constexpr (std::endian::native == std::endian::little) {
    if (count) std::memcpy(dst.data(), src, count * 4);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(src[4 * i + b]) << (8 * b);
      dst[i] = std::bit_cast<float>(u);
    }
  }
}

inline std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::missing_file, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_all(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error(errc::missing_file, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw error(errc::missing_file, "failed writing " + path.string());
}

}  // namespace detail

/// Serializes batches to bytes. The JSON header keys are written in a fixed
/// order, so equal inputs always give identical bytes.
inline std::string encode_tensor_file(std::span<const TensorBatch> batches,
                                      const std::string& labeling_name) {
  TensorFileHeader h;
  h.labeling_name = labeling_name;
  h.graph_count = batches.size();
  if (!batches.empty()) {
    const auto& f = batches.front();
    h.width = f.width;
    h.field_size = f.field_size;
    h.node_channels = f.node_channels;
    h.edge_channels = f.edge_channels;
    h.stride = f.stride;
  }
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const auto& b = batches[i];
    if (b.width != h.width || b.field_size != h.field_size || b.node_channels != h.node_channels ||
        b.edge_channels != h.edge_channels || b.stride != h.stride)
      throw error(errc::heterogeneous_batches,
                  "batch " + std::to_string(i) + " differs in shape from batch 0");
    if (b.node_tensor.size() != h.width * b.node_values_per_field() ||
        b.edge_tensor.size() != h.width * b.edge_values_per_field())
      throw error(errc::shape_mismatch, "batch " + std::to_string(i) + " tensor size is inconsistent");
  }
  nlohmann::ordered_json j;
  j["w"] = h.width;
  j["k"] = h.field_size;
  j["a_v"] = h.node_channels;
  j["a_e"] = h.edge_channels;
  j["graph_count"] = h.graph_count;
  j["stride"] = h.stride;
  j["labeling_name"] = h.labeling_name;
  j["version"] = h.version;
  const auto text = j.dump();

  std::string out;
  out.reserve(4 + text.size() + batches.size() * h.values_per_graph() * 4);
  detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const auto& b : batches) {
    detail::put_floats(out, b.node_tensor);
    detail::put_floats(out, b.edge_tensor);
  }
  return out;
}

inline TensorFile decode_tensor_file(std::string_view bytes) {
  if (bytes.size() < 4) throw error(errc::corrupt_header, "file shorter than the length prefix");
  const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t len = u[0] | (u[1] << 8) | (u[2] << 16) | (static_cast<std::uint32_t>(u[3]) << 24);
  if (bytes.size() - 4 < len) throw error(errc::corrupt_header, "header runs past end of file");

  TensorFile tf;
  auto& h = tf.header;
  try {
    auto j = nlohmann::json::parse(bytes.substr(4, len));
    h.width = j.at("w").get<std::size_t>();
    h.field_size = j.at("k").get<std::size_t>();
    h.node_channels = j.at("a_v").get<std::size_t>();
    h.edge_channels = j.at("a_e").get<std::size_t>();
    h.graph_count = j.at("graph_count").get<std::size_t>();
    h.stride = j.at("stride").get<std::size_t>();
    h.labeling_name = j.at("labeling_name").get<std::string>();
    h.version = j.at("version").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::corrupt_header, e.what());
  }
  if (h.version != tensor_file_version)
    throw error(errc::corrupt_header, "unsupported version " + std::to_string(h.version));

  const auto payload = bytes.size() - 4 - len;
  const auto per_graph = h.values_per_graph();
  const auto expected = static_cast<unsigned __int128>(h.graph_count) * per_graph * 4;
  if (payload < expected)
    throw error(errc::truncated_payload, "payload has " + std::to_string(payload) + " bytes, expected " +
                                             std::to_string(static_cast<std::uint64_t>(expected)));
  if (payload > expected) throw error(errc::corrupt_header, "trailing bytes after payload");

  const auto* p = u + 4 + len;
  const auto node_n = h.width * h.field_size * h.node_channels;
  const auto edge_n = h.width * h.field_size * h.field_size * h.edge_channels;
  tf.batches.reserve(h.graph_count);
  for (std::size_t g = 0; g < h.graph_count; ++g) {
    TensorBatch b;
    b.width = h.width;
    b.field_size = h.field_size;
    b.node_channels = h.node_channels;
    b.edge_channels = h.edge_channels;
    b.stride = h.stride;
    detail::get_floats(p, node_n, b.node_tensor);
    p += node_n * 4;
    detail::get_floats(p, edge_n, b.edge_tensor);
    p += edge_n * 4;
    tf.batches.push_back(std::move(b));
  }
  return tf;
}

inline void write_tensor_file(const std::filesystem::path& path, std::span<const TensorBatch> batches,
                              const std::string& labeling_name = "") {
  detail::write_all(path, encode_tensor_file(batches, labeling_name));
}

inline TensorFile read_tensor_file(const std::filesystem::path& path) {
  return decode_tensor_file(detail::read_all(path));
}

}  // namespace patchy
