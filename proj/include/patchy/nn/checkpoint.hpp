#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchy/error.hpp"
#include "patchy/nn/cnn.hpp"
#include "patchy/nn/optim.hpp"
#include "patchy/nn/train.hpp"
#include "patchy/tensor_io.hpp"

namespace patchy::nn {

/// On disk: 4-byte little-endian header length, JSON header, then the
/// parameters as little-endian float32.
struct Checkpoint {
  std::string model;  // "pscn" or "pslr"
  NetShape shape;     // pslr uses width, field_size, node_channels, classes
  TrainConfig config;
  std::vector<float> params;
};

inline std::string encode_checkpoint(const Checkpoint& c) {
  nlohmann::ordered_json j;
  j["model"] = c.model;
  j["w"] = c.shape.width;
  j["k"] = c.shape.field_size;
  j["a_v"] = c.shape.node_channels;
  j["a_e"] = c.shape.edge_channels;
  j["classes"] = c.shape.classes;
  j["merge_edges"] = c.shape.merge_edges;
  j["conv1_channels"] = c.shape.conv1_channels;
  j["conv2_channels"] = c.shape.conv2_channels;
  j["conv2_size"] = c.shape.conv2_size;
  j["dense_units"] = c.shape.dense_units;
  j["epochs"] = c.config.epochs;
  j["batch_size"] = c.config.batch_size;
  j["learning_rate"] = c.config.learning_rate;
  j["decay"] = c.config.decay;
  j["epsilon"] = c.config.epsilon;
  j["dropout"] = c.config.dropout;
  j["weight_decay"] = c.config.weight_decay;
  j["seed"] = c.config.seed;
  j["parameter_count"] = c.params.size();
  const auto text = j.dump();
  std::string out;
  patchy::detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  patchy::detail::put_floats(out, c.params);
  return out;
}

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4) throw error(errc::corrupt_header, "checkpoint shorter than the length prefix");
  const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t len = u[0] | (u[1] << 8) | (u[2] << 16) | (static_cast<std::uint32_t>(u[3]) << 24);
  if (bytes.size() - 4 < len) throw error(errc::corrupt_header, "header runs past end of checkpoint");
  Checkpoint c;
  std::size_t count = 0;
  try {
    auto j = nlohmann::json::parse(bytes.substr(4, len));
    c.model = j.at("model").get<std::string>();
    c.shape.width = j.at("w");
    c.shape.field_size = j.at("k");
    c.shape.node_channels = j.at("a_v");
    c.shape.edge_channels = j.at("a_e");
    c.shape.classes = j.at("classes");
    c.shape.merge_edges = j.at("merge_edges");
    c.shape.conv1_channels = j.at("conv1_channels");
    c.shape.conv2_channels = j.at("conv2_channels");
    c.shape.conv2_size = j.at("conv2_size");
    c.shape.dense_units = j.at("dense_units");
    c.config.epochs = j.at("epochs");
    c.config.batch_size = j.at("batch_size");
    c.config.learning_rate = j.at("learning_rate");
    c.config.decay = j.at("decay");
    c.config.epsilon = j.at("epsilon");
    c.config.dropout = j.at("dropout");
    c.config.weight_decay = j.at("weight_decay");
    c.config.seed = j.at("seed");
    c.config.merge_edges = c.shape.merge_edges;
    count = j.at("parameter_count");
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::corrupt_header, e.what());
  }
  const auto payload = bytes.size() - 4 - len;
  if (payload < count * 4) throw error(errc::truncated_payload, "checkpoint payload is short");
  if (payload > count * 4) throw error(errc::corrupt_header, "trailing bytes after checkpoint payload");
  patchy::detail::get_floats(u + 4 + len, count, c.params);
  return c;
}

inline Checkpoint make_checkpoint(const Cnn<float>& m, const TrainConfig& cfg) {
  return {"pscn", m.shape(), cfg, m.params()};
}

inline Checkpoint make_checkpoint(const LogReg& m, const TensorBatch& like, const TrainConfig& cfg) {
  auto shape = shape_for(like, m.classes(), false);
  return {"pslr", shape, cfg, m.params()};
}

inline Cnn<float> cnn_from_checkpoint(const Checkpoint& c) {
  if (c.model != "pscn") throw error(errc::shape_mismatch, "checkpoint holds a " + c.model + " model");
  Cnn<float> m(c.shape, 0);
  if (m.parameter_count() != c.params.size())
    throw error(errc::shape_mismatch, "checkpoint parameter count does not match its shape");
  m.params() = c.params;
  return m;
}

inline LogReg logreg_from_checkpoint(const Checkpoint& c) {
  if (c.model != "pslr") throw error(errc::shape_mismatch, "checkpoint holds a " + c.model + " model");
  LogReg m(c.shape.node_inputs(), c.shape.classes);
  if (m.params().size() != c.params.size())
    throw error(errc::shape_mismatch, "checkpoint parameter count does not match its shape");
  m.params() = c.params;
  return m;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  patchy::detail::write_all(path, encode_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(patchy::detail::read_all(path));
}

}  // namespace patchy::nn
