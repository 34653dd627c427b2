#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchy/error.hpp"
#include "patchy/rng.hpp"

namespace patchy::nn {

/// Layer sizes of the patch network. conv2 is clamped to the width when the
/// width is smaller than `conv2_size`.
struct NetShape {
  std::size_t width = 1;
  std::size_t field_size = 1;
  std::size_t node_channels = 0;
  std::size_t edge_channels = 0;
  std::size_t classes = 2;
  bool merge_edges = false;
  std::size_t conv1_channels = 16;
  std::size_t conv2_channels = 8;
  std::size_t conv2_size = 10;
  std::size_t dense_units = 128;

  std::size_t node_inputs() const noexcept { return width * field_size * node_channels; }
  std::size_t edge_inputs() const noexcept { return width * field_size * field_size * edge_channels; }
  std::size_t node_kernel() const noexcept { return field_size * node_channels; }
  std::size_t edge_kernel() const noexcept { return field_size * field_size * edge_channels; }
  std::size_t conv1_out() const noexcept { return merge_edges ? 2 * conv1_channels : conv1_channels; }
  std::size_t conv2_kernel() const noexcept { return std::min(conv2_size, width); }
  std::size_t conv2_length() const noexcept { return width - conv2_kernel() + 1; }
  std::size_t flat() const noexcept { return conv2_length() * conv2_channels; }

  void validate() const {
    if (width < 1 || field_size < 1) throw error(errc::bad_params, "width and field size must be positive");
    if (classes < 2) throw error(errc::degenerate_labels, "need at least two classes");
    if (conv1_channels < 1 || conv2_channels < 1 || conv2_size < 1 || dense_units < 1)
      throw error(errc::bad_params, "layer sizes must be positive");
  }

  friend bool operator==(const NetShape&, const NetShape&) = default;
};

/// Offsets of each tensor in the flat parameter vector.
struct ParamLayout {
  std::size_t w1, b1, w1e, b1e, w2, b2, w3, b3, w4, b4, total;

  explicit ParamLayout(const NetShape& s) {
    std::size_t at = 0;
    auto take = [&at](std::size_t n) {
      auto o = at;
      at += n;
      return o;
    };
    w1 = take(s.conv1_channels * s.node_kernel());
    b1 = take(s.conv1_channels);
    w1e = take(s.merge_edges ? s.conv1_channels * s.edge_kernel() : 0);
    b1e = take(s.merge_edges ? s.conv1_channels : 0);
    w2 = take(s.conv2_channels * s.conv2_kernel() * s.conv1_out());
    b2 = take(s.conv2_channels);
    w3 = take(s.dense_units * s.flat());
    b3 = take(s.dense_units);
    w4 = take(s.classes * s.dense_units);
    b4 = take(s.classes);
    total = at;
  }
};

inline std::size_t parameter_count(const NetShape& s) { return ParamLayout(s).total; }

template <typename T>
struct SampleView {
  std::span<const T> node;
  std::span<const T> edge;
};

/// Activations kept by a forward pass for the backward pass.
template <typename T>
struct ForwardCache {
  bool valid = false;
  std::vector<SampleView<T>> inputs;
  std::vector<T> h1;     // batch x width x conv1_out, after ReLU
  std::vector<T> h2;     // batch x conv2_length x conv2_channels, after ReLU
  std::vector<T> h3;     // batch x dense, after ReLU, before dropout
  std::vector<T> mask;   // batch x dense, 0 or 1/(1-p); 1 in eval mode
  std::vector<T> probs;  // batch x classes
};

/// Two 1-D convolutions over the field sequence, a ReLU dense layer with
/// inverted dropout, and a softmax output. The first convolution has kernel
/// and stride equal to one field, so it maps each field to `conv1_channels`
/// values. With `merge_edges` a second first-layer branch reads the edge
/// fields and its channels are concatenated with the node branch.
template <typename T>
class Cnn {
 public:
  Cnn() = default;

  Cnn(const NetShape& shape, std::uint64_t seed) : shape_(shape), layout_(shape) {
    shape_.validate();
    params_.assign(layout_.total, T(0));
    Rng rng(seed);
    auto fill = [&](std::size_t off, std::size_t count, std::size_t fan_in, double gain) {
      const double lim = std::sqrt(gain / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
      for (std::size_t i = 0; i < count; ++i) params_[off + i] = static_cast<T>(rng.uniform(-lim, lim));
    };
    const auto& s = shape_;
    fill(layout_.w1, s.conv1_channels * s.node_kernel(), s.node_kernel(), 6.0);
    if (s.merge_edges) fill(layout_.w1e, s.conv1_channels * s.edge_kernel(), s.edge_kernel(), 6.0);
    fill(layout_.w2, s.conv2_channels * s.conv2_kernel() * s.conv1_out(), s.conv2_kernel() * s.conv1_out(), 6.0);
    fill(layout_.w3, s.dense_units * s.flat(), s.flat(), 6.0);
    fill(layout_.w4, s.classes * s.dense_units, s.dense_units, 3.0);
  }

  const NetShape& shape() const noexcept { return shape_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::vector<T>& params() noexcept { return params_; }
  const std::vector<T>& params() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  template <typename U>
  Cnn<U> cast() const {
    Cnn<U> out(shape_, 0);
    for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i] = static_cast<U>(params_[i]);
    return out;
  }

  /// Class probabilities, batch x classes. Dropout masks are drawn from
  /// `dropout_rng` and only when `train` is set.
  std::vector<T> forward(std::span<const SampleView<T>> xs, bool train, Rng* dropout_rng = nullptr,
                         double dropout = 0.5, ForwardCache<T>* cache = nullptr) const {
    const auto& s = shape_;
    const auto& L = layout_;
    const std::size_t B = xs.size();
    const std::size_t C1 = s.conv1_out(), K2 = s.conv2_kernel(), L2 = s.conv2_length();
    const std::size_t O2 = s.conv2_channels, D = s.dense_units, C = s.classes, F = s.flat();
    for (std::size_t b = 0; b < B; ++b) {
      if (xs[b].node.size() != s.node_inputs())
        throw error(errc::shape_mismatch, "sample " + std::to_string(b) + " node tensor has " +
                                              std::to_string(xs[b].node.size()) + " values, expected " +
                                              std::to_string(s.node_inputs()));
      if (s.merge_edges && xs[b].edge.size() != s.edge_inputs())
        throw error(errc::shape_mismatch, "sample " + std::to_string(b) + " edge tensor has " +
                                              std::to_string(xs[b].edge.size()) + " values, expected " +
                                              std::to_string(s.edge_inputs()));
    }
    if (train && dropout > 0 && !dropout_rng)
      throw error(errc::bad_params, "training forward pass needs a dropout stream");

    ForwardCache<T> local;
    ForwardCache<T>& c = cache ? *cache : local;
    c.valid = false;
    c.inputs.assign(xs.begin(), xs.end());
    c.h1.assign(B * s.width * C1, T(0));
    c.h2.assign(B * F, T(0));
    c.h3.assign(B * D, T(0));
    c.mask.assign(B * D, T(1));
    c.probs.assign(B * C, T(0));
    const T* p = params_.data();
    const T keep_scale = static_cast<T>(1.0 / (1.0 - dropout));

    for (std::size_t b = 0; b < B; ++b) {
      T* h1 = c.h1.data() + b * s.width * C1;
      conv1(xs[b].node.data(), s.node_kernel(), p + L.w1, p + L.b1, h1, 0, C1);
      if (s.merge_edges) conv1(xs[b].edge.data(), s.edge_kernel(), p + L.w1e, p + L.b1e, h1, s.conv1_channels, C1);

      T* h2 = c.h2.data() + b * F;
      for (std::size_t t = 0; t < L2; ++t) {
        for (std::size_t o = 0; o < O2; ++o) {
          const T* w = p + L.w2 + o * K2 * C1;
          const T* in = h1 + t * C1;  // K2 consecutive fields are contiguous
          T acc = p[L.b2 + o];
          for (std::size_t i = 0; i < K2 * C1; ++i) acc += w[i] * in[i];
          h2[t * O2 + o] = acc > 0 ? acc : T(0);
        }
      }

      T* h3 = c.h3.data() + b * D;
      T* mk = c.mask.data() + b * D;
      for (std::size_t j = 0; j < D; ++j) {
        const T* w = p + L.w3 + j * F;
        T acc = p[L.b3 + j];
        for (std::size_t i = 0; i < F; ++i) acc += w[i] * h2[i];
        h3[j] = acc > 0 ? acc : T(0);
      }
      if (train && dropout > 0)
        for (std::size_t j = 0; j < D; ++j) mk[j] = dropout_rng->bernoulli(dropout) ? T(0) : keep_scale;

      T* z = c.probs.data() + b * C;
      for (std::size_t k = 0; k < C; ++k) {
        const T* w = p + L.w4 + k * D;
        T acc = p[L.b4 + k];
        for (std::size_t j = 0; j < D; ++j) acc += w[j] * h3[j] * mk[j];
        z[k] = acc;
      }
      softmax(z, C);
    }
    c.valid = true;
    return c.probs;
  }

  std::vector<T> forward(std::span<const SampleView<T>> xs) const { return forward(xs, false); }

  /// Mean clipped cross-entropy of the cached batch; writes its gradient
  /// into `grad` (resized to the parameter count).
  T backward(const ForwardCache<T>& c, std::span<const int> labels, std::vector<T>& grad) const {
    if (!c.valid) throw error(errc::missing_cache, "backward called without a forward cache");
    const auto& s = shape_;
    const auto& L = layout_;
    const std::size_t B = c.inputs.size();
    if (labels.size() != B)
      throw error(errc::shape_mismatch, std::to_string(labels.size()) + " labels for a batch of " + std::to_string(B));
    const std::size_t C1 = s.conv1_out(), K2 = s.conv2_kernel(), L2 = s.conv2_length();
    const std::size_t O2 = s.conv2_channels, D = s.dense_units, C = s.classes, F = s.flat();
    grad.assign(params_.size(), T(0));
    const T* p = params_.data();
    T* g = grad.data();
    const T inv_b = T(1) / static_cast<T>(B);
    const T clip = static_cast<T>(1e-7);

    std::vector<T> dz(C), dh3(D), dh2(F), dh1(s.width * C1);
    T loss = 0;
    for (std::size_t b = 0; b < B; ++b) {
      const auto y = labels[b];
      if (y < 0 || static_cast<std::size_t>(y) >= C)
        throw error(errc::index_out_of_range, "label " + std::to_string(y) + " outside 0.." + std::to_string(C - 1));
      const T* pr = c.probs.data() + b * C;
      const T py = pr[static_cast<std::size_t>(y)];
      loss += -std::log(std::max(py, clip));
      // below the clip the loss is flat in the logits
      const bool clipped = py < clip;
      for (std::size_t k = 0; k < C; ++k)
        dz[k] = clipped ? T(0) : (pr[k] - (static_cast<std::size_t>(y) == k ? T(1) : T(0))) * inv_b;

      const T* h3 = c.h3.data() + b * D;
      const T* mk = c.mask.data() + b * D;
      std::fill(dh3.begin(), dh3.end(), T(0));
      for (std::size_t k = 0; k < C; ++k) {
        g[L.b4 + k] += dz[k];
        const T* w = p + L.w4 + k * D;
        T* gw = g + L.w4 + k * D;
        for (std::size_t j = 0; j < D; ++j) {
          gw[j] += dz[k] * h3[j] * mk[j];
          dh3[j] += w[j] * dz[k];
        }
      }

      const T* h2 = c.h2.data() + b * F;
      std::fill(dh2.begin(), dh2.end(), T(0));
      for (std::size_t j = 0; j < D; ++j) {
        const T da = h3[j] > 0 ? dh3[j] * mk[j] : T(0);
        if (da == T(0)) continue;
        g[L.b3 + j] += da;
        const T* w = p + L.w3 + j * F;
        T* gw = g + L.w3 + j * F;
        for (std::size_t i = 0; i < F; ++i) {
          gw[i] += da * h2[i];
          dh2[i] += w[i] * da;
        }
      }

      const T* h1 = c.h1.data() + b * s.width * C1;
      std::fill(dh1.begin(), dh1.end(), T(0));
      for (std::size_t t = 0; t < L2; ++t) {
        for (std::size_t o = 0; o < O2; ++o) {
          const T da = h2[t * O2 + o] > 0 ? dh2[t * O2 + o] : T(0);
          if (da == T(0)) continue;
          g[L.b2 + o] += da;
          const T* w = p + L.w2 + o * K2 * C1;
          T* gw = g + L.w2 + o * K2 * C1;
          const T* in = h1 + t * C1;
          T* din = dh1.data() + t * C1;
          for (std::size_t i = 0; i < K2 * C1; ++i) {
            gw[i] += da * in[i];
            din[i] += w[i] * da;
          }
        }
      }

      for (std::size_t i = 0; i < s.width * C1; ++i)
        if (!(h1[i] > 0)) dh1[i] = T(0);
      conv1_backward(c.inputs[b].node.data(), s.node_kernel(), dh1.data(), 0, C1, g + L.w1, g + L.b1);
      if (s.merge_edges)
        conv1_backward(c.inputs[b].edge.data(), s.edge_kernel(), dh1.data(), s.conv1_channels, C1, g + L.w1e, g + L.b1e);
    }
    return loss * inv_b;
  }

 private:
  void conv1(const T* x, std::size_t kernel, const T* w, const T* bias, T* out, std::size_t channel_offset,
             std::size_t out_stride) const {
    const auto O = shape_.conv1_channels;
    for (std::size_t f = 0; f < shape_.width; ++f) {
      const T* in = x + f * kernel;
      T* h = out + f * out_stride + channel_offset;
      for (std::size_t o = 0; o < O; ++o) {
        const T* wo = w + o * kernel;
        T acc = bias[o];
        for (std::size_t i = 0; i < kernel; ++i) acc += wo[i] * in[i];
        h[o] = acc > 0 ? acc : T(0);
      }
    }
  }

  void conv1_backward(const T* x, std::size_t kernel, const T* da, std::size_t channel_offset,
                      std::size_t stride, T* gw, T* gb) const {
    const auto O = shape_.conv1_channels;
    for (std::size_t f = 0; f < shape_.width; ++f) {
      const T* in = x + f * kernel;
      const T* d = da + f * stride + channel_offset;
      for (std::size_t o = 0; o < O; ++o) {
        if (d[o] == T(0)) continue;
        gb[o] += d[o];
        T* g = gw + o * kernel;
        for (std::size_t i = 0; i < kernel; ++i) g[i] += d[o] * in[i];
      }
    }
  }

  static void softmax(T* z, std::size_t n) {
    const T m = *std::max_element(z, z + n);
    T sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += (z[i] = std::exp(z[i] - m));
    for (std::size_t i = 0; i < n; ++i) z[i] /= sum;
  }

  NetShape shape_;
  ParamLayout layout_{NetShape{}};
  std::vector<T> params_;
};

}  // namespace patchy::nn
