#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "patchy/error.hpp"
#include "patchy/nn/cnn.hpp"
#include "patchy/nn/optim.hpp"
#include "patchy/receptive_field.hpp"
#include "patchy/rng.hpp"

namespace patchy::nn {

/// Seed streams derived from TrainConfig::seed.
enum stream : std::uint64_t { init_stream = 0, shuffle_stream = 1, dropout_stream = 2 };

inline std::size_t count_classes(std::span<const int> labels) {
  if (labels.empty()) throw error(errc::too_few_samples, "no samples");
  for (auto y : labels)
    if (y < 0) throw error(errc::index_out_of_range, "negative class label " + std::to_string(y));
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw error(errc::degenerate_labels, "labels contain a single class");
  return static_cast<std::size_t>(*distinct.rbegin()) + 1;
}

inline NetShape shape_for(const TensorBatch& b, std::size_t classes, bool merge_edges) {
  NetShape s;
  s.width = b.width;
  s.field_size = b.field_size;
  s.node_channels = b.node_channels;
  s.edge_channels = b.edge_channels;
  s.classes = classes;
  s.merge_edges = merge_edges;
  return s;
}

inline std::vector<SampleView<float>> views(std::span<const TensorBatch> batches) {
  std::vector<SampleView<float>> out;
  out.reserve(batches.size());
  for (const auto& b : batches) out.push_back({b.node_tensor, b.edge_tensor});
  return out;
}

struct TrainResult {
  Cnn<float> model;
  std::vector<double> loss_history;  // mean training loss per epoch
};

namespace detail {

inline void check_inputs(std::span<const TensorBatch> batches, std::span<const int> labels) {
  if (batches.size() != labels.size())
    throw error(errc::shape_mismatch, std::to_string(batches.size()) + " samples but " +
                                          std::to_string(labels.size()) + " labels");
  if (batches.empty()) throw error(errc::too_few_samples, "no samples");
  const auto& f = batches.front();
  for (const auto& b : batches)
    if (b.width != f.width || b.field_size != f.field_size || b.node_channels != f.node_channels ||
        b.edge_channels != f.edge_channels)
      throw error(errc::heterogeneous_batches, "samples differ in tensor shape");
}

/// Minibatch loop shared by the network and the linear baseline. `step`
/// receives the batch indices and returns the batch's mean loss.
inline std::vector<double> run_epochs(std::size_t n, const TrainConfig& cfg,
                                      const std::function<double(std::span<const std::size_t>)>& step) {
  std::vector<double> history;
  Rng shuffle(mix_seed(cfg.seed, shuffle_stream));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    shuffle.shuffle(std::span<std::size_t>(order));
    double total = 0;
    for (std::size_t at = 0; at < n; at += cfg.batch_size) {
      const auto len = std::min(cfg.batch_size, n - at);
      total += step(std::span<const std::size_t>(order).subspan(at, len)) * static_cast<double>(len);
    }
    history.push_back(total / static_cast<double>(n));
  }
  return history;
}

}  // namespace detail

inline TrainResult train_with_classes(std::span<const TensorBatch> batches, std::span<const int> labels,
                                      std::size_t classes, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_inputs(batches, labels);
  TrainResult r;
  r.model = Cnn<float>(shape_for(batches.front(), classes, cfg.merge_edges), mix_seed(cfg.seed, init_stream));
  auto xs = views(batches);
  Rng drop(mix_seed(cfg.seed, dropout_stream));
  std::vector<float> grad, state(r.model.parameter_count(), 0.0f);
  std::vector<SampleView<float>> bx;
  std::vector<int> by;
  ForwardCache<float> cache;
  r.loss_history = detail::run_epochs(batches.size(), cfg, [&](std::span<const std::size_t> idx) {
    bx.clear();
    by.clear();
    for (auto i : idx) {
      bx.push_back(xs[i]);
      by.push_back(labels[i]);
    }
    r.model.forward(bx, true, &drop, cfg.dropout, &cache);
    const double loss = r.model.backward(cache, by, grad);
    rmsprop_step(r.model.params(), grad, state, cfg);
    return loss;
  });
  return r;
}

/// Trains a freshly initialized network; the class count is max(label) + 1.
inline TrainResult train(std::span<const TensorBatch> batches, std::span<const int> labels,
                         const TrainConfig& cfg) {
  detail::check_inputs(batches, labels);
  return train_with_classes(batches, labels, count_classes(labels), cfg);
}

template <typename Model>
std::vector<int> predict(const Model& m, std::span<const TensorBatch> batches) {
  std::vector<int> out;
  if (batches.empty()) return out;
  auto xs = views(batches);
  auto probs = m.forward(xs);
  const auto C = probs.size() / xs.size();
  for (std::size_t b = 0; b < xs.size(); ++b) {
    auto it = probs.begin() + static_cast<std::ptrdiff_t>(b * C);
    out.push_back(static_cast<int>(std::max_element(it, it + static_cast<std::ptrdiff_t>(C)) - it));
  }
  return out;
}

template <typename Model>
double accuracy(const Model& m, std::span<const TensorBatch> batches, std::span<const int> labels) {
  auto pred = predict(m, batches);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Multinomial logistic regression on the flattened node tensor.

class LogReg {
 public:
  LogReg() = default;
  LogReg(std::size_t inputs, std::size_t classes) : inputs_(inputs), classes_(classes) {
    if (classes < 2) throw error(errc::degenerate_labels, "need at least two classes");
    params_.assign(classes * inputs + classes, 0.0f);
  }

  std::size_t inputs() const noexcept { return inputs_; }
  std::size_t classes() const noexcept { return classes_; }
  std::vector<float>& params() noexcept { return params_; }
  const std::vector<float>& params() const noexcept { return params_; }
  /// Weight of feature i for class c.
  float weight(std::size_t c, std::size_t i) const { return params_[c * inputs_ + i]; }
  float bias(std::size_t c) const { return params_[classes_ * inputs_ + c]; }

  std::vector<float> forward(std::span<const SampleView<float>> xs) const {
    std::vector<float> out(xs.size() * classes_);
    for (std::size_t b = 0; b < xs.size(); ++b) logits(xs[b].node, out.data() + b * classes_);
    return out;
  }

  /// Mean cross-entropy plus 0.5 * l2 * |W|^2; gradient written into `grad`.
  double loss_and_gradient(std::span<const SampleView<float>> xs, std::span<const int> labels, double l2,
                           std::vector<float>& grad) const {
    grad.assign(params_.size(), 0.0f);
    std::vector<float> p(classes_);
    double loss = 0;
    const float inv_b = 1.0f / static_cast<float>(xs.size());
    for (std::size_t b = 0; b < xs.size(); ++b) {
      logits(xs[b].node, p.data());
      const auto y = static_cast<std::size_t>(labels[b]);
      loss += -std::log(std::max(p[y], 1e-7f));
      for (std::size_t c = 0; c < classes_; ++c) {
        const float d = (p[c] - (c == y ? 1.0f : 0.0f)) * inv_b;
        float* g = grad.data() + c * inputs_;
        const auto& x = xs[b].node;
        for (std::size_t i = 0; i < inputs_; ++i) g[i] += d * x[i];
        grad[classes_ * inputs_ + c] += d;
      }
    }
    loss /= static_cast<double>(xs.size());
    if (l2 > 0) {
      for (std::size_t i = 0; i < classes_ * inputs_; ++i) {
        loss += 0.5 * l2 * params_[i] * params_[i];
        grad[i] += static_cast<float>(l2) * params_[i];
      }
    }
    return loss;
  }

 private:
  void logits(std::span<const float> x, float* z) const {
    if (x.size() != inputs_)
      throw error(errc::shape_mismatch, "sample has " + std::to_string(x.size()) + " features, expected " +
                                            std::to_string(inputs_));
    for (std::size_t c = 0; c < classes_; ++c) {
      const float* w = params_.data() + c * inputs_;
      float acc = params_[classes_ * inputs_ + c];
      for (std::size_t i = 0; i < inputs_; ++i) acc += w[i] * x[i];
      z[c] = acc;
    }
    const float m = *std::max_element(z, z + classes_);
    float sum = 0;
    for (std::size_t c = 0; c < classes_; ++c) sum += (z[c] = std::exp(z[c] - m));
    for (std::size_t c = 0; c < classes_; ++c) z[c] /= sum;
  }

  std::size_t inputs_ = 0;
  std::size_t classes_ = 0;
  std::vector<float> params_;
};

struct LogRegResult {
  LogReg model;
  std::vector<double> loss_history;
};

inline LogRegResult train_logreg_with_classes(std::span<const TensorBatch> batches, std::span<const int> labels,
                                              std::size_t classes, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_inputs(batches, labels);
  LogRegResult r{LogReg(batches.front().node_tensor.size(), classes), {}};
  auto xs = views(batches);
  std::vector<float> grad, state(r.model.params().size(), 0.0f);
  std::vector<SampleView<float>> bx;
  std::vector<int> by;
  r.loss_history = detail::run_epochs(batches.size(), cfg, [&](std::span<const std::size_t> idx) {
    bx.clear();
    by.clear();
    for (auto i : idx) {
      bx.push_back(xs[i]);
      by.push_back(labels[i]);
    }
    const double loss = r.model.loss_and_gradient(bx, by, cfg.weight_decay, grad);
    rmsprop_step(r.model.params(), grad, state, cfg);
    return loss;
  });
  return r;
}

inline LogRegResult train_logreg(std::span<const TensorBatch> batches, std::span<const int> labels,
                                 const TrainConfig& cfg) {
  detail::check_inputs(batches, labels);
  return train_logreg_with_classes(batches, labels, count_classes(labels), cfg);
}

// ---------------------------------------------------------------------------
// Cross-validation.

struct FoldResult {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  double accuracy = 0;
};

struct CvReport {
  std::vector<FoldResult> folds;
  double mean = 0;
  double stddev = 0;  // population standard deviation over all folds
  double seconds = 0;

  /// Columns: kind,repeat,fold,value. One `fold` row per fold (value is the
  /// accuracy), then `mean`, `std` and `seconds` summary rows.
  std::string to_csv() const {
    std::string out = "kind,repeat,fold,value\n";
    auto num = [](double x) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", x);
      return std::string(buf);
    };
    for (const auto& f : folds)
      out += "fold," + std::to_string(f.repeat) + "," + std::to_string(f.fold) + "," + num(f.accuracy) + "\n";
    out += "mean,,," + num(mean) + "\n";
    out += "std,,," + num(stddev) + "\n";
    out += "seconds,,," + num(seconds) + "\n";
    return out;
  }
};

/// Round-robin deal of each class's shuffled members, continuing the deal
/// across classes so fold sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t folds,
                                                              std::uint64_t seed) {
  if (folds < 2) throw error(errc::bad_params, "need at least two folds");
  if (labels.size() < folds)
    throw error(errc::too_few_samples, std::to_string(labels.size()) + " samples for " + std::to_string(folds) + " folds");
  std::set<int> classes(labels.begin(), labels.end());
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t next = 0;
  for (int c : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) out[next++ % folds].push_back(i);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

/// `fit_score(train_idx, test_idx, fold_seed)` trains a fresh model and
/// returns its test accuracy.
inline CvReport cross_validate_with(
    std::span<const int> labels, std::size_t folds, std::size_t repeats, std::uint64_t seed,
    const std::function<double(std::span<const std::size_t>, std::span<const std::size_t>, std::uint64_t)>& fit_score) {
  if (repeats < 1) throw error(errc::bad_params, "need at least one repeat");
  count_classes(labels);
  const auto t0 = std::chrono::steady_clock::now();
  CvReport rep;
  for (std::size_t r = 0; r < repeats; ++r) {
    auto parts = stratified_folds(labels, folds, mix_seed(seed, 1000 + r));
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> tr;
      for (std::size_t g = 0; g < folds; ++g)
        if (g != f) tr.insert(tr.end(), parts[g].begin(), parts[g].end());
      std::sort(tr.begin(), tr.end());
      const double acc = fit_score(tr, parts[f], mix_seed(seed, r * folds + f));
      rep.folds.push_back({r, f, acc});
    }
  }
  double sum = 0;
  for (const auto& f : rep.folds) sum += f.accuracy;
  rep.mean = sum / static_cast<double>(rep.folds.size());
  double var = 0;
  for (const auto& f : rep.folds) var += (f.accuracy - rep.mean) * (f.accuracy - rep.mean);
  rep.stddev = std::sqrt(var / static_cast<double>(rep.folds.size()));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace detail {

inline std::vector<TensorBatch> gather(std::span<const TensorBatch> all, std::span<const std::size_t> idx) {
  std::vector<TensorBatch> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

inline std::vector<int> gather(std::span<const int> all, std::span<const std::size_t> idx) {
  std::vector<int> out;
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace detail

/// Stratified k-fold evaluation of the network, each fold trained from
/// scratch with a seed derived from `cfg.seed`, the repeat and the fold.
inline CvReport cross_validate(std::span<const TensorBatch> batches, std::span<const int> labels,
                               const TrainConfig& cfg, std::size_t folds = 10, std::size_t repeats = 1) {
  detail::check_inputs(batches, labels);
  const auto classes = count_classes(labels);
  return cross_validate_with(labels, folds, repeats, cfg.seed,
                             [&](std::span<const std::size_t> tr, std::span<const std::size_t> te, std::uint64_t s) {
                               auto c = cfg;
                               c.seed = s;
                               auto trx = detail::gather(batches, tr);
                               auto try_ = detail::gather(labels, tr);
                               auto m = train_with_classes(trx, try_, classes, c).model;
                               auto tex = detail::gather(batches, te);
                               auto tey = detail::gather(labels, te);
                               return accuracy(m, tex, tey);
                             });
}

inline CvReport cross_validate_logreg(std::span<const TensorBatch> batches, std::span<const int> labels,
                                      const TrainConfig& cfg, std::size_t folds = 10, std::size_t repeats = 1) {
  detail::check_inputs(batches, labels);
  const auto classes = count_classes(labels);
  return cross_validate_with(labels, folds, repeats, cfg.seed,
                             [&](std::span<const std::size_t> tr, std::span<const std::size_t> te, std::uint64_t s) {
                               auto c = cfg;
                               c.seed = s;
                               auto trx = detail::gather(batches, tr);
                               auto try_ = detail::gather(labels, tr);
                               auto m = train_logreg_with_classes(trx, try_, classes, c).model;
                               auto tex = detail::gather(batches, te);
                               auto tey = detail::gather(labels, te);
                               return accuracy(m, tex, tey);
                             });
}

}  // namespace patchy::nn
