#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchy/error.hpp"

namespace patchy::nn {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double decay = 0.9;  // rmsprop rho
  double epsilon = 1e-8;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  bool merge_edges = false;
  /// L2 penalty, used by the logistic-regression baseline only.
  double weight_decay = 0;

  void validate() const {
    if (batch_size < 1) throw error(errc::bad_params, "batch size must be positive");
    if (!(learning_rate > 0) || !(epsilon > 0)) throw error(errc::bad_params, "learning rate and epsilon must be positive");
    if (!(decay > 0 && decay < 1)) throw error(errc::bad_params, "rmsprop decay must lie in (0, 1)");
    if (!(dropout >= 0 && dropout < 1)) throw error(errc::bad_params, "dropout must lie in [0, 1)");
    if (weight_decay < 0) throw error(errc::bad_params, "weight decay must be non-negative");
  }
};

/// s <- rho s + (1 - rho) g^2;  p <- p - lr g / sqrt(s + eps)
template <typename T>
void rmsprop_step(std::span<T> params, std::span<const T> grads, std::span<T> state,
                  const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.size())
    throw error(errc::shape_mismatch, "rmsprop: params " + std::to_string(params.size()) + ", grads " +
                                          std::to_string(grads.size()) + ", state " +
                                          std::to_string(state.size()));
  const T rho = static_cast<T>(cfg.decay);
  const T lr = static_cast<T>(cfg.learning_rate);
  const T eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    state[i] = rho * state[i] + (T(1) - rho) * g * g;
    params[i] -= lr * g / std::sqrt(state[i] + eps);
  }
}

template <typename T>
void rmsprop_step(std::vector<T>& params, const std::vector<T>& grads, std::vector<T>& state,
                  const TrainConfig& cfg) {
  rmsprop_step(std::span<T>(params), std::span<const T>(grads), std::span<T>(state), cfg);
}

}  // namespace patchy::nn
