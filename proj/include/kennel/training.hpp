#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kennel/netcore.hpp"

namespace kennel {

struct TrainConfig {
  double lr = 0.3;
  double momentum = 0.9;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;     // minibatch order
  double clip_norm = 1.0;     // global gradient norm cap; <= 0 disables
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean weighted loss per epoch, before that epoch's last update
};

/// Builds the loss of one minibatch on a fresh graph.
using BatchLoss = std::function<net::Var(net::Graph&, std::span<const std::size_t>)>;

/// Mean class count over joints and classes. The weighted loss divides by
/// counts, so the optimizer steps on loss * scale to keep the learning rate
/// independent of dataset size; the reported curve is unscaled.
double frequency_scale(const std::vector<std::vector<std::int64_t>>& freqs);

/// Seeded minibatch SGD with momentum over items 0..n_items-1. Throws
/// `numeric.non_finite` if the loss diverges.
TrainResult run_training(net::ParamStore& params, std::size_t n_items, const TrainConfig& config, double loss_scale,
                         const BatchLoss& build);

}  // namespace kennel
