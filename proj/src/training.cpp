#include "kennel/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "kennel/error.hpp"
#include "kennel/rng.hpp"

namespace kennel {

double frequency_scale(const std::vector<std::vector<std::int64_t>>& freqs) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& joint : freqs) {
    for (auto f : joint) total += static_cast<double>(f);
    n += joint.size();
  }
  return n == 0 || total <= 0.0 ? 1.0 : total / static_cast<double>(n);
}

TrainResult run_training(net::ParamStore& params, std::size_t n_items, const TrainConfig& config, double loss_scale,
                         const BatchLoss& build) {
  if (n_items == 0) fail(errc::kEmptyTrainingSet, "no training items");
  if (config.epochs < 0 || config.batch_size < 1 || !(config.lr > 0.0)) {
    fail(errc::kConfig, "training needs epochs >= 0, batch_size >= 1 and lr > 0");
  }
  Rng rng(config.seed);
  std::vector<std::size_t> order(n_items);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);

  TrainResult result;
  params.zero_grad();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n_items; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    double total = 0.0;
    for (std::size_t at = 0; at < n_items; at += batch) {
      const auto idx = std::span(order).subspan(at, std::min(batch, n_items - at));
      net::Graph g(&params);
      const net::Var loss = build(g, idx);
      const double value = g.value(loss)(0, 0);
      if (!std::isfinite(value)) fail(errc::kNonFinite, "training loss diverged at epoch " + std::to_string(epoch));
      total += value * static_cast<double>(idx.size());
      g.backward(g.scale(loss, loss_scale));
      if (config.clip_norm > 0.0) clip_grad_norm(params, config.clip_norm);
      sgd_step(params, config.lr, config.momentum);
    }
    result.loss_curve.push_back(total / static_cast<double>(n_items));
  }
  return result;
}

}  // namespace kennel
