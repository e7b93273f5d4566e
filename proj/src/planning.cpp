#include "kennel/planning.hpp"

#include <string>

#include "kennel/error.hpp"

namespace kennel::planning {

using net::Graph;
using net::Matrix;
using net::Var;

std::vector<Item> items(std::span<const EpisodeTensor> episodes, int horizon) {
  std::vector<Item> out;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    for (int s = 0; s + horizon < episodes[e].frames(); ++s) out.push_back({e, s});
  }
  return out;
}

std::vector<ActionLabel> item_targets(const EpisodeTensor& ep, const Item& item, int horizon) {
  const auto first = ep.labels.begin() + item.start;
  return {first, first + horizon};
}

PlanningModel::PlanningModel(const PlanningConfig& config, std::uint64_t seed) : config_(config), params_(seed) {
  if (config_.feature_dim < 1 || config_.hidden < 1 || config_.classes < 2 || config_.horizon < 1) {
    fail(errc::kConfig, "planning model needs positive dims, K >= 2 and horizon >= 1");
  }
  const int h = config_.hidden, w = kJoints * config_.classes;
  pair_ = net::Linear(params_, "pair", 2 * config_.feature_dim, h);
  cell_ = net::LstmCell(params_, "cell", h, h);
  head_ = net::Linear(params_, "head", h, w);
  feedback_ = net::Linear(params_, "feedback", w, h);
}

std::vector<Var> PlanningModel::unroll(Graph& g, Var f_start, Var f_end, int horizon, std::vector<Var>* inputs) const {
  if (horizon < 1) fail(errc::kConfig, "horizon must be at least 1");
  const auto rows = g.value(f_start).rows();
  if (g.value(f_start).cols() != config_.feature_dim || g.value(f_end).cols() != config_.feature_dim) {
    fail(errc::kShapeMismatch, "planner expects " + std::to_string(config_.feature_dim) + " features per frame");
  }
  Var h = g.constant(Matrix::Zero(rows, config_.hidden));
  Var c = g.constant(Matrix::Zero(rows, config_.hidden));
  Var x = pair_(g, g.concat_cols(f_start, f_end));
  std::vector<Var> logits;
  for (int s = 0; s < horizon; ++s) {
    if (s > 0) x = feedback_(g, g.softmax_groups(logits.back(), kJoints));
    if (inputs != nullptr) inputs->push_back(x);
    std::tie(h, c) = cell_.step(g, x, h, c);
    logits.push_back(head_(g, h));
  }
  return logits;
}

std::vector<Matrix> PlanningModel::probabilities(const Matrix& f_start, const Matrix& f_end, int horizon) const {
  Graph g(params_);
  std::vector<Matrix> out;
  for (Var l : unroll(g, g.constant(f_start), g.constant(f_end), horizon)) {
    out.push_back(g.value(g.softmax_groups(l, kJoints)));
  }
  return out;
}

std::vector<Eigen::RowVectorXd> PlanningModel::plan(const Eigen::VectorXd& f_start, const Eigen::VectorXd& f_end,
                                                    int horizon) const {
  std::vector<Eigen::RowVectorXd> out;
  for (const auto& p : probabilities(f_start.transpose(), f_end.transpose(), horizon)) out.emplace_back(p.row(0));
  return out;
}

Eigen::RowVectorXd PlanningModel::feedback(const Eigen::RowVectorXd& probs) const {
  Graph g(params_);
  return g.value(feedback_(g, g.constant(probs))).row(0);
}

net::Checkpoint PlanningModel::to_checkpoint(std::uint64_t codebook_hash) const {
  return {kCheckpointTag,
          {{"D", config_.feature_dim}, {"H", config_.hidden}, {"K", config_.classes}, {"horizon", config_.horizon}},
          params_.seed(),
          codebook_hash,
          params_.flat_values()};
}

PlanningModel PlanningModel::from_checkpoint(const net::Checkpoint& ckpt) {
  if (ckpt.tag != kCheckpointTag) fail(errc::kFormat, "checkpoint tag '" + ckpt.tag + "' is not a planning model");
  auto dim = [&](const char* key) { return static_cast<int>(ckpt.dim(key)); };
  PlanningModel m({dim("D"), dim("H"), dim("K"), dim("horizon")}, ckpt.seed);
  m.params_.set_flat_values(ckpt.values);
  return m;
}

namespace {

std::pair<Matrix, Matrix> stack_ends(std::span<const EpisodeTensor> episodes, std::span<const Item> batch,
                                     int horizon) {
  const auto d = episodes[batch[0].episode].features.cols();
  Matrix start(static_cast<Eigen::Index>(batch.size()), d), end(static_cast<Eigen::Index>(batch.size()), d);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ep = episodes[batch[b].episode];
    start.row(static_cast<Eigen::Index>(b)) = ep.features.row(batch[b].start);
    end.row(static_cast<Eigen::Index>(b)) = ep.features.row(batch[b].start + horizon);
  }
  return {start, end};
}

}  // namespace

Var batch_loss(const PlanningModel& model, Graph& g, std::span<const EpisodeTensor> episodes,
               std::span<const Item> batch, const std::vector<std::vector<std::int64_t>>& freqs) {
  const auto& cfg = model.config();
  auto [start, end] = stack_ends(episodes, batch, cfg.horizon);
  const auto logits = model.unroll(g, g.constant(std::move(start)), g.constant(std::move(end)), cfg.horizon);
  std::vector<net::StepLabels> targets(static_cast<std::size_t>(cfg.horizon));
  for (const auto& it : batch) {
    const auto t = item_targets(episodes[it.episode], it, cfg.horizon);
    for (std::size_t s = 0; s < t.size(); ++s) targets[s].push_back(t[s]);
  }
  return net::weighted_ce_loss(g, logits, targets, freqs, cfg.classes);
}

TrainResult train(PlanningModel& model, std::span<const EpisodeTensor> episodes,
                  const std::vector<std::vector<std::int64_t>>& freqs, const TrainConfig& config) {
  const auto all = items(episodes, model.config().horizon);
  if (all.empty()) {
    fail(errc::kTooShort, "no episode spans a horizon of " + std::to_string(model.config().horizon) + " steps");
  }
  std::vector<Item> batch;
  return run_training(model.params(), all.size(), config, frequency_scale(freqs),
                      [&](Graph& g, std::span<const std::size_t> idx) {
                        batch.clear();
                        for (auto i : idx) batch.push_back(all[i]);
                        return batch_loss(model, g, episodes, batch, freqs);
                      });
}

ItemPredictions predict_items(const PlanningModel& model, std::span<const EpisodeTensor> episodes,
                              std::span<const Item> its, std::size_t batch) {
  const auto& cfg = model.config();
  ItemPredictions out;
  for (std::size_t at = 0; at < its.size(); at += batch) {
    const auto chunk = its.subspan(at, std::min(batch, its.size() - at));
    const auto [start, end] = stack_ends(episodes, chunk, cfg.horizon);
    const auto probs = model.probabilities(start, end, cfg.horizon);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      std::vector<ActionLabel> pred;
      std::vector<Eigen::RowVectorXd> rows;
      for (const auto& p : probs) {
        rows.emplace_back(p.row(static_cast<Eigen::Index>(b)));
        pred.push_back(net::argmax_groups(rows.back(), cfg.classes));
      }
      out.predicted.push_back(std::move(pred));
      out.probabilities.push_back(std::move(rows));
      out.truth.push_back(item_targets(episodes[chunk[b].episode], chunk[b], cfg.horizon));
    }
  }
  return out;
}

}  // namespace kennel::planning
