#include "kennel/acting.hpp"

#include <string>

#include "kennel/error.hpp"

namespace kennel::acting {

using net::Graph;
using net::Matrix;
using net::Var;

std::vector<Window> windows(std::span<const EpisodeTensor> episodes, int n_obs, int n_pred) {
  std::vector<Window> out;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    for (int s = 0; s + n_obs + n_pred <= episodes[e].frames(); ++s) out.push_back({e, s});
  }
  return out;
}

Matrix window_features(const EpisodeTensor& ep, const Window& w, int n_obs) {
  return ep.features.middleRows(w.start, n_obs);
}

std::vector<ActionLabel> window_targets(const EpisodeTensor& ep, const Window& w, int n_obs, int n_pred) {
  const auto first = ep.labels.begin() + w.start + n_obs - 1;
  return {first, first + n_pred};
}

namespace {

void validate(const ActingConfig& c) {
  if (c.feature_dim < 1 || c.embed_dim < 1 || c.hidden < 1 || c.decoder_input < 1 || c.classes < 2 || c.n_obs < 2 ||
      c.n_pred < 1) {
    fail(errc::kConfig, "acting model needs positive dims, K >= 2, n_obs >= 2 and n_pred >= 1");
  }
}

}  // namespace

ActingModel::ActingModel(const ActingConfig& config, std::uint64_t seed) : config_(config), params_(seed) {
  validate(config_);
  const int d = config_.feature_dim, e = config_.embed_dim, h = config_.hidden, k = config_.classes;
  embed_ = net::Linear(params_, "embed", 2 * d, e);
  encoder_ = net::LstmCell(params_, "encoder", e, h);
  bridge_h_ = net::Linear(params_, "bridge_h", h, h);
  bridge_c_ = net::Linear(params_, "bridge_c", h, h);
  decoder_ = net::LstmCell(params_, "decoder", config_.decoder_input, h);
  feedback_ = net::Linear(params_, "feedback", kJoints * k, config_.decoder_input);
  for (int j = 0; j < kJoints; ++j) heads_.emplace_back(params_, "head" + std::to_string(j), h, k);
}

std::pair<Var, Var> ActingModel::encode_raw(Graph& g, std::span<const Var> frames) const {
  if (frames.size() < 2) fail(errc::kShapeMismatch, "encoding needs at least two frames");
  const auto rows = g.value(frames[0]).rows();
  Var h = g.constant(Matrix::Zero(rows, config_.hidden));
  Var c = g.constant(Matrix::Zero(rows, config_.hidden));
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    std::tie(h, c) = encoder_.step(g, embed_(g, g.concat_cols(frames[i], frames[i + 1])), h, c);
  }
  return {h, c};
}

std::pair<Var, Var> ActingModel::encode(Graph& g, std::span<const Var> frames) const {
  const auto [h, c] = encode_raw(g, frames);
  return {bridge_h_(g, h), bridge_c_(g, c)};
}

std::vector<Var> ActingModel::decode(Graph& g, Var h, Var c, int n_pred) const {
  if (n_pred < 1) fail(errc::kConfig, "n_pred must be at least 1");
  const auto rows = g.value(h).rows();
  Var x = g.constant(Matrix::Zero(rows, config_.decoder_input));
  std::vector<Var> logits;
  for (int s = 0; s < n_pred; ++s) {
    if (s > 0) x = feedback_(g, g.softmax_groups(logits.back(), kJoints));
    std::tie(h, c) = decoder_.step(g, x, h, c);
    Var step = heads_[0](g, h);
    for (int j = 1; j < kJoints; ++j) step = g.concat_cols(step, heads_[static_cast<std::size_t>(j)](g, h));
    logits.push_back(step);
  }
  return logits;
}

namespace {

std::vector<Var> frame_vars(Graph& g, std::span<const Matrix> frames, int dim) {
  std::vector<Var> out;
  for (const auto& f : frames) {
    if (f.cols() != dim) {
      fail(errc::kShapeMismatch, "frame has " + std::to_string(f.cols()) + " features, model expects " +
                                     std::to_string(dim));
    }
    out.push_back(g.constant(f));
  }
  return out;
}

/// Row i of `features` as a 1 x D matrix per frame.
std::vector<Matrix> split_rows(const Matrix& features) {
  std::vector<Matrix> out;
  for (Eigen::Index i = 0; i < features.rows(); ++i) out.emplace_back(features.row(i));
  return out;
}

}  // namespace

net::RecurrentState ActingModel::encode(const Matrix& features) const {
  Graph g(params_);
  const auto rows = split_rows(features);
  const auto [h, c] = encode(g, frame_vars(g, rows, config_.feature_dim));
  return {g.value(h).row(0).transpose(), g.value(c).row(0).transpose()};
}

std::vector<Eigen::RowVectorXd> ActingModel::decode(const net::RecurrentState& state, int n_pred) const {
  if (state.hidden.size() != config_.hidden || state.cell.size() != config_.hidden) {
    fail(errc::kShapeMismatch, "decoder state has the wrong size");
  }
  Graph g(params_);
  const auto logits = decode(g, g.constant(state.hidden.transpose()), g.constant(state.cell.transpose()), n_pred);
  std::vector<Eigen::RowVectorXd> out;
  for (Var l : logits) out.emplace_back(g.value(g.softmax_groups(l, kJoints)).row(0));
  return out;
}

std::vector<ActionLabel> ActingModel::predict(const Matrix& features) const {
  if (features.rows() != config_.n_obs) {
    fail(errc::kShapeMismatch, "predict expects " + std::to_string(config_.n_obs) + " frames, got " +
                                   std::to_string(features.rows()));
  }
  std::vector<ActionLabel> out;
  for (const auto& p : decode(encode(features), config_.n_pred)) out.push_back(net::argmax_groups(p, config_.classes));
  return out;
}

std::vector<Matrix> ActingModel::probabilities(std::span<const Matrix> frames) const {
  Graph g(params_);
  const auto [h, c] = encode(g, frame_vars(g, frames, config_.feature_dim));
  std::vector<Matrix> out;
  for (Var l : decode(g, h, c, config_.n_pred)) out.push_back(g.value(g.softmax_groups(l, kJoints)));
  return out;
}

Matrix ActingModel::encoder_hidden(std::span<const Matrix> frames) const {
  Graph g(params_);
  return g.value(encode_raw(g, frame_vars(g, frames, config_.feature_dim)).first);
}

net::Checkpoint ActingModel::to_checkpoint(std::uint64_t codebook_hash) const {
  return {kCheckpointTag,
          {{"D", config_.feature_dim},
           {"E", config_.embed_dim},
           {"H", config_.hidden},
           {"H_in", config_.decoder_input},
           {"K", config_.classes},
           {"N_obs", config_.n_obs},
           {"N_pred", config_.n_pred}},
          params_.seed(),
          codebook_hash,
          params_.flat_values()};
}

ActingModel ActingModel::from_checkpoint(const net::Checkpoint& ckpt) {
  if (ckpt.tag != kCheckpointTag) fail(errc::kFormat, "checkpoint tag '" + ckpt.tag + "' is not an acting model");
  auto dim = [&](const char* key) { return static_cast<int>(ckpt.dim(key)); };
  ActingModel m({dim("D"), dim("E"), dim("H"), dim("H_in"), dim("K"), dim("N_obs"), dim("N_pred")}, ckpt.seed);
  m.params_.set_flat_values(ckpt.values);
  return m;
}

namespace {

/// Observed frames of a batch stacked per time offset.
std::vector<Matrix> stack_frames(std::span<const EpisodeTensor> episodes, std::span<const Window> batch, int n_obs) {
  const int d = static_cast<int>(episodes[batch[0].episode].features.cols());
  std::vector<Matrix> frames(static_cast<std::size_t>(n_obs), Matrix(static_cast<Eigen::Index>(batch.size()), d));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ep = episodes[batch[b].episode];
    for (int o = 0; o < n_obs; ++o) {
      frames[static_cast<std::size_t>(o)].row(static_cast<Eigen::Index>(b)) = ep.features.row(batch[b].start + o);
    }
  }
  return frames;
}

}  // namespace

Var batch_loss(const ActingModel& model, Graph& g, std::span<const EpisodeTensor> episodes,
               std::span<const Window> batch, const std::vector<std::vector<std::int64_t>>& freqs) {
  const auto& cfg = model.config();
  const auto frames = stack_frames(episodes, batch, cfg.n_obs);
  const auto [h, c] = model.encode(g, frame_vars(g, frames, cfg.feature_dim));
  const auto logits = model.decode(g, h, c, cfg.n_pred);
  std::vector<net::StepLabels> targets(static_cast<std::size_t>(cfg.n_pred));
  for (const auto& w : batch) {
    const auto t = window_targets(episodes[w.episode], w, cfg.n_obs, cfg.n_pred);
    for (std::size_t s = 0; s < t.size(); ++s) targets[s].push_back(t[s]);
  }
  return net::weighted_ce_loss(g, logits, targets, freqs, cfg.classes);
}

TrainResult train(ActingModel& model, std::span<const EpisodeTensor> episodes,
                  const std::vector<std::vector<std::int64_t>>& freqs, const TrainConfig& config) {
  const auto& cfg = model.config();
  const auto wins = windows(episodes, cfg.n_obs, cfg.n_pred);
  if (wins.empty()) {
    fail(errc::kTooShort, "no episode has " + std::to_string(cfg.n_obs + cfg.n_pred) + " frames for a window");
  }
  std::vector<Window> batch;
  return run_training(model.params(), wins.size(), config, frequency_scale(freqs),
                      [&](Graph& g, std::span<const std::size_t> idx) {
                        batch.clear();
                        for (auto i : idx) batch.push_back(wins[i]);
                        return batch_loss(model, g, episodes, batch, freqs);
                      });
}

WindowPredictions predict_windows(const ActingModel& model, std::span<const EpisodeTensor> episodes,
                                  std::span<const Window> wins, std::size_t batch) {
  const auto& cfg = model.config();
  WindowPredictions out;
  for (std::size_t at = 0; at < wins.size(); at += batch) {
    const auto chunk = wins.subspan(at, std::min(batch, wins.size() - at));
    const auto probs = model.probabilities(stack_frames(episodes, chunk, cfg.n_obs));
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      std::vector<ActionLabel> pred;
      std::vector<Eigen::RowVectorXd> rows;
      for (const auto& p : probs) {
        rows.emplace_back(p.row(static_cast<Eigen::Index>(b)));
        pred.push_back(net::argmax_groups(rows.back(), cfg.classes));
      }
      out.predicted.push_back(std::move(pred));
      out.probabilities.push_back(std::move(rows));
      out.truth.push_back(window_targets(episodes[chunk[b].episode], chunk[b], cfg.n_obs, cfg.n_pred));
    }
  }
  return out;
}

}  // namespace kennel::acting
