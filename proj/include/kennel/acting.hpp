#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kennel/episodes.hpp"
#include "kennel/netcore.hpp"
#include "kennel/training.hpp"

namespace kennel::acting {

struct ActingConfig {
  int feature_dim = 32;    // D
  int embed_dim = 32;      // E, encoder input
  int hidden = 64;         // H
  int decoder_input = 32;  // H_in, decoder input
  int classes = 8;         // K
  int n_obs = 5;
  int n_pred = 5;
};

/// A training or evaluation window: frames start..start+n_obs-1 are observed
/// and the n_pred actions that follow the last observed frame are predicted.
struct Window {
  std::size_t episode = 0;
  int start = 0;
};

/// Every stride-1 window of every episode long enough for n_obs + n_pred frames.
std::vector<Window> windows(std::span<const EpisodeTensor> episodes, int n_obs, int n_pred);

/// Observed feature rows of a window, one row per frame.
net::Matrix window_features(const EpisodeTensor& ep, const Window& w, int n_obs);
/// Ground-truth actions for the predicted steps of a window.
std::vector<ActionLabel> window_targets(const EpisodeTensor& ep, const Window& w, int n_obs, int n_pred);

/// Encoder-decoder over consecutive-frame feature pairs. Parameters are
/// declared in the order embed, encoder, bridge_h, bridge_c, decoder,
/// feedback, head0..head5.
class ActingModel {
 public:
  ActingModel(const ActingConfig& config, std::uint64_t seed);

  const ActingConfig& config() const { return config_; }
  net::ParamStore& params() { return params_; }
  const net::ParamStore& params() const { return params_; }

  /// Final encoder (hidden, cell) before the bridge. `frames[i]` holds frame
  /// i of every batch item (B x D); at least two frames.
  std::pair<net::Var, net::Var> encode_raw(net::Graph& g, std::span<const net::Var> frames) const;
  /// Bridged decoder initial state.
  std::pair<net::Var, net::Var> encode(net::Graph& g, std::span<const net::Var> frames) const;
  /// Per-step logits (B x 6K). Each step's softmax output is fed back through
  /// the feedback embed as the next input; the first input is zero.
  std::vector<net::Var> decode(net::Graph& g, net::Var h, net::Var c, int n_pred) const;

  /// Single-sequence inference on frames 1..t (rows of `features`).
  net::RecurrentState encode(const net::Matrix& features) const;
  /// n_pred probability rows of width 6K.
  std::vector<Eigen::RowVectorXd> decode(const net::RecurrentState& state, int n_pred) const;
  /// Argmax per step and joint; ties go to the lowest class. Requires n_obs rows.
  std::vector<ActionLabel> predict(const net::Matrix& features) const;

  /// Batched probabilities for windows stacked as n_obs matrices of B x D.
  std::vector<net::Matrix> probabilities(std::span<const net::Matrix> frames) const;
  /// Final raw encoder hidden state per batch item (B x H).
  net::Matrix encoder_hidden(std::span<const net::Matrix> frames) const;

  net::Checkpoint to_checkpoint(std::uint64_t codebook_hash) const;
  /// Throws `format.error` if the tag or dimensions do not describe this architecture.
  static ActingModel from_checkpoint(const net::Checkpoint& ckpt);

 private:
  ActingConfig config_;
  net::ParamStore params_;
  net::Linear embed_;
  net::LstmCell encoder_;
  net::Linear bridge_h_, bridge_c_;
  net::LstmCell decoder_;
  net::Linear feedback_;
  std::vector<net::Linear> heads_;
};

inline constexpr const char* kCheckpointTag = "act1";

/// Weighted loss of a batch of windows on graph `g`.
net::Var batch_loss(const ActingModel& model, net::Graph& g, std::span<const EpisodeTensor> episodes,
                    std::span<const Window> batch, const std::vector<std::vector<std::int64_t>>& freqs);

/// Minibatch training over all stride-1 windows without teacher forcing.
/// Throws `data.too_short` if no episode is long enough.
TrainResult train(ActingModel& model, std::span<const EpisodeTensor> episodes,
                  const std::vector<std::vector<std::int64_t>>& freqs, const TrainConfig& config);

/// Predictions and ground truth for every window, batched.
struct WindowPredictions {
  std::vector<std::vector<ActionLabel>> predicted;  // [window][step]
  std::vector<std::vector<ActionLabel>> truth;
  std::vector<std::vector<Eigen::RowVectorXd>> probabilities;  // [window][step], width 6K
};
WindowPredictions predict_windows(const ActingModel& model, std::span<const EpisodeTensor> episodes,
                                  std::span<const Window> wins, std::size_t batch = 256);

}  // namespace kennel::acting
