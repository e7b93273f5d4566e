#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kennel/episodes.hpp"
#include "kennel/netcore.hpp"
#include "kennel/training.hpp"

namespace kennel::planning {

struct PlanningConfig {
  int feature_dim = 32;  // D
  int hidden = 64;       // H; also the recurrent input width
  int classes = 8;       // K
  int horizon = 5;
};

/// Start frame `start` and end frame `start + horizon` of one episode, with
/// the actions in between as targets.
struct Item {
  std::size_t episode = 0;
  int start = 0;
};

std::vector<Item> items(std::span<const EpisodeTensor> episodes, int horizon);
std::vector<ActionLabel> item_targets(const EpisodeTensor& ep, const Item& item, int horizon);

/// Recurrent planner: the first input is a linear map of the concatenated
/// (start, end) features, later inputs are the previous step's probabilities
/// through the feedback embed. State starts at zero. Parameters are declared
/// pair, cell, head, feedback.
class PlanningModel {
 public:
  PlanningModel(const PlanningConfig& config, std::uint64_t seed);

  const PlanningConfig& config() const { return config_; }
  net::ParamStore& params() { return params_; }
  const net::ParamStore& params() const { return params_; }

  /// Per-step logits (B x 6K) for batches of start and end features (B x D).
  /// `inputs`, when given, receives the recurrent input of every step.
  std::vector<net::Var> unroll(net::Graph& g, net::Var f_start, net::Var f_end, int horizon,
                               std::vector<net::Var>* inputs = nullptr) const;

  /// `horizon` probability rows of width 6K.
  std::vector<Eigen::RowVectorXd> plan(const Eigen::VectorXd& f_start, const Eigen::VectorXd& f_end,
                                       int horizon) const;
  /// Batched probabilities per step (B x 6K).
  std::vector<net::Matrix> probabilities(const net::Matrix& f_start, const net::Matrix& f_end, int horizon) const;

  /// The feedback embed applied to a probability row; used to check the
  /// step-to-step wiring.
  Eigen::RowVectorXd feedback(const Eigen::RowVectorXd& probs) const;

  net::Checkpoint to_checkpoint(std::uint64_t codebook_hash) const;
  static PlanningModel from_checkpoint(const net::Checkpoint& ckpt);

 private:
  PlanningConfig config_;
  net::ParamStore params_;
  net::Linear pair_;
  net::LstmCell cell_;
  net::Linear head_;
  net::Linear feedback_;
};

inline constexpr const char* kCheckpointTag = "plan1";

net::Var batch_loss(const PlanningModel& model, net::Graph& g, std::span<const EpisodeTensor> episodes,
                    std::span<const Item> batch, const std::vector<std::vector<std::int64_t>>& freqs);

/// Throws `data.too_short` if no episode spans the horizon.
TrainResult train(PlanningModel& model, std::span<const EpisodeTensor> episodes,
                  const std::vector<std::vector<std::int64_t>>& freqs, const TrainConfig& config);

struct ItemPredictions {
  std::vector<std::vector<ActionLabel>> predicted;
  std::vector<std::vector<ActionLabel>> truth;
  std::vector<std::vector<Eigen::RowVectorXd>> probabilities;
};
ItemPredictions predict_items(const PlanningModel& model, std::span<const EpisodeTensor> episodes,
                              std::span<const Item> items, std::size_t batch = 256);

}  // namespace kennel::planning
