#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kennel/acting.hpp"
#include "kennel/actionspace.hpp"
#include "kennel/episodes.hpp"
#include "kennel/types.hpp"

namespace kennel::eval {

/// Label sequences of equal length per item: [item][step].
using Sequences = std::vector<std::vector<ActionLabel>>;

/// Per joint, recall of every class that has at least one ground-truth
/// instance (NaN otherwise).
std::vector<std::vector<double>> per_class_recall(std::span<const ActionLabel> preds,
                                                  std::span<const ActionLabel> labels, int k);

/// Mean over supported classes of per-class recall, averaged over joints, in
/// percent. Throws `data.empty` on empty input.
double mean_class_accuracy(std::span<const ActionLabel> preds, std::span<const ActionLabel> labels, int k);

/// Geometric mean of each item's assigned probabilities, then the arithmetic
/// mean over items. Higher is better. Throws `numeric.zero_probability` if
/// any assigned probability is zero and `data.empty` on empty input.
double perplexity(std::span<const std::vector<double>> assigned);

/// Probability each step's distribution assigns to the ground truth, over
/// steps and joints.
std::vector<double> assigned_probabilities(std::span<const Eigen::RowVectorXd> probs,
                                           std::span<const ActionLabel> truth, int k);

/// Mean angular error in degrees between decoded predicted classes and the
/// continuous ground-truth displacements.
double angular_metric(std::span<const ActionLabel> preds, std::span<const JointPoses> truth,
                      const actionspace::Codebook& cb);

/// Percent of steps with all six joints correct.
double all_joint_accuracy(std::span<const ActionLabel> preds, std::span<const ActionLabel> labels);

/// Index of the training key nearest to `query` in Euclidean distance; ties
/// go to the lowest index. Throws `data.empty_training_set`.
std::size_t nearest_neighbor(std::span<const Eigen::VectorXd> keys, const Eigen::VectorXd& query);

/// Label sequence of the nearest training item for every query.
Sequences nn_baseline(std::span<const Eigen::VectorXd> train_keys, const Sequences& train_labels,
                      std::span<const Eigen::VectorXd> queries);

/// Most frequent class per joint; ties go to the lowest index.
ActionLabel mode_baseline(std::span<const ActionLabel> train_labels, int k);

/// Expected percent all-joint accuracy of a predictor that samples each
/// joint independently from the class prior: 100 * prod_j sum_c p_jc^2.
double prior_all_joint_accuracy(const std::vector<std::vector<std::int64_t>>& freqs);

struct MetricReport {
  double mean_class_accuracy = 0.0;
  std::optional<double> perplexity;  // absent for predictors without probabilities
  bool zero_probability = false;     // some ground-truth class got probability 0
  std::optional<double> angular_deg;
  double all_joint_accuracy = 0.0;
  std::array<double, kJoints> joint_accuracy{};  // plain per-joint accuracy, percent
  std::vector<std::vector<double>> recall;       // [joint][class]
  std::size_t items = 0;
  std::size_t steps = 0;
};

/// Scores one predictor. `probs` may be empty (no perplexity); `truth_rotations`
/// and `cb` may be absent (no angular metric).
MetricReport score(const Sequences& predicted, const Sequences& truth,
                   const std::vector<std::vector<Eigen::RowVectorXd>>& probs, int k,
                   const std::vector<std::vector<JointPoses>>* truth_rotations = nullptr,
                   const actionspace::Codebook* cb = nullptr);

struct NamedReport {
  std::string name;
  MetricReport report;
};

/// report.txt (flat table), report.kv (key=value) and recall_<name>.dat
/// (two columns: joint*K+class, recall percent) under `dir`. `extra` rows
/// are appended to the key-value file as-is.
void write_reports(const std::filesystem::path& dir, std::span<const NamedReport> reports,
                   std::span<const std::pair<std::string, std::string>> extra = {});

/// Two-column text file: 1-based index, value.
void write_curve(const std::filesystem::path& path, std::span<const double> values, const std::string& header);

struct ProbeConfig {
  int iterations = 1000;
  double lr = 0.5;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double trained = 0.0;  // held-out scene accuracy, percent
  double random = 0.0;
  bool degenerate = false;  // a single scene class in the training windows
  int classes = 0;
  std::size_t train_windows = 0;
  std::size_t test_windows = 0;
};

/// Multinomial logistic regression on frozen features (rows), standardized
/// with training statistics and fit by seeded full-batch gradient descent.
/// Returns held-out accuracy in percent.
double probe_accuracy(const net::Matrix& train_x, std::span<const int> train_y, const net::Matrix& test_x,
                      std::span<const int> test_y, int classes, const ProbeConfig& config);

/// Final encoder hidden state of every window, trained encoder versus a
/// freshly initialized encoder of the same shape (seeded by `random_seed`).
ProbeResult linear_probe(const acting::ActingModel& trained, std::span<const EpisodeTensor> train_episodes,
                         std::span<const EpisodeTensor> test_episodes, std::uint64_t random_seed,
                         const ProbeConfig& config = {});

}  // namespace kennel::eval
