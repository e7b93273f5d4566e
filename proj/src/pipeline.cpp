#include "kennel/pipeline.hpp"

#include <algorithm>

#include "kennel/error.hpp"
#include "kennel/rng.hpp"

namespace kennel::pipeline {

std::vector<actionspace::LabelRecord> label_displacements(std::span<const ingest::DisplacementRecord> displacements,
                                                          const actionspace::Codebook& cb) {
  std::vector<actionspace::LabelRecord> out;
  for (const auto& d : displacements) out.push_back({d.frame_id, actionspace::assign(d.displacements, cb)});
  return out;
}

Labelled sync_and_label(const ingest::ImuStreams& imu, std::span<const ingest::Frame> frames,
                        const actionspace::FitOptions& fit, std::int64_t clock_offset_us) {
  Labelled out;
  out.aligned = ingest::align(imu, frames, clock_offset_us);
  out.displacements = ingest::displacements(out.aligned.records);
  out.codebook = actionspace::fit(out.displacements, fit);
  out.labels = label_displacements(out.displacements, out.codebook);
  return out;
}

std::vector<EpisodeTensor> load_episodes(const std::filesystem::path& data_dir, const std::filesystem::path& labels,
                                         int feature_dim) {
  const auto table = featurizer::load_features(data_dir / "features.txt");
  if (feature_dim > 0 && table.dim != feature_dim) {
    fail(errc::kDimMismatch, "features have D=" + std::to_string(table.dim) + ", config says " +
                                 std::to_string(feature_dim));
  }
  const auto label_records = actionspace::read_labels(labels);
  std::vector<ManifestEntry> manifest;
  if (std::filesystem::exists(data_dir / "episodes.txt")) manifest = read_manifest(data_dir / "episodes.txt");
  return assemble_episodes(table, label_records, manifest);
}

RotationIndex index_rotations(std::span<const ingest::DisplacementRecord> displacements) {
  RotationIndex out;
  for (const auto& d : displacements) out.emplace(d.frame_id, d.displacements);
  return out;
}

namespace {

/// Ground-truth rotations for `count` steps from `first_frame`; false if any is missing.
bool collect_rotations(const RotationIndex& index, std::int64_t first_frame, int count, std::vector<JointPoses>& out) {
  out.clear();
  for (int s = 0; s < count; ++s) {
    const auto it = index.find(first_frame + s);
    if (it == index.end()) return false;
    out.push_back(it->second);
  }
  return true;
}

std::vector<eval::NamedReport> score_all(const eval::Sequences& model_pred, const eval::Sequences& truth,
                                         const std::vector<std::vector<Eigen::RowVectorXd>>& probs,
                                         const eval::Sequences& nn_pred, const ActionLabel& mode, int k,
                                         const std::vector<std::vector<JointPoses>>* rot,
                                         const actionspace::Codebook* cb) {
  eval::Sequences mode_pred;
  for (const auto& t : truth) mode_pred.emplace_back(t.size(), mode);
  return {{"model", eval::score(model_pred, truth, probs, k, rot, cb)},
          {"nn", eval::score(nn_pred, truth, {}, k, rot, cb)},
          {"mode", eval::score(mode_pred, truth, {}, k, rot, cb)}};
}

Eigen::VectorXd flatten_rows(const net::Matrix& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

std::vector<eval::NamedReport> evaluate_acting(const acting::ActingModel& model,
                                               std::span<const EpisodeTensor> train,
                                               std::span<const EpisodeTensor> test, const actionspace::Codebook* cb,
                                               const RotationIndex* rotations) {
  const auto& c = model.config();
  const auto train_w = acting::windows(train, c.n_obs, c.n_pred);
  const auto test_w = acting::windows(test, c.n_obs, c.n_pred);
  if (train_w.empty()) fail(errc::kEmptyTrainingSet, "no training windows for the baselines");
  if (test_w.empty()) fail(errc::kEmptyInput, "no held-out windows to evaluate");
  const auto pred = acting::predict_windows(model, test, test_w);

  std::vector<Eigen::VectorXd> keys, queries;
  eval::Sequences train_labels;
  std::vector<ActionLabel> flat_train;
  for (const auto& w : train_w) {
    keys.push_back(flatten_rows(acting::window_features(train[w.episode], w, c.n_obs)));
    train_labels.push_back(acting::window_targets(train[w.episode], w, c.n_obs, c.n_pred));
  }
  for (const auto& ep : train) flat_train.insert(flat_train.end(), ep.labels.begin(), ep.labels.end());
  for (const auto& w : test_w) queries.push_back(flatten_rows(acting::window_features(test[w.episode], w, c.n_obs)));

  std::vector<std::vector<JointPoses>> rot;
  bool have_rot = rotations != nullptr && cb != nullptr;
  for (std::size_t i = 0; have_rot && i < test_w.size(); ++i) {
    const auto& w = test_w[i];
    rot.emplace_back();
    have_rot = collect_rotations(*rotations, test[w.episode].first_frame + w.start + c.n_obs - 1, c.n_pred, rot.back());
  }
  return score_all(pred.predicted, pred.truth, pred.probabilities, eval::nn_baseline(keys, train_labels, queries),
                   eval::mode_baseline(flat_train, c.classes), c.classes, have_rot ? &rot : nullptr,
                   have_rot ? cb : nullptr);
}

std::vector<eval::NamedReport> evaluate_planning(const planning::PlanningModel& model,
                                                 std::span<const EpisodeTensor> train,
                                                 std::span<const EpisodeTensor> test,
                                                 const actionspace::Codebook* cb, const RotationIndex* rotations) {
  const auto& c = model.config();
  const auto train_i = planning::items(train, c.horizon);
  const auto test_i = planning::items(test, c.horizon);
  if (train_i.empty()) fail(errc::kEmptyTrainingSet, "no training items for the baselines");
  if (test_i.empty()) fail(errc::kEmptyInput, "no held-out items to evaluate");
  const auto pred = planning::predict_items(model, test, test_i);

  auto key = [&](std::span<const EpisodeTensor> eps, const planning::Item& it) {
    const auto& f = eps[it.episode].features;
    Eigen::VectorXd k(2 * f.cols());
    k << f.row(it.start).transpose(), f.row(it.start + c.horizon).transpose();
    return k;
  };
  std::vector<Eigen::VectorXd> keys, queries;
  eval::Sequences train_labels;
  std::vector<ActionLabel> flat_train;
  for (const auto& it : train_i) {
    keys.push_back(key(train, it));
    train_labels.push_back(planning::item_targets(train[it.episode], it, c.horizon));
  }
  for (const auto& ep : train) flat_train.insert(flat_train.end(), ep.labels.begin(), ep.labels.end());
  for (const auto& it : test_i) queries.push_back(key(test, it));

  std::vector<std::vector<JointPoses>> rot;
  bool have_rot = rotations != nullptr && cb != nullptr;
  for (std::size_t i = 0; have_rot && i < test_i.size(); ++i) {
    rot.emplace_back();
    have_rot = collect_rotations(*rotations, test[test_i[i].episode].first_frame + test_i[i].start, c.horizon,
                                 rot.back());
  }
  return score_all(pred.predicted, pred.truth, pred.probabilities, eval::nn_baseline(keys, train_labels, queries),
                   eval::mode_baseline(flat_train, c.classes), c.classes, have_rot ? &rot : nullptr,
                   have_rot ? cb : nullptr);
}

namespace {

std::vector<EpisodeTensor> random_episodes(Rng& rng, int count, int frames, int dim, int k) {
  std::vector<EpisodeTensor> out;
  for (int e = 0; e < count; ++e) {
    EpisodeTensor ep;
    ep.first_frame = static_cast<std::int64_t>(e) * (frames + 1);
    ep.features.resize(frames, dim);
    for (Eigen::Index i = 0; i < ep.features.size(); ++i) ep.features.data()[i] = rng.uniform(-1.0, 1.0);
    for (int t = 0; t + 1 < frames; ++t) {
      ActionLabel a{};
      for (auto& c : a) c = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
      ep.labels.push_back(a);
    }
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace

std::vector<NamedGradCheck> model_gradient_checks(const GradCheckSetup& setup) {
  constexpr int k = actionspace::kDefaultClasses;
  const int n = setup.steps;
  Rng rng(setup.seed);
  std::vector<NamedGradCheck> out;

  acting::ActingModel act({setup.feature_dim, setup.feature_dim, setup.hidden, std::max(1, setup.hidden / 2), k, n, n},
                          setup.seed);
  const auto act_eps = random_episodes(rng, 2, 2 * n + 1, setup.feature_dim, k);
  const auto wins = acting::windows(act_eps, n, n);
  auto act_freqs = count_labels(act_eps, k);
  for (auto& joint : act_freqs)
    for (auto& f : joint) f += 1;
  out.push_back({"act", net::gradient_check(act.params(), [&](net::Graph& g) {
                   return acting::batch_loss(act, g, act_eps, wins, act_freqs);
                 })});

  planning::PlanningModel plan({setup.feature_dim, setup.hidden, k, n}, setup.seed);
  const auto plan_eps = random_episodes(rng, 2, n + 2, setup.feature_dim, k);
  const auto its = planning::items(plan_eps, n);
  auto plan_freqs = count_labels(plan_eps, k);
  for (auto& joint : plan_freqs)
    for (auto& f : joint) f += 1;
  out.push_back({"plan", net::gradient_check(plan.params(), [&](net::Graph& g) {
                   return planning::batch_loss(plan, g, plan_eps, its, plan_freqs);
                 })});
  return out;
}

}  // namespace kennel::pipeline
