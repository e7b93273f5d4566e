#include "kennel/eval.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kennel/error.hpp"
#include "kennel/quat.hpp"
#include "kennel/textio.hpp"

namespace kennel::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) fail(errc::kShapeMismatch, std::string(what) + ": sequences differ in length");
  if (a == 0) fail(errc::kEmptyInput, std::string(what) + ": no items to score");
}

std::vector<ActionLabel> flatten(const Sequences& seqs) {
  std::vector<ActionLabel> out;
  for (const auto& s : seqs) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

std::vector<std::vector<double>> per_class_recall(std::span<const ActionLabel> preds,
                                                  std::span<const ActionLabel> labels, int k) {
  require_aligned(preds.size(), labels.size(), "per_class_recall");
  std::vector<std::vector<double>> out(kJoints, std::vector<double>(static_cast<std::size_t>(k), kNaN));
  for (std::size_t j = 0; j < kJoints; ++j) {
    std::vector<double> hit(static_cast<std::size_t>(k), 0.0), support(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const int c = labels[i][j];
      if (c < 0 || c >= k) fail(errc::kIndexOutOfRange, "label " + std::to_string(c) + " outside [0, K)");
      support[static_cast<std::size_t>(c)] += 1.0;
      if (preds[i][j] == c) hit[static_cast<std::size_t>(c)] += 1.0;
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (support[c] > 0.0) out[j][c] = hit[c] / support[c];
    }
  }
  return out;
}

double mean_class_accuracy(std::span<const ActionLabel> preds, std::span<const ActionLabel> labels, int k) {
  const auto recall = per_class_recall(preds, labels, k);
  double total = 0.0;
  for (const auto& joint : recall) {
    double sum = 0.0;
    int n = 0;
    for (double r : joint) {
      if (!std::isnan(r)) {
        sum += r;
        ++n;
      }
    }
    total += sum / n;
  }
  return 100.0 * total / kJoints;
}

double perplexity(std::span<const std::vector<double>> assigned) {
  if (assigned.empty()) fail(errc::kEmptyInput, "perplexity of no items");
  double total = 0.0;
  for (const auto& item : assigned) {
    if (item.empty()) fail(errc::kEmptyInput, "perplexity of an empty sequence");
    double log_sum = 0.0;
    for (double p : item) {
      if (!(p > 0.0)) fail(errc::kZeroProbability, "a ground-truth class was assigned probability 0");
      log_sum += std::log2(p);
    }
    total += std::exp2(log_sum / static_cast<double>(item.size()));
  }
  return total / static_cast<double>(assigned.size());
}

std::vector<double> assigned_probabilities(std::span<const Eigen::RowVectorXd> probs,
                                           std::span<const ActionLabel> truth, int k) {
  require_aligned(probs.size(), truth.size(), "assigned_probabilities");
  std::vector<double> out;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    if (probs[s].size() != kJoints * k) fail(errc::kShapeMismatch, "probability row has the wrong width");
    for (int j = 0; j < kJoints; ++j) out.push_back(probs[s](j * k + truth[s][static_cast<std::size_t>(j)]));
  }
  return out;
}

double angular_metric(std::span<const ActionLabel> preds, std::span<const JointPoses> truth,
                      const actionspace::Codebook& cb) {
  require_aligned(preds.size(), truth.size(), "angular_metric");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < kJoints; ++j) {
      total += quat::angular_error(actionspace::decode(preds[i][j], static_cast<int>(j), cb), truth[i][j]);
    }
  }
  return total / static_cast<double>(preds.size() * kJoints) * 180.0 / std::numbers::pi;
}

double all_joint_accuracy(std::span<const ActionLabel> preds, std::span<const ActionLabel> labels) {
  require_aligned(preds.size(), labels.size(), "all_joint_accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::size_t nearest_neighbor(std::span<const Eigen::VectorXd> keys, const Eigen::VectorXd& query) {
  if (keys.empty()) fail(errc::kEmptyTrainingSet, "nearest neighbour needs training items");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].size() != query.size()) fail(errc::kShapeMismatch, "nearest neighbour key length mismatch");
    const double d = (keys[i] - query).squaredNorm();
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

Sequences nn_baseline(std::span<const Eigen::VectorXd> train_keys, const Sequences& train_labels,
                      std::span<const Eigen::VectorXd> queries) {
  if (train_keys.size() != train_labels.size()) fail(errc::kShapeMismatch, "one label sequence per training key");
  Sequences out;
  for (const auto& q : queries) out.push_back(train_labels[nearest_neighbor(train_keys, q)]);
  return out;
}

ActionLabel mode_baseline(std::span<const ActionLabel> train_labels, int k) {
  if (train_labels.empty()) fail(errc::kEmptyInput, "mode of no labels");
  ActionLabel out{};
  for (std::size_t j = 0; j < kJoints; ++j) {
    std::vector<std::int64_t> count(static_cast<std::size_t>(k), 0);
    for (const auto& a : train_labels) {
      if (a[j] < 0 || a[j] >= k) fail(errc::kIndexOutOfRange, "label outside [0, K)");
      ++count[static_cast<std::size_t>(a[j])];
    }
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > count[static_cast<std::size_t>(best)]) best = c;
    }
    out[j] = best;
  }
  return out;
}

double prior_all_joint_accuracy(const std::vector<std::vector<std::int64_t>>& freqs) {
  if (freqs.size() != kJoints) fail(errc::kShapeMismatch, "expected per-joint frequencies");
  double p = 1.0;
  for (const auto& joint : freqs) {
    double total = 0.0, sq = 0.0;
    for (auto f : joint) total += static_cast<double>(f);
    if (!(total > 0.0)) fail(errc::kZeroFrequency, "joint with no training labels");
    for (auto f : joint) sq += (static_cast<double>(f) / total) * (static_cast<double>(f) / total);
    p *= sq;
  }
  return 100.0 * p;
}

MetricReport score(const Sequences& predicted, const Sequences& truth,
                   const std::vector<std::vector<Eigen::RowVectorXd>>& probs, int k,
                   const std::vector<std::vector<JointPoses>>* truth_rotations, const actionspace::Codebook* cb) {
  require_aligned(predicted.size(), truth.size(), "score");
  const auto p = flatten(predicted);
  const auto t = flatten(truth);
  MetricReport r;
  r.items = predicted.size();
  r.steps = t.size();
  r.mean_class_accuracy = mean_class_accuracy(p, t, k);
  r.all_joint_accuracy = all_joint_accuracy(p, t);
  r.recall = per_class_recall(p, t, k);
  for (std::size_t j = 0; j < kJoints; ++j) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < p.size(); ++i) hit += p[i][j] == t[i][j] ? 1 : 0;
    r.joint_accuracy[j] = 100.0 * static_cast<double>(hit) / static_cast<double>(p.size());
  }
  if (!probs.empty()) {
    std::vector<std::vector<double>> assigned;
    for (std::size_t i = 0; i < truth.size(); ++i) assigned.push_back(assigned_probabilities(probs[i], truth[i], k));
    try {
      r.perplexity = perplexity(assigned);
    } catch (const Error& e) {
      if (e.error_class() != errc::kZeroProbability) throw;
      r.zero_probability = true;
      r.perplexity = 0.0;
    }
  }
  if (truth_rotations != nullptr && cb != nullptr) {
    std::vector<JointPoses> rot;
    for (const auto& s : *truth_rotations) rot.insert(rot.end(), s.begin(), s.end());
    r.angular_deg = angular_metric(p, rot, *cb);
  }
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("-"); }

}  // namespace

void write_reports(const std::filesystem::path& dir, std::span<const NamedReport> reports,
                   std::span<const std::pair<std::string, std::string>> extra) {
  char line[256];
  std::string table;
  std::snprintf(line, sizeof line, "%-12s %12s %12s %12s %12s %8s\n", "predictor", "mean_class", "perplexity",
                "angular_deg", "all_joint", "items");
  table += line;
  std::string kv;
  for (const auto& [name, r] : reports) {
    std::snprintf(line, sizeof line, "%-12s %12s %12s %12s %12s %8zu\n", name.c_str(),
                  fmt(r.mean_class_accuracy).c_str(), fmt(r.perplexity).c_str(), fmt(r.angular_deg).c_str(),
                  fmt(r.all_joint_accuracy).c_str(), r.items);
    table += line;
    auto put = [&](const std::string& key, const std::string& value) { kv += name + "." + key + "=" + value + "\n"; };
    put("mean_class_accuracy", textio::format_double(r.mean_class_accuracy));
    if (r.perplexity) put("perplexity", textio::format_double(*r.perplexity));
    if (r.perplexity) put("zero_probability", r.zero_probability ? "1" : "0");
    if (r.angular_deg) put("angular_deg", textio::format_double(*r.angular_deg));
    put("all_joint_accuracy", textio::format_double(r.all_joint_accuracy));
    for (std::size_t j = 0; j < kJoints; ++j) {
      put("joint" + std::to_string(j) + ".accuracy", textio::format_double(r.joint_accuracy[j]));
    }
    put("items", std::to_string(r.items));
    put("steps", std::to_string(r.steps));

    std::string recall = "# joint*K+class recall_percent\n";
    for (std::size_t j = 0; j < r.recall.size(); ++j) {
      for (std::size_t c = 0; c < r.recall[j].size(); ++c) {
        if (std::isnan(r.recall[j][c])) continue;
        recall += std::to_string(j * r.recall[j].size() + c) + ' ' + textio::format_double(100.0 * r.recall[j][c]) + '\n';
      }
    }
    textio::write_file(dir / ("recall_" + name + ".dat"), recall);
  }
  for (const auto& [k, v] : extra) kv += k + "=" + v + "\n";
  textio::write_file(dir / "report.txt", table);
  textio::write_file(dir / "report.kv", kv);
}

void write_curve(const std::filesystem::path& path, std::span<const double> values, const std::string& header) {
  std::string out = "# " + header + "\n";
  for (std::size_t i = 0; i < values.size(); ++i) out += std::to_string(i + 1) + ' ' + textio::format_double(values[i]) + '\n';
  textio::write_file(path, out);
}

double probe_accuracy(const net::Matrix& train_x, std::span<const int> train_y, const net::Matrix& test_x,
                      std::span<const int> test_y, int classes, const ProbeConfig& config) {
  if (train_x.rows() == 0 || static_cast<std::size_t>(train_x.rows()) != train_y.size() ||
      static_cast<std::size_t>(test_x.rows()) != test_y.size() || test_x.cols() != train_x.cols()) {
    fail(errc::kShapeMismatch, "probe features and labels disagree");
  }
  if (test_y.empty()) fail(errc::kEmptyInput, "probe has no held-out windows");
  const Eigen::RowVectorXd mean = train_x.colwise().mean();
  Eigen::RowVectorXd sd = ((train_x.rowwise() - mean).array().square().colwise().mean()).sqrt().matrix();
  sd = sd.cwiseMax(1e-8);
  auto standardize = [&](const net::Matrix& x) -> net::Matrix {
    return ((x.rowwise() - mean).array().rowwise() / sd.array()).matrix();
  };
  const net::Matrix xs = standardize(train_x);
  const net::Matrix ts = standardize(test_x);

  net::ParamStore store(config.seed);
  net::Linear probe(store, "probe", static_cast<int>(xs.cols()), classes);
  const std::vector<int> labels(train_y.begin(), train_y.end());
  const std::vector<double> weights(labels.size(), 1.0 / static_cast<double>(labels.size()));
  for (int it = 0; it < config.iterations; ++it) {
    net::Graph g(&store);
    g.backward(g.weighted_nll(probe(g, g.constant(xs)), 1, labels, weights));
    net::sgd_step(store, config.lr, 0.9);
  }
  net::Graph g(store);
  const net::Matrix& logits = g.value(probe(g, g.constant(ts)));
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    hits += static_cast<int>(best) == test_y[static_cast<std::size_t>(i)] ? 1 : 0;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(test_y.size());
}

namespace {

struct ProbeData {
  net::Matrix x;
  std::vector<int> y;
};

ProbeData encoder_states(const acting::ActingModel& model, std::span<const EpisodeTensor> episodes) {
  const int n_obs = model.config().n_obs;
  const auto wins = acting::windows(episodes, n_obs, 0);
  ProbeData out;
  out.x.resize(static_cast<Eigen::Index>(wins.size()), model.config().hidden);
  for (std::size_t at = 0; at < wins.size(); at += 256) {
    const std::size_t n = std::min<std::size_t>(256, wins.size() - at);
    std::vector<net::Matrix> frames(static_cast<std::size_t>(n_obs),
                                    net::Matrix(static_cast<Eigen::Index>(n), model.config().feature_dim));
    for (std::size_t b = 0; b < n; ++b) {
      const auto& w = wins[at + b];
      for (int o = 0; o < n_obs; ++o) {
        frames[static_cast<std::size_t>(o)].row(static_cast<Eigen::Index>(b)) = episodes[w.episode].features.row(w.start + o);
      }
    }
    out.x.middleRows(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(n)) = model.encoder_hidden(frames);
  }
  for (const auto& w : wins) {
    const int scene = episodes[w.episode].scene;
    if (scene < 0) fail(errc::kInsufficientData, "probe needs scene labels for every episode");
    out.y.push_back(scene);
  }
  return out;
}

}  // namespace

ProbeResult linear_probe(const acting::ActingModel& trained, std::span<const EpisodeTensor> train_episodes,
                         std::span<const EpisodeTensor> test_episodes, std::uint64_t random_seed,
                         const ProbeConfig& config) {
  const acting::ActingModel fresh(trained.config(), random_seed);
  const auto tr = encoder_states(trained, train_episodes);
  const auto te = encoder_states(trained, test_episodes);
  ProbeResult r;
  r.train_windows = tr.y.size();
  r.test_windows = te.y.size();
  if (tr.y.empty() || te.y.empty()) fail(errc::kInsufficientData, "probe needs windows on both sides of the split");
  int max_label = 0;
  bool constant = true;
  for (int y : tr.y) {
    max_label = std::max(max_label, y);
    constant = constant && y == tr.y.front();
  }
  for (int y : te.y) max_label = std::max(max_label, y);
  r.classes = max_label + 1;
  if (constant) {
    r.degenerate = true;
    r.trained = r.random = 100.0;
    return r;
  }
  r.trained = probe_accuracy(tr.x, tr.y, te.x, te.y, r.classes, config);
  const auto rtr = encoder_states(fresh, train_episodes);
  const auto rte = encoder_states(fresh, test_episodes);
  r.random = probe_accuracy(rtr.x, rtr.y, rte.x, rte.y, r.classes, config);
  return r;
}

}  // namespace kennel::eval
