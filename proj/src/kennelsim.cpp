#include "kennel/kennelsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "kennel/error.hpp"
#include "kennel/rng.hpp"
#include "kennel/textio.hpp"

namespace kennel::sim {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kDeterministic:
      return "deterministic";
    case PolicyKind::kStochastic:
      return "stochastic";
    case PolicyKind::kGoalDirected:
      return "goal-directed";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "deterministic") return PolicyKind::kDeterministic;
  if (name == "stochastic") return PolicyKind::kStochastic;
  if (name == "goal-directed") return PolicyKind::kGoalDirected;
  fail(errc::kConfig, "unknown policy '" + std::string(name) + "'");
}

double WorldConfig::unit_angle() const { return 2.0 * std::numbers::pi / pose_count; }

namespace {

int wrap(int v, int m) { return ((v % m) + m) % m; }

/// Grid distance on the circle of m positions.
int circle_distance(int a, int b, int m) {
  const int d = wrap(a - b, m);
  return std::min(d, m - d);
}

std::int64_t frame_period_us(const WorldConfig& c) { return std::llround(1e6 / c.frame_rate_hz); }

int imu_per_frame(const WorldConfig& c) { return static_cast<int>(std::lround(c.imu_rate_hz / c.frame_rate_hz)); }

/// Ease profile of a step: still for the first and last quarter of the
/// frame interval, smooth in between.
double ease(double tau) {
  if (tau <= 0.25) return 0.0;
  if (tau >= 0.75) return 1.0;
  const double x = (tau - 0.25) / 0.5;
  return x * x * (3.0 - 2.0 * x);
}

}  // namespace

void validate(const WorldConfig& c) {
  auto bad = [](const std::string& why) { fail(errc::kConfig, "world config: " + why); };
  if (c.n_primitives < 2 || static_cast<int>(c.primitive_steps.size()) != c.n_primitives) {
    bad("primitive_steps must list n_primitives >= 2 entries");
  }
  if (c.pose_count < 2) bad("pose_count must be at least 2");
  std::set<int> residues;
  for (int s : c.primitive_steps) residues.insert(wrap(s, c.pose_count));
  if (static_cast<int>(residues.size()) != c.n_primitives) bad("primitive rotations must be distinct per joint");
  int min_gap = c.pose_count;
  for (int a : residues) {
    for (int b : residues) {
      if (a != b) min_gap = std::min(min_gap, circle_distance(a, b, c.pose_count));
    }
  }
  if (!(min_gap * c.unit_angle() > 5.0 * c.imu_noise_rad)) {
    bad("closest primitives must be more than 5x the sensor noise apart");
  }
  if (!(c.frame_rate_hz > 0.0) || !(c.imu_rate_hz > 0.0)) bad("rates must be positive");
  const double ratio = c.imu_rate_hz / c.frame_rate_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 2.0) bad("imu rate must be an integer multiple (>= 2) of the frame rate");
  if (frame_period_us(c) % imu_per_frame(c) != 0) bad("imu period must be a whole number of microseconds");
  if (c.scene_count < 1 || c.context_dim < 0) bad("scene_count >= 1 and context_dim >= 0 required");
  if (!(c.context_scale > 0.0)) bad("context_scale must be positive");
  if (c.feature_dim < 4 * kJoints + c.context_dim) bad("feature_dim must be at least 24 + context_dim");
  if (c.episodes < 1 || c.episode_length < 2) bad("need at least one episode of two frames");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) bad("epsilon must lie in [0, 1]");
  if (!(c.feature_noise >= 0.0) || !(c.imu_noise_rad >= 0.0)) bad("noise levels must be non-negative");
}

quat::UnitQuaternion World::pose(int joint, int index) const {
  return quat::from_axis_angle(axes[static_cast<std::size_t>(joint)], wrap(index, config.pose_count) * config.unit_angle());
}

JointPoses World::poses(const std::array<int, kJoints>& index) const {
  JointPoses out;
  for (int j = 0; j < kJoints; ++j) out[static_cast<std::size_t>(j)] = pose(j, index[static_cast<std::size_t>(j)]);
  return out;
}

World make_world(const WorldConfig& config) {
  validate(config);
  World w;
  w.config = config;
  Rng rng = Rng::derive(config.seed, 1);
  for (auto& axis : w.axes) {
    double n = 0.0;
    while (n < 1e-3) {
      axis = {rng.normal(), rng.normal(), rng.normal()};
      n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    }
    for (auto& a : axis) a /= n;
  }
  for (int j = 0; j < kJoints; ++j) {
    for (int s : config.primitive_steps) {
      w.primitives[static_cast<std::size_t>(j)].push_back(
          quat::from_axis_angle(w.axes[static_cast<std::size_t>(j)], s * config.unit_angle()));
    }
  }
  // Every primitive appears about equally often in each scene's table.
  w.table.assign(kJoints, std::vector<std::vector<int>>(static_cast<std::size_t>(config.scene_count)));
  for (auto& joint : w.table) {
    for (auto& scene : joint) {
      for (int p = 0; p < config.pose_count; ++p) scene.push_back(p % config.n_primitives);
      for (std::size_t i = scene.size(); i > 1; --i) std::swap(scene[i - 1], scene[rng.index(i)]);
    }
  }
  for (int s = 0; s < config.scene_count; ++s) {
    std::vector<double> ctx;
    for (int i = 0; i < config.context_dim; ++i) ctx.push_back(config.context_scale * rng.normal());
    w.contexts.push_back(std::move(ctx));
  }
  w.projection = featurizer::make_projection(config.feature_dim, config.context_dim, Rng::mix(config.seed ^ 0x70726f6aULL));
  return w;
}

int greedy_action(const World& world, int joint, int pose, int goal) {
  (void)joint;
  const auto& c = world.config;
  int best = 0;
  int best_d = c.pose_count + 1;
  for (int a = 0; a < c.n_primitives; ++a) {
    const int d = circle_distance(pose + c.primitive_steps[static_cast<std::size_t>(a)], goal, c.pose_count);
    if (d < best_d) {
      best = a;
      best_d = d;
    }
  }
  return best;
}

bool plannable(const World& world, const SimEpisode& ep) {
  const auto& c = world.config;
  const int n = static_cast<int>(ep.pose_index.size());
  for (int j = 0; j < kJoints; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    for (int s = 0; s < n; ++s) {
      for (int t = s + 1; t < n; ++t) {
        int p = ep.pose_index[static_cast<std::size_t>(s)][jj];
        const int target = ep.pose_index[static_cast<std::size_t>(t)][jj];
        for (int u = s; u < t; ++u) {
          const int a = greedy_action(world, j, p, target);
          if (a != ep.actions[static_cast<std::size_t>(u)][jj]) return false;
          p = wrap(p + c.primitive_steps[static_cast<std::size_t>(a)], c.pose_count);
        }
      }
    }
  }
  return true;
}

namespace {

SimEpisode roll_out(const World& w, Rng& rng, int scene, const std::array<int, kJoints>& start,
                    const std::array<int, kJoints>& goal) {
  const auto& c = w.config;
  SimEpisode ep;
  ep.scene = scene;
  ep.goal = goal;
  auto p = start;
  ep.pose_index.push_back(p);
  for (int t = 0; t + 1 < c.episode_length; ++t) {
    ActionLabel a{};
    for (std::size_t j = 0; j < kJoints; ++j) {
      const int tabled = w.table[j][static_cast<std::size_t>(scene)][static_cast<std::size_t>(p[j])];
      switch (c.policy) {
        case PolicyKind::kDeterministic:
          a[j] = tabled;
          break;
        case PolicyKind::kStochastic: {
          const double u = rng.uniform();
          const int random = static_cast<int>(rng.index(static_cast<std::size_t>(c.n_primitives)));
          a[j] = u < c.epsilon ? random : tabled;
          break;
        }
        case PolicyKind::kGoalDirected:
          a[j] = greedy_action(w, static_cast<int>(j), p[j], goal[j]);
          break;
      }
      p[j] = wrap(p[j] + c.primitive_steps[static_cast<std::size_t>(a[j])], c.pose_count);
    }
    ep.actions.push_back(a);
    ep.pose_index.push_back(p);
  }
  for (const auto& idx : ep.pose_index) ep.poses.push_back(w.poses(idx));
  return ep;
}

std::array<int, kJoints> random_poses(Rng& rng, int m) {
  std::array<int, kJoints> out{};
  for (auto& v : out) v = static_cast<int>(rng.index(static_cast<std::size_t>(m)));
  return out;
}

SimEpisode make_episode(const World& w, int e) {
  const auto& c = w.config;
  Rng rng = Rng::derive(c.seed, 100 + static_cast<std::uint64_t>(e));
  const int scene = static_cast<int>(rng.index(static_cast<std::size_t>(c.scene_count)));
  const auto start = random_poses(rng, c.pose_count);
  if (c.policy != PolicyKind::kGoalDirected) return roll_out(w, rng, scene, start, {});
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto ep = roll_out(w, rng, scene, start, random_poses(rng, c.pose_count));
    if (plannable(w, ep)) return ep;
  }
  fail(errc::kConfig, "episode " + std::to_string(e) + ": no goal gives a plannable greedy trajectory");
}

quat::UnitQuaternion small_rotation(Rng& rng, double sigma) {
  return quat::from_axis_angle({rng.normal(), rng.normal(), rng.normal()}, sigma * rng.normal());
}

void check_injective(const World& w, std::span<const SimEpisode> episodes) {
  std::set<std::pair<int, std::array<int, kJoints>>> states;
  for (const auto& ep : episodes) {
    for (const auto& idx : ep.pose_index) states.insert({ep.scene, idx});
  }
  std::vector<Eigen::VectorXd> feats;
  for (const auto& [scene, idx] : states) {
    feats.push_back(featurizer::synth_observe(w.projection, w.poses(idx), w.contexts[static_cast<std::size_t>(scene)],
                                              0.0, 0));
  }
  for (std::size_t a = 0; a < feats.size(); ++a) {
    for (std::size_t b = a + 1; b < feats.size(); ++b) {
      if ((feats[a] - feats[b]).squaredNorm() < 1e-18) {
        fail(errc::kConfig, "observation projection maps two simulator states to the same features");
      }
    }
  }
}

}  // namespace

Dataset generate(const WorldConfig& config) {
  Dataset data;
  data.world = make_world(config);
  const World& w = data.world;
  const auto& c = w.config;

  std::int64_t next_frame = 0;
  for (int e = 0; e < c.episodes; ++e) {
    auto ep = make_episode(w, e);
    ep.first_frame = next_frame;
    next_frame += c.episode_length + 1;
    data.episodes.push_back(std::move(ep));
  }
  check_injective(w, data.episodes);

  const std::int64_t period = frame_period_us(c);
  const int r = imu_per_frame(c);
  const std::int64_t sample_period = period / r;
  const std::int64_t t0 = 1'000'000;
  auto frame_time = [&](std::int64_t id) { return t0 + id * period; };

  const std::uint64_t noise_base = Rng::mix(c.seed ^ 0x6e6f697365ULL);
  Rng imu_noise = Rng::derive(c.seed, 3);
  auto emit = [&](std::int64_t ts, const JointPoses& poses) {
    for (int j = 0; j < kJoints; ++j) {
      auto q = poses[static_cast<std::size_t>(j)];
      if (c.imu_noise_rad > 0.0) q = quat::multiply(q, small_rotation(imu_noise, c.imu_noise_rad));
      data.imu.push_back({ts, j, q});
    }
  };

  // Lead-in: the first pose held for one frame interval.
  for (int u = r; u >= 1; --u) emit(frame_time(0) - u * sample_period, data.episodes.front().poses.front());

  for (std::size_t e = 0; e < data.episodes.size(); ++e) {
    const auto& ep = data.episodes[e];
    const int scene = ep.scene;
    data.manifest.push_back({static_cast<int>(e), ep.first_frame, ep.first_frame + c.episode_length - 1, scene});
    for (int t = 0; t < c.episode_length; ++t) {
      const std::int64_t id = ep.first_frame + t;
      const auto& pose = ep.poses[static_cast<std::size_t>(t)];
      data.frames.push_back({id, frame_time(id)});
      data.features.insert(id, featurizer::synth_observe(w.projection, pose, w.contexts[static_cast<std::size_t>(scene)],
                                                         c.feature_noise, Rng::mix(noise_base + static_cast<std::uint64_t>(id))));
      if (t + 1 < c.episode_length) {
        // Within an episode: turn along the step's own rotation.
        const auto& act = ep.actions[static_cast<std::size_t>(t)];
        data.labels.push_back({id, act});
        for (int u = 0; u < r; ++u) {
          const double s = ease(static_cast<double>(u) / r);
          JointPoses mid;
          for (std::size_t j = 0; j < kJoints; ++j) {
            const int step = c.primitive_steps[static_cast<std::size_t>(act[j])];
            mid[j] = quat::multiply(pose[j], quat::from_axis_angle(w.axes[j], s * step * c.unit_angle()));
          }
          emit(frame_time(id) + u * sample_period, mid);
        }
        continue;
      }
      // Last frame: hold through the unused gap id, then move to the next
      // episode's first pose.
      for (int u = 0; u < r; ++u) emit(frame_time(id) + u * sample_period, pose);
      if (e + 1 < data.episodes.size()) {
        const auto& next = data.episodes[e + 1].poses.front();
        for (int u = 0; u < r; ++u) {
          const double s = ease(static_cast<double>(u) / r);
          JointPoses mid;
          for (std::size_t j = 0; j < kJoints; ++j) mid[j] = quat::slerp(pose[j], next[j], s);
          emit(frame_time(id + 1) + u * sample_period, mid);
        }
      } else {
        emit(frame_time(id + 1), pose);
      }
    }
  }
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  ingest::write_imu(dir / "imu.txt", data.imu);
  ingest::write_frames(dir / "frames.txt", data.frames);
  featurizer::save_features(data.features, dir / "features.txt");
  actionspace::write_labels(dir / "labels.txt", data.labels);
  write_manifest(dir / "episodes.txt", data.manifest);
  std::string out = "# joint primitive w x y z\n";
  for (int j = 0; j < kJoints; ++j) {
    const auto& prims = data.world.primitives[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < prims.size(); ++a) {
      out += std::to_string(j) + ' ' + std::to_string(a);
      for (double v : prims[a].components()) {
        out += ' ';
        out += textio::format_double(v);
      }
      out += '\n';
    }
  }
  textio::write_file(dir / "primitives.txt", out);
}

std::array<std::vector<quat::UnitQuaternion>, kJoints> read_primitives(const std::filesystem::path& path) {
  std::array<std::vector<quat::UnitQuaternion>, kJoints> out;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto ctx = path.string() + ":" + std::to_string(line.number);
    const auto tok = textio::split_ws(line.text);
    if (tok.size() != 6) fail(errc::kFormat, ctx + ": expected `joint primitive w x y z`");
    const auto j = textio::parse_int(tok[0], ctx);
    const auto a = textio::parse_int(tok[1], ctx);
    if (j < 0 || j >= kJoints || a != static_cast<std::int64_t>(out[static_cast<std::size_t>(j)].size())) {
      fail(errc::kFormat, ctx + ": rows must be ordered by joint then primitive");
    }
    out[static_cast<std::size_t>(j)].push_back(quat::canonicalize(
        {textio::parse_double(tok[2], ctx), textio::parse_double(tok[3], ctx), textio::parse_double(tok[4], ctx),
         textio::parse_double(tok[5], ctx)}));
  }
  return out;
}

}  // namespace kennel::sim
