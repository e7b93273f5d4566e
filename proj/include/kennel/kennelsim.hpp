#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kennel/actionspace.hpp"
#include "kennel/episodes.hpp"
#include "kennel/featurizer.hpp"
#include "kennel/ingest.hpp"
#include "kennel/types.hpp"

namespace kennel::sim {

enum class PolicyKind { kDeterministic, kStochastic, kGoalDirected };

std::string to_string(PolicyKind kind);
/// "deterministic", "stochastic" or "goal-directed"; throws `config.invalid`.
PolicyKind parse_policy(std::string_view name);

/// Each joint turns about its own fixed axis on a grid of `pose_count`
/// positions. Primitive a moves a joint by `primitive_steps[a]` grid units.
struct WorldConfig {
  int n_primitives = 8;
  int pose_count = 8;
  std::vector<int> primitive_steps{0, 1, -1, 2, -2, 3, -3, 4};
  PolicyKind policy = PolicyKind::kDeterministic;
  double epsilon = 0.3;  // stochastic policy: probability of a uniform random primitive
  int scene_count = 4;
  int context_dim = 4;
  double context_scale = 1.0;  // standard deviation of scene context entries
  int feature_dim = 32;
  int episodes = 160;
  int episode_length = 16;  // frames
  double frame_rate_hz = 5.0;
  double imu_rate_hz = 20.0;
  double feature_noise = 0.01;
  double imu_noise_rad = 0.0;
  std::uint64_t seed = 1;

  /// Radians per grid unit.
  double unit_angle() const;
};

/// Throws `config.invalid` on any invariant violation.
void validate(const WorldConfig& config);

/// Everything fixed per world: joint axes, primitive rotations, the policy
/// table, scene contexts and the observation projection.
struct World {
  WorldConfig config;
  std::array<std::array<double, 3>, kJoints> axes{};
  std::array<std::vector<quat::UnitQuaternion>, kJoints> primitives;  // [joint][primitive]
  std::vector<std::vector<std::vector<int>>> table;                   // [joint][scene][pose] -> primitive
  std::vector<std::vector<double>> contexts;                          // [scene]
  featurizer::Projection projection;

  quat::UnitQuaternion pose(int joint, int index) const;
  JointPoses poses(const std::array<int, kJoints>& index) const;
};

World make_world(const WorldConfig& config);

struct SimEpisode {
  int scene = 0;
  std::int64_t first_frame = 0;
  std::vector<std::array<int, kJoints>> pose_index;  // per frame
  std::vector<JointPoses> poses;                     // per frame
  std::vector<ActionLabel> actions;                  // per step, primitive indices
  std::array<int, kJoints> goal{};                   // goal-directed policy only
};

struct Dataset {
  World world;
  std::vector<SimEpisode> episodes;
  std::vector<ingest::ImuSample> imu;
  std::vector<ingest::Frame> frames;
  featurizer::FeatureTable features;
  std::vector<actionspace::LabelRecord> labels;
  std::vector<ManifestEntry> manifest;
};

/// Deterministic in the config. Consecutive episodes are separated by one
/// unused frame id so that frame-id gaps mark episode boundaries.
Dataset generate(const WorldConfig& config);

/// Greedy goal-directed choice for one joint: the primitive whose result is
/// geodesically closest to the goal; ties go to the lowest index.
int greedy_action(const World& world, int joint, int pose, int goal);

/// True if, for every pair of visited frames s < t, replaying the greedy
/// policy from pose s toward pose t reproduces the recorded actions.
bool plannable(const World& world, const SimEpisode& ep);

/// Writes imu.txt, frames.txt, features.txt, labels.txt, episodes.txt and
/// primitives.txt (`joint primitive w x y z`).
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Reads primitives.txt back as [joint][primitive].
std::array<std::vector<quat::UnitQuaternion>, kJoints> read_primitives(const std::filesystem::path& path);

}  // namespace kennel::sim
