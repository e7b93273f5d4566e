#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kennel/ingest.hpp"
#include "kennel/types.hpp"

namespace kennel::actionspace {

inline constexpr int kDefaultClasses = 8;

/// Centroids and training-set class counts for one joint.
struct JointCodebook {
  std::vector<quat::UnitQuaternion> centroids;
  std::vector<std::int64_t> frequencies;
  int iterations = 0;
  double objective = 0.0;  // sum of squared geodesic distances to assigned centroids

  friend bool operator==(const JointCodebook&, const JointCodebook&) = default;
};

/// Per-joint discrete action vocabulary.
struct Codebook {
  int k = kDefaultClasses;
  std::uint64_t seed = 0;
  std::array<JointCodebook, kJoints> joints;

  friend bool operator==(const Codebook&, const Codebook&) = default;
};

struct FitOptions {
  int k = kDefaultClasses;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-6;  // radians of centroid movement
  int restarts = 4;   // independent k-means++ seedings; the lowest objective wins
};

/// Lloyd trace of a single seeding, kept for monotonicity checks.
struct LloydTrace {
  JointCodebook result;
  std::vector<double> objective_history;  // one entry per iteration
};

/// Sum over points of the squared geodesic distance to the nearest centroid.
double distortion(std::span<const quat::UnitQuaternion> points, std::span<const quat::UnitQuaternion> centroids);

/// Index of the nearest centroid; ties go to the lowest index.
int nearest(const quat::UnitQuaternion& q, std::span<const quat::UnitQuaternion> centroids);

/// One seeded Lloyd run on a single joint's points.
LloydTrace lloyd(std::span<const quat::UnitQuaternion> points, int k, std::uint64_t seed, int max_iter, double tol);

/// Best-of-restarts clustering of one joint. Throws `data.insufficient` if
/// the points hold fewer than k distinct rotations.
JointCodebook fit_joint(std::span<const quat::UnitQuaternion> points, const FitOptions& options, int joint);

Codebook fit(std::span<const ingest::DisplacementRecord> displacements, const FitOptions& options = {});

int assign(const quat::UnitQuaternion& q, int joint, const Codebook& cb);
ActionLabel assign(const JointPoses& displacement, const Codebook& cb);

/// Centroid of class `label`. Throws `data.index_out_of_range`.
const quat::UnitQuaternion& decode(int label, int joint, const Codebook& cb);

std::string serialize(const Codebook& cb);
Codebook parse(std::string_view text);
void save(const Codebook& cb, const std::filesystem::path& path);
Codebook load(const std::filesystem::path& path);

/// FNV-1a of the serialized codebook; stamped into model checkpoints.
std::uint64_t content_hash(const Codebook& cb);

// Labels file: `frame_id j0 j1 j2 j3 j4 j5`, keyed by the earlier frame of each step.
struct LabelRecord {
  std::int64_t frame_id = 0;
  ActionLabel classes{};
};
void write_labels(const std::filesystem::path& path, std::span<const LabelRecord> labels);
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);

}  // namespace kennel::actionspace
