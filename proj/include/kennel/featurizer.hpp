#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>

#include "kennel/types.hpp"

namespace kennel::featurizer {

/// Per-frame feature vectors of a common dimension, ordered by frame id.
struct FeatureTable {
  int dim = 0;
  std::map<std::int64_t, Eigen::VectorXd> rows;

  /// Throws `data.index_out_of_range` for an unknown frame.
  const Eigen::VectorXd& at(std::int64_t frame_id) const;
  void insert(std::int64_t frame_id, Eigen::VectorXd v);
};

/// `frame_id v1 ... vD` per line; `#` comments allowed. Throws `format.error`
/// on malformed or empty input and `format.dim_mismatch` on ragged rows.
FeatureTable load_features(const std::filesystem::path& path);
void save_features(const FeatureTable& table, const std::filesystem::path& path);

/// Fixed linear map from (24 pose quaternion components, scene context) to D
/// features. Bias-free, so the zero state maps to the zero vector.
struct Projection {
  Eigen::MatrixXd weights;  // D x (24 + context_dim)

  int dim() const { return static_cast<int>(weights.rows()); }
  int context_dim() const { return static_cast<int>(weights.cols()) - 4 * kJoints; }
};

/// Gaussian entries scaled by 1/sqrt(inputs), redrawn until the map has full
/// column rank. Throws `config.invalid` when D < 24 + context_dim.
Projection make_projection(int dim, int context_dim, std::uint64_t seed);

/// Concatenated (w, x, y, z) of every joint followed by the context.
Eigen::VectorXd state_vector(const JointPoses& poses, std::span<const double> context);

/// Projected state plus zero-mean Gaussian noise of std `noise_sigma` drawn
/// from a generator seeded with `noise_seed`.
Eigen::VectorXd synth_observe(const Projection& projection, const JointPoses& poses, std::span<const double> context,
                              double noise_sigma, std::uint64_t noise_seed);

}  // namespace kennel::featurizer
