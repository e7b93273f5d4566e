#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kennel/actionspace.hpp"
#include "kennel/featurizer.hpp"
#include "kennel/netcore.hpp"
#include "kennel/types.hpp"

namespace kennel {

/// One contiguous run of frames: features for frames 0..T-1 (rows) and the
/// action label of every step t -> t+1.
struct EpisodeTensor {
  std::int64_t first_frame = 0;
  int scene = -1;  // -1 when unknown
  net::Matrix features;
  std::vector<ActionLabel> labels;

  int frames() const { return static_cast<int>(features.rows()); }
};

/// Manifest line `episode_id first_frame last_frame scene_label`.
struct ManifestEntry {
  int episode_id = 0;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  int scene = 0;
};

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Splits the frames into maximal runs of consecutive ids that have features
/// and a label for every step, within each manifest episode when a manifest
/// is given. Runs shorter than `min_frames` are dropped.
std::vector<EpisodeTensor> assemble_episodes(const featurizer::FeatureTable& features,
                                             std::span<const actionspace::LabelRecord> labels,
                                             std::span<const ManifestEntry> manifest, int min_frames = 2);

/// Per-joint class counts over every label of every episode.
std::vector<std::vector<std::int64_t>> count_labels(std::span<const EpisodeTensor> episodes, int k);

/// Per-joint training frequencies stored in a codebook.
std::vector<std::vector<std::int64_t>> codebook_frequencies(const actionspace::Codebook& cb);

/// Deterministic split by episode: every `every`-th episode (starting at
/// `offset`) goes to the held-out side.
struct Split {
  std::vector<EpisodeTensor> train;
  std::vector<EpisodeTensor> test;
};
Split split_episodes(std::span<const EpisodeTensor> episodes, int every, int offset = 0);

}  // namespace kennel
