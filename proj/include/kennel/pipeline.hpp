#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kennel/acting.hpp"
#include "kennel/actionspace.hpp"
#include "kennel/episodes.hpp"
#include "kennel/eval.hpp"
#include "kennel/ingest.hpp"
#include "kennel/planning.hpp"

namespace kennel::pipeline {

std::vector<actionspace::LabelRecord> label_displacements(std::span<const ingest::DisplacementRecord> displacements,
                                                          const actionspace::Codebook& cb);

/// Output of sync + fit-codebook + label on one recording.
struct Labelled {
  ingest::AlignResult aligned;
  std::vector<ingest::DisplacementRecord> displacements;
  actionspace::Codebook codebook;
  std::vector<actionspace::LabelRecord> labels;
};

Labelled sync_and_label(const ingest::ImuStreams& imu, std::span<const ingest::Frame> frames,
                        const actionspace::FitOptions& fit, std::int64_t clock_offset_us = 0);

/// Episodes from `features.txt` in `data_dir`, the given label file and, when
/// present, `episodes.txt`. Throws `format.dim_mismatch` if `feature_dim` is
/// positive and differs from the file.
std::vector<EpisodeTensor> load_episodes(const std::filesystem::path& data_dir, const std::filesystem::path& labels,
                                         int feature_dim = 0);

using RotationIndex = std::map<std::int64_t, JointPoses>;
RotationIndex index_rotations(std::span<const ingest::DisplacementRecord> displacements);

/// Model, nearest-neighbour and mode reports on the held-out windows. The
/// angular metric is filled in when `rotations` covers every target step.
std::vector<eval::NamedReport> evaluate_acting(const acting::ActingModel& model,
                                               std::span<const EpisodeTensor> train,
                                               std::span<const EpisodeTensor> test, const actionspace::Codebook* cb,
                                               const RotationIndex* rotations);

std::vector<eval::NamedReport> evaluate_planning(const planning::PlanningModel& model,
                                                 std::span<const EpisodeTensor> train,
                                                 std::span<const EpisodeTensor> test,
                                                 const actionspace::Codebook* cb, const RotationIndex* rotations);

struct GradCheckSetup {
  int hidden = 8;    // H
  int feature_dim = 6;  // D
  int steps = 3;     // N: observed and predicted steps for acting, horizon for planning
  std::uint64_t seed = 1;
};

struct NamedGradCheck {
  std::string model;
  net::GradCheckReport report;
};

/// Finite-difference checks of the full acting and planning losses on small
/// random data (central differences, step 1e-5).
std::vector<NamedGradCheck> model_gradient_checks(const GradCheckSetup& setup);

}  // namespace kennel::pipeline
