#pragma once

#include <filesystem>
#include <string>

#include "kennel/acting.hpp"
#include "kennel/actionspace.hpp"
#include "kennel/kennelsim.hpp"
#include "kennel/planning.hpp"
#include "kennel/training.hpp"

namespace kennel {

/// Everything a command-line run needs. Loaded from an INI file with
/// `[section]` headers and `key = value` lines; unset keys keep the defaults
/// below. Relative paths are resolved against the config file's directory.
struct RunConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  // Resolved against data_dir when relative. An empty codebook means the
  // label file holds ground-truth classes and frequencies are recounted.
  std::filesystem::path labels = "labels.txt";
  std::filesystem::path codebook;

  int feature_dim = 0;  // 0: take D from the feature file
  int classes = actionspace::kDefaultClasses;
  int split_every = 5;
  int split_offset = 0;

  acting::ActingConfig acting;
  TrainConfig acting_train;
  planning::PlanningConfig planning;
  TrainConfig planning_train{0.1, 0.9, 60, 32, 0, 1.0};

  sim::WorldConfig world;

  /// Throws `config.invalid` on non-positive dims, K < 2 or a bad split.
  void validate() const;
};

/// Throws `io.missing` if the file is absent and `config.invalid` on unknown
/// sections or keys and unparsable values.
RunConfig load_run_config(const std::filesystem::path& path);

/// Parses INI text; `base` anchors relative paths.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base);

/// Every key with its current value, one section per block. Applied to a
/// default config this is the reference list of defaults.
std::string to_ini(const RunConfig& config);

}  // namespace kennel
