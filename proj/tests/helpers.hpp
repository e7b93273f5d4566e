#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kennel/episodes.hpp"
#include "kennel/error.hpp"
#include "kennel/rng.hpp"

namespace kennel::testing {

inline std::string error_class_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.error_class();
  }
  return "none";
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("kennel_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Episodes with uniform random features in [-1, 1] and uniform random labels.
inline std::vector<EpisodeTensor> random_episodes(std::uint64_t seed, int count, int frames, int dim, int k) {
  Rng rng(seed);
  std::vector<EpisodeTensor> out;
  std::int64_t next = 0;
  for (int e = 0; e < count; ++e) {
    EpisodeTensor ep;
    ep.first_frame = next;
    ep.scene = e % 2;
    ep.features.resize(frames, dim);
    for (Eigen::Index i = 0; i < ep.features.size(); ++i) ep.features.data()[i] = rng.uniform(-1.0, 1.0);
    for (int t = 0; t + 1 < frames; ++t) {
      ActionLabel a{};
      for (auto& c : a) c = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
      ep.labels.push_back(a);
    }
    next += frames + 1;
    out.push_back(std::move(ep));
  }
  return out;
}

/// Every class of every joint counted `n` times.
inline std::vector<std::vector<std::int64_t>> flat_freqs(int k, std::int64_t n = 1) {
  return std::vector<std::vector<std::int64_t>>(kJoints, std::vector<std::int64_t>(static_cast<std::size_t>(k), n));
}

}  // namespace kennel::testing
