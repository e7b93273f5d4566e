#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kennel/types.hpp"

namespace kennel::ingest {

inline constexpr std::int64_t kDefaultHalfWindowUs = 50'000;

struct ImuSample {
  std::int64_t timestamp_us = 0;
  int joint_id = 0;
  quat::UnitQuaternion orientation;
};

struct Frame {
  std::int64_t frame_id = 0;
  std::int64_t timestamp_us = 0;
};

/// Absolute per-joint orientation at one video frame.
struct AlignedRecord {
  std::int64_t frame_id = 0;
  JointPoses orientations;
};

/// Relative per-joint rotation from `frame_id` to `frame_id + 1`.
struct DisplacementRecord {
  std::int64_t frame_id = 0;
  JointPoses displacements;
};

/// Per-joint sample streams, each sorted by strictly increasing timestamp.
class ImuStreams {
 public:
  /// Appends samples in arrival order; any chunking of the same sequence
  /// yields the same streams. Throws `format.error` on a bad joint id or a
  /// non-increasing timestamp within a joint.
  void append(std::span<const ImuSample> chunk);

  const std::vector<ImuSample>& joint(int j) const { return streams_.at(static_cast<std::size_t>(j)); }
  std::size_t total_samples() const;

 private:
  std::array<std::vector<ImuSample>, kJoints> streams_;
};

struct AlignResult {
  std::vector<AlignedRecord> records;
  std::size_t dropped = 0;  // frames outside the coverage of some stream
};

/// Mean of the samples within +-half_window of frame_ts. With an empty
/// window, slerps between the nearest samples on either side. Throws
/// `data.out_of_coverage` when frame_ts is outside the stream's time span.
quat::UnitQuaternion window_average(std::span<const ImuSample> stream, std::int64_t frame_ts,
                                    std::int64_t half_window = kDefaultHalfWindowUs);

/// Resamples all joints at every frame timestamp shifted by clock_offset_us.
/// Frames not covered by all streams are dropped and counted. Throws
/// `data.no_frames_retained` if nothing survives.
AlignResult align(const ImuStreams& streams, std::span<const Frame> frames, std::int64_t clock_offset_us = 0,
                  std::int64_t half_window = kDefaultHalfWindowUs);

/// Relative rotations between consecutive frame ids. A gap in frame ids is
/// an episode break and emits nothing. Throws `data.too_short` for < 2 records.
std::vector<DisplacementRecord> displacements(std::span<const AlignedRecord> records);

// File formats. IMU: `timestamp_us joint_id w x y z`; frames: `frame_id
// timestamp_us`; poses/displacements: `frame_id j0_w j0_x j0_y j0_z ... j5_z`.
ImuStreams read_imu(const std::filesystem::path& path);
void write_imu(const std::filesystem::path& path, std::span<const ImuSample> samples);
std::vector<Frame> read_frames(const std::filesystem::path& path);
void write_frames(const std::filesystem::path& path, std::span<const Frame> frames);

void write_aligned(const std::filesystem::path& path, std::span<const AlignedRecord> records);
std::vector<AlignedRecord> read_aligned(const std::filesystem::path& path);
void write_displacements(const std::filesystem::path& path, std::span<const DisplacementRecord> records);
std::vector<DisplacementRecord> read_displacements(const std::filesystem::path& path);

}  // namespace kennel::ingest
