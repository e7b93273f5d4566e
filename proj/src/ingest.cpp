#include "kennel/ingest.hpp"

#include <algorithm>
#include <string>

#include "kennel/error.hpp"
#include "kennel/textio.hpp"

namespace kennel::ingest {

using quat::UnitQuaternion;

void ImuStreams::append(std::span<const ImuSample> chunk) {
  for (const auto& s : chunk) {
    if (s.joint_id < 0 || s.joint_id >= kJoints) {
      fail(errc::kFormat, "joint id " + std::to_string(s.joint_id) + " outside [0,5]");
    }
    auto& stream = streams_[static_cast<std::size_t>(s.joint_id)];
    if (!stream.empty() && s.timestamp_us <= stream.back().timestamp_us) {
      fail(errc::kFormat, "joint " + std::to_string(s.joint_id) + ": timestamp " + std::to_string(s.timestamp_us) +
                              " does not increase");
    }
    stream.push_back(s);
  }
}

std::size_t ImuStreams::total_samples() const {
  std::size_t n = 0;
  for (const auto& s : streams_) n += s.size();
  return n;
}

namespace {

bool covers(std::span<const ImuSample> stream, std::int64_t ts) {
  return !stream.empty() && ts >= stream.front().timestamp_us && ts <= stream.back().timestamp_us;
}

auto by_time = [](const ImuSample& s, std::int64_t ts) { return s.timestamp_us < ts; };

}  // namespace

UnitQuaternion window_average(std::span<const ImuSample> stream, std::int64_t frame_ts, std::int64_t half_window) {
  if (!covers(stream, frame_ts)) {
    fail(errc::kOutOfCoverage, "frame timestamp " + std::to_string(frame_ts) + " outside the IMU stream");
  }
  const auto lo = std::lower_bound(stream.begin(), stream.end(), frame_ts - half_window, by_time);
  const auto hi = std::upper_bound(stream.begin(), stream.end(), frame_ts + half_window,
                                   [](std::int64_t ts, const ImuSample& s) { return ts < s.timestamp_us; });
  if (lo < hi) {
    std::vector<UnitQuaternion> window;
    window.reserve(static_cast<std::size_t>(hi - lo));
    for (auto it = lo; it != hi; ++it) window.push_back(it->orientation);
    return quat::mean(window);
  }
  // Empty window: lo == hi points at the first sample after the window, and
  // coverage guarantees a sample on each side.
  const ImuSample& after = *lo;
  const ImuSample& before = *(lo - 1);
  const double t = static_cast<double>(frame_ts - before.timestamp_us) /
                   static_cast<double>(after.timestamp_us - before.timestamp_us);
  return quat::slerp(before.orientation, after.orientation, t);
}

AlignResult align(const ImuStreams& streams, std::span<const Frame> frames, std::int64_t clock_offset_us,
                  std::int64_t half_window) {
  AlignResult result;
  result.records.reserve(frames.size());
  for (const auto& frame : frames) {
    const std::int64_t ts = frame.timestamp_us + clock_offset_us;
    bool covered = true;
    for (int j = 0; j < kJoints && covered; ++j) covered = covers(streams.joint(j), ts);
    if (!covered) {
      ++result.dropped;
      continue;
    }
    AlignedRecord rec;
    rec.frame_id = frame.frame_id;
    for (int j = 0; j < kJoints; ++j) {
      rec.orientations[static_cast<std::size_t>(j)] = window_average(streams.joint(j), ts, half_window);
    }
    result.records.push_back(rec);
  }
  if (result.records.empty()) {
    fail(errc::kNoFramesRetained, "all " + std::to_string(frames.size()) + " frames fall outside IMU coverage");
  }
  return result;
}

std::vector<DisplacementRecord> displacements(std::span<const AlignedRecord> records) {
  if (records.size() < 2) fail(errc::kTooShort, "need at least two aligned frames");
  std::vector<DisplacementRecord> out;
  out.reserve(records.size() - 1);
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    const auto& a = records[i];
    const auto& b = records[i + 1];
    if (b.frame_id != a.frame_id + 1) continue;
    DisplacementRecord d;
    d.frame_id = a.frame_id;
    for (std::size_t j = 0; j < kJoints; ++j) d.displacements[j] = quat::relative(a.orientations[j], b.orientations[j]);
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

ImuStreams read_imu(const std::filesystem::path& path) {
  std::vector<ImuSample> samples;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto ctx = path.string() + ":" + std::to_string(line.number);
    const auto tok = textio::split_ws(line.text);
    if (tok.size() != 6) fail(errc::kFormat, ctx + ": expected 6 fields");
    ImuSample s;
    s.timestamp_us = textio::parse_int(tok[0], ctx);
    s.joint_id = static_cast<int>(textio::parse_int(tok[1], ctx));
    s.orientation = quat::canonicalize(textio::parse_double(tok[2], ctx), textio::parse_double(tok[3], ctx),
                                       textio::parse_double(tok[4], ctx), textio::parse_double(tok[5], ctx));
    samples.push_back(s);
  }
  ImuStreams streams;
  streams.append(samples);
  return streams;
}

void write_imu(const std::filesystem::path& path, std::span<const ImuSample> samples) {
  std::string out = "# timestamp_us joint_id w x y z\n";
  for (const auto& s : samples) {
    out += std::to_string(s.timestamp_us);
    out += ' ';
    out += std::to_string(s.joint_id);
    for (double c : s.orientation.components()) {
      out += ' ';
      out += textio::format_double(c);
    }
    out += '\n';
  }
  textio::write_file(path, out);
}

std::vector<Frame> read_frames(const std::filesystem::path& path) {
  std::vector<Frame> frames;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto ctx = path.string() + ":" + std::to_string(line.number);
    const auto tok = textio::split_ws(line.text);
    if (tok.size() != 2) fail(errc::kFormat, ctx + ": expected `frame_id timestamp_us`");
    Frame f{textio::parse_int(tok[0], ctx), textio::parse_int(tok[1], ctx)};
    if (!frames.empty() && f.timestamp_us <= frames.back().timestamp_us) {
      fail(errc::kFormat, ctx + ": frame timestamps must increase");
    }
    frames.push_back(f);
  }
  return frames;
}

void write_frames(const std::filesystem::path& path, std::span<const Frame> frames) {
  std::string out = "# frame_id timestamp_us\n";
  for (const auto& f : frames) out += std::to_string(f.frame_id) + ' ' + std::to_string(f.timestamp_us) + '\n';
  textio::write_file(path, out);
}

namespace {

std::string format_pose_line(std::int64_t frame_id, const JointPoses& poses) {
  std::string line = std::to_string(frame_id);
  for (const auto& q : poses) {
    for (double c : q.components()) {
      line += ' ';
      line += textio::format_double(c);
    }
  }
  line += '\n';
  return line;
}

template <typename Record, typename Member>
std::vector<Record> read_pose_file(const std::filesystem::path& path, Member member) {
  std::vector<Record> out;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto ctx = path.string() + ":" + std::to_string(line.number);
    const auto tok = textio::split_ws(line.text);
    if (tok.size() != 1 + 4 * kJoints) fail(errc::kFormat, ctx + ": expected 25 fields");
    Record r;
    r.frame_id = textio::parse_int(tok[0], ctx);
    for (std::size_t j = 0; j < kJoints; ++j) {
      const std::size_t o = 1 + 4 * j;
      (r.*member)[j] = quat::canonicalize(textio::parse_double(tok[o], ctx), textio::parse_double(tok[o + 1], ctx),
                                          textio::parse_double(tok[o + 2], ctx), textio::parse_double(tok[o + 3], ctx));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

void write_aligned(const std::filesystem::path& path, std::span<const AlignedRecord> records) {
  std::string out = "# frame_id then w x y z for joints 0..5 (absolute)\n";
  for (const auto& r : records) out += format_pose_line(r.frame_id, r.orientations);
  textio::write_file(path, out);
}

std::vector<AlignedRecord> read_aligned(const std::filesystem::path& path) {
  return read_pose_file<AlignedRecord>(path, &AlignedRecord::orientations);
}

void write_displacements(const std::filesystem::path& path, std::span<const DisplacementRecord> records) {
  std::string out = "# frame_id then w x y z for joints 0..5 (relative to next frame)\n";
  for (const auto& r : records) out += format_pose_line(r.frame_id, r.displacements);
  textio::write_file(path, out);
}

std::vector<DisplacementRecord> read_displacements(const std::filesystem::path& path) {
  return read_pose_file<DisplacementRecord>(path, &DisplacementRecord::displacements);
}

}  // namespace kennel::ingest
