#include "kennel/episodes.hpp"

#include <map>
#include <string>

#include "kennel/error.hpp"
#include "kennel/textio.hpp"

namespace kennel {

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::string out = "# episode_id first_frame last_frame scene_label\n";
  for (const auto& e : entries) {
    out += std::to_string(e.episode_id) + ' ' + std::to_string(e.first_frame) + ' ' + std::to_string(e.last_frame) +
           ' ' + std::to_string(e.scene) + '\n';
  }
  textio::write_file(path, out);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::vector<ManifestEntry> out;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto ctx = path.string() + ":" + std::to_string(line.number);
    const auto tok = textio::split_ws(line.text);
    if (tok.size() != 4) fail(errc::kFormat, ctx + ": expected `episode_id first_frame last_frame scene_label`");
    ManifestEntry e{static_cast<int>(textio::parse_int(tok[0], ctx)), textio::parse_int(tok[1], ctx),
                    textio::parse_int(tok[2], ctx), static_cast<int>(textio::parse_int(tok[3], ctx))};
    if (e.last_frame < e.first_frame) fail(errc::kFormat, ctx + ": last_frame precedes first_frame");
    if (!out.empty() && e.first_frame <= out.back().last_frame) fail(errc::kFormat, ctx + ": episodes overlap");
    out.push_back(e);
  }
  return out;
}

std::vector<EpisodeTensor> assemble_episodes(const featurizer::FeatureTable& features,
                                             std::span<const actionspace::LabelRecord> labels,
                                             std::span<const ManifestEntry> manifest, int min_frames) {
  std::map<std::int64_t, ActionLabel> label_of;
  for (const auto& r : labels) label_of[r.frame_id] = r.classes;

  std::vector<ManifestEntry> ranges(manifest.begin(), manifest.end());
  if (ranges.empty() && !features.rows.empty()) {
    ranges.push_back({0, features.rows.begin()->first, features.rows.rbegin()->first, -1});
  }

  std::vector<EpisodeTensor> out;
  for (const auto& range : ranges) {
    std::vector<std::int64_t> run;
    auto flush = [&] {
      if (static_cast<int>(run.size()) >= min_frames) {
        EpisodeTensor ep;
        ep.first_frame = run.front();
        ep.scene = range.scene;
        ep.features.resize(static_cast<Eigen::Index>(run.size()), features.dim);
        for (std::size_t i = 0; i < run.size(); ++i) {
          ep.features.row(static_cast<Eigen::Index>(i)) = features.at(run[i]).transpose();
        }
        for (std::size_t i = 0; i + 1 < run.size(); ++i) ep.labels.push_back(label_of.at(run[i]));
        out.push_back(std::move(ep));
      }
      run.clear();
    };
    for (auto it = features.rows.lower_bound(range.first_frame);
         it != features.rows.end() && it->first <= range.last_frame; ++it) {
      // Continue the run only if the previous frame is adjacent and labelled.
      if (!run.empty() && (it->first != run.back() + 1 || !label_of.contains(run.back()))) flush();
      run.push_back(it->first);
    }
    flush();
  }
  return out;
}

std::vector<std::vector<std::int64_t>> count_labels(std::span<const EpisodeTensor> episodes, int k) {
  std::vector<std::vector<std::int64_t>> counts(kJoints, std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  for (const auto& ep : episodes) {
    for (const auto& a : ep.labels) {
      for (std::size_t j = 0; j < kJoints; ++j) {
        if (a[j] < 0 || a[j] >= k) fail(errc::kIndexOutOfRange, "label " + std::to_string(a[j]) + " outside [0, K)");
        ++counts[j][static_cast<std::size_t>(a[j])];
      }
    }
  }
  return counts;
}

std::vector<std::vector<std::int64_t>> codebook_frequencies(const actionspace::Codebook& cb) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& j : cb.joints) out.push_back(j.frequencies);
  return out;
}

Split split_episodes(std::span<const EpisodeTensor> episodes, int every, int offset) {
  if (every < 2) fail(errc::kConfig, "split period must be at least 2");
  Split s;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    (static_cast<int>(i % static_cast<std::size_t>(every)) == offset ? s.test : s.train).push_back(episodes[i]);
  }
  return s;
}

}  // namespace kennel
