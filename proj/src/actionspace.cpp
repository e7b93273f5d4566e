#include "kennel/actionspace.hpp"

#include <limits>
#include <sstream>

#include "kennel/error.hpp"
#include "kennel/rng.hpp"
#include "kennel/textio.hpp"

namespace kennel::actionspace {

using quat::UnitQuaternion;

namespace {

double sq(double v) { return v * v; }

std::size_t count_distinct(std::span<const UnitQuaternion> points, std::size_t enough) {
  std::vector<UnitQuaternion> reps;
  for (const auto& p : points) {
    bool seen = false;
    for (const auto& r : reps) {
      if (quat::geodesic_distance(p, r) <= 1e-7) {
        seen = true;
        break;
      }
    }
    if (!seen) {
      reps.push_back(p);
      if (reps.size() >= enough) break;
    }
  }
  return reps.size();
}

std::vector<UnitQuaternion> seed_plus_plus(std::span<const UnitQuaternion> points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<UnitQuaternion> centroids;
  centroids.push_back(points[rng.index(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq(quat::geodesic_distance(points[i], centroids[0]));
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) break;
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > target) break;
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq(quat::geodesic_distance(points[i], centroids.back())));
  }
  return centroids;
}

}  // namespace

int nearest(const UnitQuaternion& q, std::span<const UnitQuaternion> centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = quat::geodesic_distance(q, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double distortion(std::span<const UnitQuaternion> points, std::span<const UnitQuaternion> centroids) {
  double total = 0.0;
  for (const auto& p : points) total += sq(quat::geodesic_distance(p, centroids[static_cast<std::size_t>(nearest(p, centroids))]));
  return total;
}

LloydTrace lloyd(std::span<const UnitQuaternion> points, int k, std::uint64_t seed, int max_iter, double tol) {
  const std::size_t n = points.size();
  const auto kk = static_cast<std::size_t>(k);
  Rng rng(seed);
  std::vector<UnitQuaternion> centroids = seed_plus_plus(points, k, rng);
  if (centroids.size() < kk) fail(errc::kInsufficientData, "fewer distinct points than clusters");

  LloydTrace trace;
  std::vector<int> labels(n, 0);
  std::vector<std::size_t> counts(kk);
  int iter = 0;
  while (iter < max_iter) {
    ++iter;
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = nearest(points[i], centroids);
      ++counts[static_cast<std::size_t>(labels[i])];
    }

    // An empty cluster takes over the point farthest from its own centroid,
    // drawn from a cluster that can spare it.
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto li = static_cast<std::size_t>(labels[i]);
        if (counts[li] < 2) continue;
        const double d = quat::geodesic_distance(points[i], centroids[li]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) fail(errc::kInsufficientData, "cannot repair an empty cluster");
      --counts[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c);
      counts[c] = 1;
      centroids[c] = points[far];
    }

    // Mean update, kept only when it does not raise the cluster's distortion.
    double movement = 0.0;
    std::vector<UnitQuaternion> members;
    for (std::size_t c = 0; c < kk; ++c) {
      members.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(labels[i]) == c) members.push_back(points[i]);
      }
      UnitQuaternion candidate;
      try {
        candidate = quat::mean(members);
      } catch (const Error&) {
        continue;
      }
      double old_cost = 0.0, new_cost = 0.0;
      for (const auto& m : members) {
        old_cost += sq(quat::geodesic_distance(m, centroids[c]));
        new_cost += sq(quat::geodesic_distance(m, candidate));
      }
      if (new_cost <= old_cost) {
        movement = std::max(movement, quat::geodesic_distance(centroids[c], candidate));
        centroids[c] = candidate;
      }
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      objective += sq(quat::geodesic_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]));
    }
    trace.objective_history.push_back(objective);
    if (movement < tol) break;
  }

  trace.result.centroids = std::move(centroids);
  trace.result.iterations = iter;
  trace.result.objective = distortion(points, trace.result.centroids);
  return trace;
}

JointCodebook fit_joint(std::span<const UnitQuaternion> points, const FitOptions& options, int joint) {
  if (options.k < 2) fail(errc::kConfig, "k must be at least 2");
  const auto k = static_cast<std::size_t>(options.k);
  if (count_distinct(points, k) < k) {
    fail(errc::kInsufficientData,
         "joint " + std::to_string(joint) + " has fewer than " + std::to_string(k) + " distinct rotations");
  }
  JointCodebook best;
  bool have = false;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    // Seeds do not depend on the joint index, so permuting joints permutes the codebook.
    const std::uint64_t run_seed = Rng::mix(options.seed ^ Rng::mix(static_cast<std::uint64_t>(r)));
    auto trace = lloyd(points, options.k, run_seed, options.max_iter, options.tol);
    if (!have || trace.result.objective < best.objective) {
      best = std::move(trace.result);
      have = true;
    }
  }
  best.frequencies.assign(k, 0);
  for (const auto& p : points) ++best.frequencies[static_cast<std::size_t>(nearest(p, best.centroids))];
  return best;
}

Codebook fit(std::span<const ingest::DisplacementRecord> displacements, const FitOptions& options) {
  Codebook cb;
  cb.k = options.k;
  cb.seed = options.seed;
  std::vector<UnitQuaternion> points(displacements.size());
  for (int j = 0; j < kJoints; ++j) {
    for (std::size_t i = 0; i < displacements.size(); ++i) {
      points[i] = displacements[i].displacements[static_cast<std::size_t>(j)];
    }
    cb.joints[static_cast<std::size_t>(j)] = fit_joint(points, options, j);
  }
  return cb;
}

int assign(const UnitQuaternion& q, int joint, const Codebook& cb) {
  return nearest(q, cb.joints.at(static_cast<std::size_t>(joint)).centroids);
}

ActionLabel assign(const JointPoses& displacement, const Codebook& cb) {
  ActionLabel label{};
  for (int j = 0; j < kJoints; ++j) label[static_cast<std::size_t>(j)] = assign(displacement[static_cast<std::size_t>(j)], j, cb);
  return label;
}

const UnitQuaternion& decode(int label, int joint, const Codebook& cb) {
  if (joint < 0 || joint >= kJoints) fail(errc::kIndexOutOfRange, "joint " + std::to_string(joint));
  const auto& centroids = cb.joints[static_cast<std::size_t>(joint)].centroids;
  if (label < 0 || static_cast<std::size_t>(label) >= centroids.size()) {
    fail(errc::kIndexOutOfRange, "class " + std::to_string(label) + " outside [0," + std::to_string(centroids.size()) + ")");
  }
  return centroids[static_cast<std::size_t>(label)];
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const Codebook& cb) {
  std::string out = "codebook v1 joints=6 k=" + std::to_string(cb.k) + " seed=" + std::to_string(cb.seed) + "\n";
  for (int j = 0; j < kJoints; ++j) {
    const auto& jc = cb.joints[static_cast<std::size_t>(j)];
    out += "# fit joint=" + std::to_string(j) + " iterations=" + std::to_string(jc.iterations) +
           " objective=" + textio::format_double(jc.objective) + "\n";
    for (std::size_t c = 0; c < jc.centroids.size(); ++c) {
      out += std::to_string(j) + ' ' + std::to_string(c);
      for (double v : jc.centroids[c].components()) out += ' ' + textio::format_double(v);
      out += ' ' + std::to_string(jc.frequencies[c]) + '\n';
    }
  }
  return out;
}

namespace {

std::string_view expect_key(std::string_view token, std::string_view key) {
  if (token.substr(0, key.size()) != key) fail(errc::kFormat, "codebook: expected '" + std::string(key) + "'");
  return token.substr(key.size());
}

}  // namespace

Codebook parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(errc::kFormat, "codebook: empty file");
  auto head = textio::split_ws(line);
  if (head.size() != 5 || head[0] != "codebook") fail(errc::kFormat, "codebook: bad header");
  if (head[1] != "v1") fail(errc::kFormat, "codebook: unsupported version '" + std::string(head[1]) + "'");
  if (expect_key(head[2], "joints=") != "6") fail(errc::kFormat, "codebook: joints must be 6");

  Codebook cb;
  cb.k = static_cast<int>(textio::parse_int(expect_key(head[3], "k="), "codebook k"));
  cb.seed = textio::parse_uint(expect_key(head[4], "seed="), "codebook seed");
  if (cb.k < 2) fail(errc::kFormat, "codebook: k must be at least 2");

  std::size_t rows = 0;
  while (std::getline(in, line)) {
    auto tok = textio::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0].front() == '#') {
      if (tok[0] == "#" && tok.size() == 5 && tok[1] == "fit") {
        const auto j = textio::parse_int(expect_key(tok[2], "joint="), "codebook fit joint");
        if (j < 0 || j >= kJoints) fail(errc::kFormat, "codebook: fit joint out of range");
        auto& jc = cb.joints[static_cast<std::size_t>(j)];
        jc.iterations = static_cast<int>(textio::parse_int(expect_key(tok[3], "iterations="), "codebook iterations"));
        jc.objective = textio::parse_double(expect_key(tok[4], "objective="), "codebook objective");
      }
      continue;
    }
    if (tok.size() != 7) fail(errc::kFormat, "codebook: expected `joint class w x y z frequency`");
    const auto j = static_cast<std::size_t>(rows / static_cast<std::size_t>(cb.k));
    const auto c = static_cast<std::size_t>(rows % static_cast<std::size_t>(cb.k));
    if (j >= kJoints || textio::parse_int(tok[0], "codebook joint") != static_cast<std::int64_t>(j) ||
        textio::parse_int(tok[1], "codebook class") != static_cast<std::int64_t>(c)) {
      fail(errc::kFormat, "codebook: rows out of order at row " + std::to_string(rows));
    }
    auto& jc = cb.joints[j];
    jc.centroids.push_back(quat::canonicalize(textio::parse_double(tok[2], "w"), textio::parse_double(tok[3], "x"),
                                              textio::parse_double(tok[4], "y"), textio::parse_double(tok[5], "z")));
    const auto f = textio::parse_int(tok[6], "codebook frequency");
    if (f < 0) fail(errc::kFormat, "codebook: negative frequency");
    jc.frequencies.push_back(f);
    ++rows;
  }
  if (rows != static_cast<std::size_t>(kJoints * cb.k)) {
    fail(errc::kFormat, "codebook: expected " + std::to_string(kJoints * cb.k) + " rows, found " + std::to_string(rows));
  }
  return cb;
}

void save(const Codebook& cb, const std::filesystem::path& path) { textio::write_file(path, serialize(cb)); }

Codebook load(const std::filesystem::path& path) { return parse(textio::read_file(path)); }

std::uint64_t content_hash(const Codebook& cb) { return textio::fnv1a(serialize(cb)); }

void write_labels(const std::filesystem::path& path, std::span<const LabelRecord> labels) {
  std::string out = "# frame_id j0 j1 j2 j3 j4 j5\n";
  for (const auto& r : labels) {
    out += std::to_string(r.frame_id);
    for (int c : r.classes) out += ' ' + std::to_string(c);
    out += '\n';
  }
  textio::write_file(path, out);
}

std::vector<LabelRecord> read_labels(const std::filesystem::path& path) {
  std::vector<LabelRecord> out;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto ctx = path.string() + ":" + std::to_string(line.number);
    const auto tok = textio::split_ws(line.text);
    if (tok.size() != 1 + kJoints) fail(errc::kFormat, ctx + ": expected `frame_id j0..j5`");
    LabelRecord r;
    r.frame_id = textio::parse_int(tok[0], ctx);
    for (std::size_t j = 0; j < kJoints; ++j) {
      const auto c = textio::parse_int(tok[1 + j], ctx);
      if (c < 0) fail(errc::kFormat, ctx + ": negative class");
      r.classes[j] = static_cast<int>(c);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace kennel::actionspace
