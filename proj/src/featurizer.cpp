#include "kennel/featurizer.hpp"

#include <cmath>
#include <string>

#include "kennel/error.hpp"
#include "kennel/rng.hpp"
#include "kennel/textio.hpp"

namespace kennel::featurizer {

const Eigen::VectorXd& FeatureTable::at(std::int64_t frame_id) const {
  const auto it = rows.find(frame_id);
  if (it == rows.end()) fail(errc::kIndexOutOfRange, "no features for frame " + std::to_string(frame_id));
  return it->second;
}

void FeatureTable::insert(std::int64_t frame_id, Eigen::VectorXd v) {
  if (dim == 0 && rows.empty()) dim = static_cast<int>(v.size());
  if (v.size() != dim) {
    fail(errc::kDimMismatch, "frame " + std::to_string(frame_id) + " has " + std::to_string(v.size()) +
                                 " features, expected " + std::to_string(dim));
  }
  if (!rows.emplace(frame_id, std::move(v)).second) {
    fail(errc::kFormat, "duplicate frame id " + std::to_string(frame_id));
  }
}

FeatureTable load_features(const std::filesystem::path& path) {
  FeatureTable table;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto ctx = path.string() + ":" + std::to_string(line.number);
    const auto tok = textio::split_ws(line.text);
    if (tok.size() < 2) fail(errc::kFormat, ctx + ": expected `frame_id v1 ... vD`");
    Eigen::VectorXd v(static_cast<Eigen::Index>(tok.size() - 1));
    for (std::size_t i = 1; i < tok.size(); ++i) v(static_cast<Eigen::Index>(i - 1)) = textio::parse_double(tok[i], ctx);
    try {
      table.insert(textio::parse_int(tok[0], ctx), std::move(v));
    } catch (const Error& e) {
      fail(e.error_class(), ctx + ": " + e.what());
    }
  }
  if (table.rows.empty()) fail(errc::kFormat, path.string() + ": no feature rows");
  return table;
}

void save_features(const FeatureTable& table, const std::filesystem::path& path) {
  std::string out = "# frame_id v1 .. v" + std::to_string(table.dim) + "\n";
  for (const auto& [id, v] : table.rows) {
    out += std::to_string(id);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out += ' ';
      out += textio::format_double(v(i));
    }
    out += '\n';
  }
  textio::write_file(path, out);
}

Projection make_projection(int dim, int context_dim, std::uint64_t seed) {
  const int inputs = 4 * kJoints + context_dim;
  if (context_dim < 0 || dim < inputs) {
    fail(errc::kConfig, "feature dim " + std::to_string(dim) + " cannot hold " + std::to_string(inputs) +
                            " state components injectively");
  }
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = Rng::derive(seed, attempt);
    Projection p{Eigen::MatrixXd(dim, inputs)};
    const double s = 1.0 / std::sqrt(static_cast<double>(inputs));
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights.data()[i] = s * rng.normal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.weights);
    qr.setThreshold(1e-8);
    if (qr.rank() == inputs) return p;
  }
}

Eigen::VectorXd state_vector(const JointPoses& poses, std::span<const double> context) {
  Eigen::VectorXd v(4 * kJoints + static_cast<Eigen::Index>(context.size()));
  Eigen::Index at = 0;
  for (const auto& q : poses) {
    for (double c : q.components()) v(at++) = c;
  }
  for (double c : context) v(at++) = c;
  return v;
}

Eigen::VectorXd synth_observe(const Projection& projection, const JointPoses& poses, std::span<const double> context,
                              double noise_sigma, std::uint64_t noise_seed) {
  if (static_cast<int>(context.size()) != projection.context_dim()) {
    fail(errc::kShapeMismatch, "scene context has " + std::to_string(context.size()) + " entries, expected " +
                                   std::to_string(projection.context_dim()));
  }
  Eigen::VectorXd f = projection.weights * state_vector(poses, context);
  if (noise_sigma > 0.0) {
    Rng rng(noise_seed);
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) += noise_sigma * rng.normal();
  }
  return f;
}

}  // namespace kennel::featurizer
