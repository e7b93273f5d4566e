#include "kennel/featurizer.hpp"

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "kennel/quat.hpp"
#include "kennel/textio.hpp"

namespace kennel::featurizer {
namespace {

using testing::error_class_of;

JointPoses turned_poses(double angle) {
  JointPoses p;
  for (int j = 0; j < kJoints; ++j) p[static_cast<std::size_t>(j)] = quat::from_axis_angle({0.0, 1.0, 0.0}, angle * (j + 1));
  return p;
}

TEST(FeatureTable, RoundTrip) {
  Rng rng(3);
  FeatureTable t;
  for (std::int64_t id : {4, 5, 9}) {
    Eigen::VectorXd v(5);
    for (auto& x : v) x = rng.normal();
    t.insert(id, v);
  }
  const auto path = testing::scratch_dir("featurizer") / "f.txt";
  save_features(t, path);
  const auto back = load_features(path);
  EXPECT_EQ(back.dim, 5);
  ASSERT_EQ(back.rows.size(), 3u);
  for (const auto& [id, v] : t.rows) EXPECT_EQ(back.at(id), v);
}

TEST(FeatureTable, RaggedRowsRejected) {
  const auto path = testing::scratch_dir("featurizer_ragged") / "f.txt";
  textio::write_file(path, "0 1 2 3\n1 1 2\n");
  EXPECT_EQ(error_class_of([&] { load_features(path); }), "format.dim_mismatch");
}

TEST(FeatureTable, EmptyAndMalformedFilesRejected) {
  const auto dir = testing::scratch_dir("featurizer_empty");
  textio::write_file(dir / "empty.txt", "# nothing\n");
  textio::write_file(dir / "bad.txt", "0 1 x\n");
  textio::write_file(dir / "dup.txt", "0 1\n0 2\n");
  EXPECT_EQ(error_class_of([&] { load_features(dir / "empty.txt"); }), "format.error");
  EXPECT_EQ(error_class_of([&] { load_features(dir / "bad.txt"); }), "format.error");
  EXPECT_EQ(error_class_of([&] { load_features(dir / "dup.txt"); }), "format.error");
  EXPECT_EQ(error_class_of([&] { load_features(dir / "missing.txt"); }), "io.missing");
}

TEST(FeatureTable, UnknownFrame) {
  FeatureTable t;
  t.insert(0, Eigen::VectorXd::Zero(2));
  EXPECT_EQ(error_class_of([&] { t.at(1); }), "data.index_out_of_range");
}

TEST(Projection, ShapeAndRank) {
  const auto p = make_projection(32, 4, 11);
  EXPECT_EQ(p.dim(), 32);
  EXPECT_EQ(p.context_dim(), 4);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.weights);
  EXPECT_EQ(qr.rank(), 28);
  EXPECT_EQ(error_class_of([] { make_projection(27, 4, 1); }), "config.invalid");
}

TEST(StateVector, Layout) {
  const auto poses = turned_poses(0.3);
  const std::vector<double> ctx{7.0, -8.0};
  const auto v = state_vector(poses, ctx);
  ASSERT_EQ(v.size(), 26);
  EXPECT_EQ(v(4), poses[1].w());
  EXPECT_EQ(v(7), poses[1].z());
  EXPECT_EQ(v(24), 7.0);
  EXPECT_EQ(v(25), -8.0);
}

TEST(SynthObserve, ZeroNoiseIsDeterministicAndLinear) {
  const auto p = make_projection(30, 2, 5);
  const auto poses = turned_poses(0.7);
  const std::vector<double> ctx{0.5, -1.0};
  const auto a = synth_observe(p, poses, ctx, 0.0, 1);
  const auto b = synth_observe(p, poses, ctx, 0.0, 999);
  EXPECT_EQ(a, b);
  EXPECT_LT((a - p.weights * state_vector(poses, ctx)).norm(), 1e-12);
}

TEST(SynthObserve, DistinctScenesDiffer) {
  const auto p = make_projection(30, 2, 5);
  const auto poses = turned_poses(0.2);
  const std::vector<double> s0{1.0, 0.0}, s1{0.0, 1.0};
  EXPECT_GT((synth_observe(p, poses, s0, 0.0, 0) - synth_observe(p, poses, s1, 0.0, 0)).norm(), 1e-3);
}

TEST(SynthObserve, NoiseIsSeededWithTheRequestedSpread) {
  const auto p = make_projection(400, 0, 2);
  const auto poses = turned_poses(1.1);
  const auto clean = synth_observe(p, poses, {}, 0.0, 0);
  const auto noisy = synth_observe(p, poses, {}, 0.1, 42);
  EXPECT_EQ(noisy, synth_observe(p, poses, {}, 0.1, 42));
  EXPECT_NE(noisy, synth_observe(p, poses, {}, 0.1, 43));
  const double sd = std::sqrt((noisy - clean).squaredNorm() / 400.0);
  EXPECT_NEAR(sd, 0.1, 0.015);
}

TEST(SynthObserve, ContextSizeChecked) {
  const auto p = make_projection(30, 2, 5);
  EXPECT_EQ(error_class_of([&] { synth_observe(p, turned_poses(0.0), std::vector<double>{1.0}, 0.0, 0); }),
            "numeric.shape_mismatch");
}

}  // namespace
}  // namespace kennel::featurizer
