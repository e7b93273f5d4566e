#include "kennel/pipeline.hpp"

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "kennel/kennelsim.hpp"

namespace kennel::pipeline {
namespace {

using testing::error_class_of;

sim::WorldConfig small_world() {
  sim::WorldConfig c;
  c.episodes = 20;
  c.episode_length = 12;
  return c;
}

TEST(LoadEpisodes, MatchesInMemoryAssembly) {
  const auto data = sim::generate(small_world());
  const auto dir = testing::scratch_dir("pipeline_load");
  sim::write_dataset(data, dir);
  const auto loaded = load_episodes(dir, dir / "labels.txt");
  const auto direct = assemble_episodes(data.features, data.labels, data.manifest);
  ASSERT_EQ(loaded.size(), direct.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].first_frame, direct[i].first_frame);
    EXPECT_EQ(loaded[i].scene, direct[i].scene);
    EXPECT_EQ(loaded[i].labels, direct[i].labels);
    EXPECT_TRUE(loaded[i].features.isApprox(direct[i].features, 1e-15));
  }
  EXPECT_EQ(error_class_of([&] { load_episodes(dir, dir / "labels.txt", 7); }), "format.dim_mismatch");
  EXPECT_EQ(error_class_of([&] { load_episodes(dir, dir / "nope.txt"); }), "io.missing");
}

TEST(LoadEpisodes, ManifestIsOptional) {
  const auto data = sim::generate(small_world());
  const auto dir = testing::scratch_dir("pipeline_nomanifest");
  sim::write_dataset(data, dir);
  std::filesystem::remove(dir / "episodes.txt");
  const auto eps = load_episodes(dir, dir / "labels.txt");
  // Frame-id gaps still separate the episodes; scenes are unknown.
  ASSERT_EQ(eps.size(), data.episodes.size());
  EXPECT_EQ(eps.front().scene, -1);
}

TEST(EvaluateActing, ReportsModelAndBaselines) {
  const auto data = sim::generate(small_world());
  ingest::ImuStreams imu;
  imu.append(data.imu);
  const auto lab = sync_and_label(imu, data.frames, {});
  const auto eps = assemble_episodes(data.features, lab.labels, data.manifest);
  const auto split = split_episodes(eps, 5);
  acting::ActingConfig cfg;
  cfg.hidden = 8;
  cfg.embed_dim = 8;
  cfg.decoder_input = 8;
  const acting::ActingModel model(cfg, 1);
  const auto rot = index_rotations(lab.displacements);
  const auto reports = evaluate_acting(model, split.train, split.test, &lab.codebook, &rot);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].name, "model");
  EXPECT_EQ(reports[1].name, "nn");
  EXPECT_EQ(reports[2].name, "mode");
  for (const auto& r : reports) {
    EXPECT_TRUE(r.report.angular_deg.has_value()) << r.name;
    EXPECT_EQ(r.report.items, reports[0].report.items);
  }
  EXPECT_TRUE(reports[0].report.perplexity.has_value());
  EXPECT_FALSE(reports[1].report.perplexity.has_value());
  // Without rotations the angular metric is absent.
  EXPECT_FALSE(evaluate_acting(model, split.train, split.test, nullptr, nullptr)[0].report.angular_deg);
}

TEST(EvaluateActing, NearestNeighbourRecallsTrainingWindows) {
  // Evaluating on the training episodes themselves: every query has an exact
  // key, so the NN baseline reproduces the ground truth.
  const auto data = sim::generate(small_world());
  const auto eps = assemble_episodes(data.features, data.labels, data.manifest);
  acting::ActingConfig cfg;
  cfg.hidden = 4;
  const acting::ActingModel model(cfg, 1);
  const auto reports = evaluate_acting(model, eps, eps, nullptr, nullptr);
  EXPECT_DOUBLE_EQ(reports[1].report.all_joint_accuracy, 100.0);
}

TEST(EvaluatePlanning, EmptySidesThrow) {
  const auto data = sim::generate(small_world());
  const auto eps = assemble_episodes(data.features, data.labels, data.manifest);
  const planning::PlanningModel model({32, 4, 8, 5}, 1);
  const std::vector<EpisodeTensor> none;
  EXPECT_EQ(error_class_of([&] { evaluate_planning(model, none, eps, nullptr, nullptr); }), "data.empty_training_set");
  EXPECT_EQ(error_class_of([&] { evaluate_planning(model, eps, none, nullptr, nullptr); }), "data.empty");
  EXPECT_EQ(evaluate_planning(model, eps, eps, nullptr, nullptr).size(), 3u);
}

TEST(ModelGradientChecks, DefaultSetupPasses) {
  const auto checks = model_gradient_checks({});
  ASSERT_EQ(checks.size(), 2u);
  for (const auto& c : checks) {
    EXPECT_TRUE(c.report.passed(1e-4)) << c.model << " " << c.report.max_rel_error;
    EXPECT_FALSE(c.report.entries.empty());
  }
}

}  // namespace
}  // namespace kennel::pipeline
