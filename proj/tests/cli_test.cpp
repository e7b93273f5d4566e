// Drives the kennel executable as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>

#include "helpers.hpp"
#include "kennel/textio.hpp"

namespace kennel {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string cmd = std::string(KENNEL_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p) != nullptr) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::map<std::string, std::string> read_kv(const fs::path& path) {
  std::map<std::string, std::string> kv;
  for (const auto& line : textio::read_data_lines(path)) {
    const auto eq = line.text.find('=');
    kv[line.text.substr(0, eq)] = line.text.substr(eq + 1);
  }
  return kv;
}

/// A small simulated dataset run through sync, fit-codebook and label.
class CliPipeline : public ::testing::Test {
 protected:
  void prepare(const std::string& name) {
    dir_ = testing::scratch_dir(name);
    textio::write_file(dir_ / "run.ini",
                       "[paths]\nlabels = fitted_labels.txt\ncodebook = codebook.txt\n"
                       "[act]\nepochs = 5\n[plan]\nepochs = 5\n[sim]\nepisodes = 30\n");
    auto r = run("simulate " + p("run.ini"));
    ASSERT_EQ(r.code, 0) << r.out;
    r = run("sync " + p("data/imu.txt") + " " + p("data/frames.txt") + " -o " + p("data"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("dropped=0"), std::string::npos) << r.out;
    r = run("fit-codebook " + p("data/displacements.txt") + " --seed 7 -o " + p("data/codebook.txt"));
    ASSERT_EQ(r.code, 0) << r.out;
    r = run("label " + p("data/displacements.txt") + " " + p("data/codebook.txt") + " -o " +
            p("data/fitted_labels.txt"));
    ASSERT_EQ(r.code, 0) << r.out;
  }
  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }
  std::string data_args() const { return p("data") + " --labels " + p("data/fitted_labels.txt"); }

  fs::path dir_;
};

TEST_F(CliPipeline, EndToEnd) {
  ASSERT_NO_FATAL_FAILURE(prepare("cli_e2e"));
  auto r = run("train-act " + p("run.ini"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"out/act.ckpt", "out/act_loss.dat", "out/act_config.ini"}) EXPECT_TRUE(fs::exists(p(f))) << f;
  r = run("eval-act " + p("out/act.ckpt") + " " + data_args() + " --codebook " + p("data/codebook.txt") +
          " --displacements " + p("data/displacements.txt") + " -o " + p("eval_act"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto kv = read_kv(p("eval_act/report.kv"));
  for (const char* key : {"model.mean_class_accuracy", "nn.mean_class_accuracy", "mode.mean_class_accuracy",
                          "model.perplexity", "model.angular_deg"}) {
    EXPECT_TRUE(kv.count(key)) << key;
  }

  r = run("train-plan " + p("run.ini"));
  ASSERT_EQ(r.code, 0) << r.out;
  r = run("eval-plan " + p("out/plan.ckpt") + " " + data_args() + " --codebook " + p("data/codebook.txt") + " -o " +
          p("eval_plan"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(read_kv(p("eval_plan/report.kv")).count("prior.all_joint_accuracy"));

  r = run("probe " + p("out/act.ckpt") + " " + data_args() + " -o " + p("probe"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(read_kv(p("probe/probe.kv")).count("probe.trained"));
}

TEST_F(CliPipeline, ForeignCodebookRejected) {
  ASSERT_NO_FATAL_FAILURE(prepare("cli_foreign"));
  ASSERT_EQ(run("train-act " + p("run.ini")).code, 0);
  ASSERT_EQ(run("fit-codebook " + p("data/displacements.txt") + " --seed 8 --restarts 1 -o " + p("other.txt")).code,
            0);
  if (textio::read_file(p("other.txt")) == textio::read_file(p("data/codebook.txt"))) GTEST_SKIP() << "seeds agree";
  const auto r = run("eval-act " + p("out/act.ckpt") + " " + data_args() + " --codebook " + p("other.txt") + " -o " +
                     p("ev"));
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("class=config.invalid"), std::string::npos);
}

TEST(Cli, FitCodebookRepeatable) {
  const auto dir = testing::scratch_dir("cli_repeat");
  textio::write_file(dir / "run.ini", "[sim]\nepisodes = 30\n");
  ASSERT_EQ(run("simulate " + (dir / "run.ini").string()).code, 0);
  const auto d = (dir / "data").string();
  ASSERT_EQ(run("sync " + d + "/imu.txt " + d + "/frames.txt -o " + d).code, 0);
  ASSERT_EQ(run("fit-codebook " + d + "/displacements.txt --seed 7 -o " + d + "/a.txt").code, 0);
  ASSERT_EQ(run("fit-codebook " + d + "/displacements.txt --seed 7 -o " + d + "/b.txt").code, 0);
  EXPECT_EQ(textio::read_file(d + "/a.txt"), textio::read_file(d + "/b.txt"));
}

TEST(Cli, MissingFileIsIoMissing) {
  const auto r = run("label /nonexistent/disp.txt /nonexistent/cb.txt");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("error class=io.missing"), std::string::npos) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
}

TEST(Cli, UsageErrorsExitThree) {
  EXPECT_EQ(run("").code, 3);
  EXPECT_EQ(run("no-such-command").code, 3);
  EXPECT_EQ(run("fit-codebook").code, 3);
}

TEST(Cli, BadConfigExitsThree) {
  const auto dir = testing::scratch_dir("cli_badcfg");
  textio::write_file(dir / "run.ini", "[act]\nhidden = -1\n");
  const auto r = run("train-act " + (dir / "run.ini").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("class=config.invalid"), std::string::npos);
}

TEST(Cli, HelpListsDefaults) {
  const auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"[act]", "hidden = 64", "[plan]", "[sim]", "pose_count = 8", "gradcheck", "Exit codes"}) {
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  }
  const auto sub = run("fit-codebook --help");
  EXPECT_NE(sub.out.find("--seed"), std::string::npos);
  EXPECT_NE(sub.out.find("[0]"), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  const auto r = run("gradcheck");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("act PASS"), std::string::npos);
  EXPECT_NE(r.out.find("plan PASS"), std::string::npos);
}

TEST(Cli, GradcheckFailureExitsFour) {
  const auto r = run("gradcheck --tol 0");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace kennel
