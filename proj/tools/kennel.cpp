// Command-line front end: simulate, sync, fit-codebook, label, train, eval,
// probe and gradcheck. Every failure prints one line
//   error class=<class> message="<text>"
// to stderr and exits with the code of the error class.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kennel/acting.hpp"
#include "kennel/actionspace.hpp"
#include "kennel/episodes.hpp"
#include "kennel/error.hpp"
#include "kennel/eval.hpp"
#include "kennel/ingest.hpp"
#include "kennel/kennelsim.hpp"
#include "kennel/netcore.hpp"
#include "kennel/pipeline.hpp"
#include "kennel/planning.hpp"
#include "kennel/runconfig.hpp"
#include "kennel/textio.hpp"

namespace fs = std::filesystem;
using namespace kennel;

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

int report_error(const std::string& cls, const std::string& message, int code) {
  std::cerr << "error class=" << cls << " message=" << quoted(message) << '\n';
  return code;
}

std::string fmt(double v) { return textio::format_double(v); }

/// Options shared by the evaluation commands.
struct DataOptions {
  std::string labels;  // default <data>/labels.txt
  std::string codebook;
  std::string displacements;
  std::string out = "eval";
  int split_every = 5;
  int split_offset = 0;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--labels", o.labels, "label file (default <data>/labels.txt)");
  cmd->add_option("--codebook", o.codebook, "codebook file; checked against the checkpoint and used for the angular metric");
  cmd->add_option("--displacements", o.displacements, "displacement file giving true rotations for the angular metric");
  cmd->add_option("-o,--out", o.out, "report directory")->capture_default_str();
  cmd->add_option("--split-every", o.split_every, "every n-th episode is held out")->capture_default_str();
  cmd->add_option("--split-offset", o.split_offset, "index of the first held-out episode")->capture_default_str();
}

struct LoadedData {
  Split split;
  std::optional<actionspace::Codebook> codebook;
  std::optional<pipeline::RotationIndex> rotations;
};

LoadedData load_data(const fs::path& data, const DataOptions& o, const net::Checkpoint& ckpt) {
  LoadedData d;
  const fs::path labels = o.labels.empty() ? data / "labels.txt" : fs::path(o.labels);
  const auto episodes = pipeline::load_episodes(data, labels, static_cast<int>(ckpt.dim("D")));
  d.split = split_episodes(episodes, o.split_every, o.split_offset);
  if (!o.codebook.empty()) {
    d.codebook = actionspace::load(o.codebook);
    const auto hash = actionspace::content_hash(*d.codebook);
    if (ckpt.codebook_hash != 0 && ckpt.codebook_hash != hash) {
      fail(errc::kConfig, "codebook " + o.codebook + " is not the one the checkpoint was trained with");
    }
  }
  if (!o.displacements.empty()) d.rotations = pipeline::index_rotations(ingest::read_displacements(o.displacements));
  return d;
}

void print_reports(std::span<const eval::NamedReport> reports) {
  for (const auto& r : reports) {
    std::cout << r.name << " mca=" << fmt(r.report.mean_class_accuracy)
              << " all_joint=" << fmt(r.report.all_joint_accuracy);
    if (r.report.perplexity) std::cout << " perplexity=" << fmt(*r.report.perplexity);
    if (r.report.angular_deg) std::cout << " angular_deg=" << fmt(*r.report.angular_deg);
    std::cout << '\n';
  }
}

/// Frequencies for the loss: the codebook's when one is configured,
/// otherwise counts over the training episodes.
std::vector<std::vector<std::int64_t>> training_frequencies(const RunConfig& c, std::span<const EpisodeTensor> train,
                                                            std::uint64_t& hash) {
  hash = 0;
  if (c.codebook.empty()) return count_labels(train, c.classes);
  const auto cb = actionspace::load(c.codebook);
  hash = actionspace::content_hash(cb);
  return codebook_frequencies(cb);
}

template <typename Train>
void train_command(const fs::path& config_path, const char* stem, Train&& train_fn) {
  auto c = load_run_config(config_path);
  const auto episodes = pipeline::load_episodes(c.data_dir, c.labels, c.feature_dim);
  if (episodes.empty()) fail(errc::kEmptyInput, "no episodes in " + c.data_dir.string());
  const int dim = static_cast<int>(episodes.front().features.cols());
  c.feature_dim = dim;
  const auto split = split_episodes(episodes, c.split_every, c.split_offset);
  std::uint64_t hash = 0;
  const auto freqs = training_frequencies(c, split.train, hash);
  const auto [ckpt, curve] = train_fn(c, split.train, freqs, hash);
  fs::create_directories(c.out_dir);
  net::save_checkpoint(ckpt, c.out_dir / (std::string(stem) + ".ckpt"));
  eval::write_curve(c.out_dir / (std::string(stem) + "_loss.dat"), curve, "epoch weighted_loss");
  textio::write_file(c.out_dir / (std::string(stem) + "_config.ini"), to_ini(c));
  std::cout << stem << " episodes=" << split.train.size() << " epochs=" << curve.size()
            << " final_loss=" << (curve.empty() ? std::string("nan") : fmt(curve.back())) << '\n';
}

std::string config_help() {
  return "\nConfig file (INI). Every key with its default:\n\n" + to_ini(RunConfig{}) +
         "\nRelative data_dir and out_dir are resolved against the config file's directory;\n"
         "labels and codebook against data_dir. An empty codebook trains\n"
         "on label counts from the training split.\n"
         "\nExit codes: 0 success, 2 I/O or format error, 3 config or data error,\n"
         "4 numeric failure, 5 acceptance failure.\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kennel: multi-joint action prediction from IMU-labelled video features"};
  app.require_subcommand(1);
  app.footer(config_help());
  app.get_formatter()->column_width(36);

  // simulate
  std::string sim_config;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset into [paths] data_dir");
  simulate->add_option("config", sim_config, "run config (INI)")->required();

  // sync
  std::string imu_path, frames_path, sync_out = ".";
  std::int64_t offset_us = 0;
  auto* sync = app.add_subcommand("sync", "align IMU streams to frames; writes aligned.txt and displacements.txt");
  sync->add_option("imu", imu_path, "IMU file")->required();
  sync->add_option("frames", frames_path, "frame timestamp file")->required();
  sync->add_option("--offset-us", offset_us, "clock offset added to frame timestamps")->capture_default_str();
  sync->add_option("-o,--out", sync_out, "output directory")->capture_default_str();

  // fit-codebook
  std::string fit_disp, fit_out = "codebook.txt";
  actionspace::FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit-codebook", "k-means codebook per joint over displacement rotations");
  fit_cmd->add_option("displacements", fit_disp, "displacement file")->required();
  fit_cmd->add_option("--k", fit.k, "classes per joint")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "seeding")->capture_default_str();
  fit_cmd->add_option("--restarts", fit.restarts, "independent seedings")->capture_default_str();
  fit_cmd->add_option("--max-iter", fit.max_iter, "Lloyd iterations per seeding")->capture_default_str();
  fit_cmd->add_option("--tol", fit.tol, "convergence threshold, radians")->capture_default_str();
  fit_cmd->add_option("-o,--out", fit_out, "codebook file")->capture_default_str();

  // label
  std::string label_disp, label_cb, label_out = "fitted_labels.txt";
  auto* label = app.add_subcommand("label", "assign every displacement to its nearest codebook class");
  label->add_option("displacements", label_disp, "displacement file")->required();
  label->add_option("codebook", label_cb, "codebook file")->required();
  label->add_option("-o,--out", label_out, "label file")->capture_default_str();

  // train-act / train-plan
  std::string act_config, plan_config;
  auto* train_act = app.add_subcommand("train-act", "train the acting model; writes act.ckpt, act_loss.dat, act_config.ini");
  train_act->add_option("config", act_config, "run config (INI)")->required();
  auto* train_plan =
      app.add_subcommand("train-plan", "train the planning model; writes plan.ckpt, plan_loss.dat, plan_config.ini");
  train_plan->add_option("config", plan_config, "run config (INI)")->required();

  // eval-act / eval-plan / probe
  std::string eval_ckpt, eval_data;
  DataOptions eval_opts;
  auto* eval_act = app.add_subcommand("eval-act", "score the acting model and baselines on held-out episodes");
  eval_act->add_option("checkpoint", eval_ckpt, "act checkpoint")->required();
  eval_act->add_option("data", eval_data, "data directory")->required();
  add_data_options(eval_act, eval_opts);

  auto* eval_plan = app.add_subcommand("eval-plan", "score the planning model and baselines on held-out episodes");
  eval_plan->add_option("checkpoint", eval_ckpt, "plan checkpoint")->required();
  eval_plan->add_option("data", eval_data, "data directory")->required();
  add_data_options(eval_plan, eval_opts);

  eval::ProbeConfig probe_cfg;
  std::uint64_t probe_random_seed = 1;
  auto* probe = app.add_subcommand("probe", "linear scene probe on trained versus random encoder states");
  probe->add_option("checkpoint", eval_ckpt, "act checkpoint")->required();
  probe->add_option("data", eval_data, "data directory with episodes.txt")->required();
  add_data_options(probe, eval_opts);
  probe->add_option("--iterations", probe_cfg.iterations, "gradient steps of the probe")->capture_default_str();
  probe->add_option("--lr", probe_cfg.lr, "probe learning rate")->capture_default_str();
  probe->add_option("--seed", probe_cfg.seed, "probe initialization")->capture_default_str();
  probe->add_option("--random-seed", probe_random_seed, "seed of the random encoder")->capture_default_str();

  // gradcheck
  pipeline::GradCheckSetup gc;
  double gc_tol = 1e-4;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of both models; exit 0 iff all pass");
  gradcheck->add_option("--hidden", gc.hidden, "H")->capture_default_str();
  gradcheck->add_option("--dim", gc.feature_dim, "D")->capture_default_str();
  gradcheck->add_option("--steps", gc.steps, "N")->capture_default_str();
  gradcheck->add_option("--seed", gc.seed, "parameter and data seed")->capture_default_str();
  gradcheck->add_option("--tol", gc_tol, "relative error bound")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(std::string(errc::kConfig), e.what(), 3);
  }

  try {
    if (*simulate) {
      const auto c = load_run_config(sim_config);
      const auto data = sim::generate(c.world);
      sim::write_dataset(data, c.data_dir);
      std::cout << "episodes=" << data.episodes.size() << " frames=" << data.frames.size()
                << " imu_samples=" << data.imu.size() << " dir=" << c.data_dir.string() << '\n';
    } else if (*sync) {
      const auto streams = ingest::read_imu(imu_path);
      const auto frames = ingest::read_frames(frames_path);
      const auto aligned = ingest::align(streams, frames, offset_us);
      const auto disp = ingest::displacements(aligned.records);
      ingest::write_aligned(fs::path(sync_out) / "aligned.txt", aligned.records);
      ingest::write_displacements(fs::path(sync_out) / "displacements.txt", disp);
      std::cout << "aligned=" << aligned.records.size() << " dropped=" << aligned.dropped
                << " displacements=" << disp.size() << '\n';
    } else if (*fit_cmd) {
      const auto disp = ingest::read_displacements(fit_disp);
      const auto cb = actionspace::fit(disp, fit);
      actionspace::save(cb, fit_out);
      std::cout << "k=" << fit.k << " displacements=" << disp.size() << " hash=" << actionspace::content_hash(cb) << '\n';
    } else if (*label) {
      const auto disp = ingest::read_displacements(label_disp);
      const auto cb = actionspace::load(label_cb);
      const auto labels = pipeline::label_displacements(disp, cb);
      actionspace::write_labels(label_out, labels);
      std::cout << "labels=" << labels.size() << '\n';
    } else if (*train_act) {
      train_command(act_config, "act", [](RunConfig& c, std::span<const EpisodeTensor> train,
                                                              const auto& freqs, std::uint64_t hash) {
        c.acting.feature_dim = c.feature_dim;
        acting::ActingModel model(c.acting, c.acting_train.seed);
        const auto result = acting::train(model, train, freqs, c.acting_train);
        return std::pair{model.to_checkpoint(hash), result.loss_curve};
      });
    } else if (*train_plan) {
      train_command(plan_config, "plan", [](RunConfig& c, std::span<const EpisodeTensor> train,
                                                                    const auto& freqs, std::uint64_t hash) {
        c.planning.feature_dim = c.feature_dim;
        planning::PlanningModel model(c.planning, c.planning_train.seed);
        const auto result = planning::train(model, train, freqs, c.planning_train);
        return std::pair{model.to_checkpoint(hash), result.loss_curve};
      });
    } else if (*eval_act || *eval_plan) {
      const auto ckpt = net::load_checkpoint(eval_ckpt);
      const auto d = load_data(eval_data, eval_opts, ckpt);
      const auto* cb = d.codebook ? &*d.codebook : nullptr;
      const auto* rot = d.rotations ? &*d.rotations : nullptr;
      std::vector<eval::NamedReport> reports;
      std::vector<std::pair<std::string, std::string>> extra;
      if (*eval_act) {
        const auto model = acting::ActingModel::from_checkpoint(ckpt);
        reports = pipeline::evaluate_acting(model, d.split.train, d.split.test, cb, rot);
      } else {
        const auto model = planning::PlanningModel::from_checkpoint(ckpt);
        reports = pipeline::evaluate_planning(model, d.split.train, d.split.test, cb, rot);
        const auto freqs = cb ? codebook_frequencies(*cb) : count_labels(d.split.train, model.config().classes);
        extra.emplace_back("prior.all_joint_accuracy", fmt(eval::prior_all_joint_accuracy(freqs)));
      }
      eval::write_reports(eval_opts.out, reports, extra);
      print_reports(reports);
      for (const auto& [k, v] : extra) std::cout << k << '=' << v << '\n';
    } else if (*probe) {
      const auto ckpt = net::load_checkpoint(eval_ckpt);
      const auto d = load_data(eval_data, eval_opts, ckpt);
      const auto model = acting::ActingModel::from_checkpoint(ckpt);
      const auto r = eval::linear_probe(model, d.split.train, d.split.test, probe_random_seed, probe_cfg);
      std::string kv = "probe.trained=" + fmt(r.trained) + "\nprobe.random=" + fmt(r.random) +
                       "\nprobe.degenerate=" + (r.degenerate ? "1" : "0") + "\nprobe.classes=" +
                       std::to_string(r.classes) + "\nprobe.train_windows=" + std::to_string(r.train_windows) +
                       "\nprobe.test_windows=" + std::to_string(r.test_windows) + "\n";
      textio::write_file(fs::path(eval_opts.out) / "probe.kv", kv);
      std::cout << kv;
    } else if (*gradcheck) {
      bool ok = true;
      for (const auto& [name, report] : pipeline::model_gradient_checks(gc)) {
        for (const auto& e : report.entries) {
          std::cout << name << ' ' << e.param << " checked=" << e.checked << " max_rel=" << fmt(e.max_rel_error)
                    << " max_abs=" << fmt(e.max_abs_error) << '\n';
        }
        const bool pass = report.passed(gc_tol);
        std::cout << name << (pass ? " PASS" : " FAIL") << " max_rel=" << fmt(report.max_rel_error) << '\n';
        ok = ok && pass;
      }
      if (!ok) return report_error("numeric.gradcheck", "relative error above " + fmt(gc_tol), 4);
    }
  } catch (const Error& e) {
    return report_error(e.error_class(), e.what(), e.exit_code());
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
