#include "kennel/runconfig.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <functional>
#include <sstream>
#include <vector>

#include "kennel/error.hpp"
#include "kennel/textio.hpp"

namespace kennel {

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

std::string context_of(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

/// Parse failures become config errors that name the offending key.
template <typename Fn>
void parse_as_config(const std::string& ctx, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    fail(errc::kConfig, ctx + ": " + e.what());
  }
}

class Schema {
 public:
  explicit Schema(RunConfig& c) {
    path("paths", "data_dir", c.data_dir);
    path("paths", "out_dir", c.out_dir);
    path("paths", "labels", c.labels);
    path("paths", "codebook", c.codebook);

    integer("data", "feature_dim", c.feature_dim);
    integer("data", "classes", c.classes);
    integer("data", "split_every", c.split_every);
    integer("data", "split_offset", c.split_offset);

    integer("act", "embed_dim", c.acting.embed_dim);
    integer("act", "hidden", c.acting.hidden);
    integer("act", "decoder_input", c.acting.decoder_input);
    integer("act", "n_obs", c.acting.n_obs);
    integer("act", "n_pred", c.acting.n_pred);
    train("act", c.acting_train);

    integer("plan", "hidden", c.planning.hidden);
    integer("plan", "horizon", c.planning.horizon);
    train("plan", c.planning_train);

    auto& w = c.world;
    fields_.push_back({"sim", "policy", [&w] { return std::string(sim::to_string(w.policy)); },
                       [&w](const std::string& v) { w.policy = sim::parse_policy(v); }});
    real("sim", "epsilon", w.epsilon);
    integer("sim", "n_primitives", w.n_primitives);
    integer("sim", "pose_count", w.pose_count);
    fields_.push_back({"sim", "primitive_steps",
                       [&w] {
                         std::string s;
                         for (int v : w.primitive_steps) s += (s.empty() ? "" : " ") + std::to_string(v);
                         return s;
                       },
                       [&w](const std::string& v) {
                         w.primitive_steps.clear();
                         for (auto tok : textio::split_ws(v)) {
                           w.primitive_steps.push_back(static_cast<int>(textio::parse_int(tok, "primitive_steps")));
                         }
                       }});
    integer("sim", "scene_count", w.scene_count);
    integer("sim", "context_dim", w.context_dim);
    real("sim", "context_scale", w.context_scale);
    integer("sim", "feature_dim", w.feature_dim);
    integer("sim", "episodes", w.episodes);
    integer("sim", "episode_length", w.episode_length);
    real("sim", "frame_rate_hz", w.frame_rate_hz);
    real("sim", "imu_rate_hz", w.imu_rate_hz);
    real("sim", "feature_noise", w.feature_noise);
    real("sim", "imu_noise_rad", w.imu_noise_rad);
    unsigned_int("sim", "seed", w.seed);
  }

  const std::vector<Field>& fields() const { return fields_; }

 private:
  void path(const char* s, const char* k, std::filesystem::path& p) {
    fields_.push_back({s, k, [&p] { return p.string(); }, [&p](const std::string& v) { p = v; }});
  }
  template <typename Int>
  void integer(const char* s, const char* k, Int& x) {
    fields_.push_back({s, k, [&x] { return std::to_string(x); },
                       [&x, s, k](const std::string& v) { x = static_cast<Int>(textio::parse_int(v, context_of(s, k))); }});
  }
  void unsigned_int(const char* s, const char* k, std::uint64_t& x) {
    fields_.push_back({s, k, [&x] { return std::to_string(x); },
                       [&x, s, k](const std::string& v) { x = textio::parse_uint(v, context_of(s, k)); }});
  }
  void real(const char* s, const char* k, double& x) {
    fields_.push_back({s, k, [&x] { return textio::format_double(x); },
                       [&x, s, k](const std::string& v) { x = textio::parse_double(v, context_of(s, k)); }});
  }
  void train(const char* s, TrainConfig& t) {
    real(s, "lr", t.lr);
    real(s, "momentum", t.momentum);
    integer(s, "epochs", t.epochs);
    integer(s, "batch_size", t.batch_size);
    real(s, "clip_norm", t.clip_norm);
    unsigned_int(s, "seed", t.seed);
  }

  std::vector<Field> fields_;
};

std::filesystem::path anchored(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace

void RunConfig::validate() const {
  auto bad = [](const std::string& m) { fail(errc::kConfig, m); };
  if (feature_dim < 0) bad("[data] feature_dim must be >= 0 (0 infers it)");
  if (classes < 2) bad("[data] classes must be at least 2");
  if (split_every < 2 || split_offset < 0 || split_offset >= split_every) {
    bad("[data] split_every must be >= 2 and split_offset in [0, split_every)");
  }
  if (acting.embed_dim < 1 || acting.hidden < 1 || acting.decoder_input < 1 || acting.n_obs < 2 || acting.n_pred < 1) {
    bad("[act] dims must be positive and n_obs >= 2");
  }
  if (planning.hidden < 1 || planning.horizon < 1) bad("[plan] hidden and horizon must be positive");
  for (const auto* t : {&acting_train, &planning_train}) {
    if (!(t->lr > 0.0) || t->momentum < 0.0 || t->momentum >= 1.0 || t->epochs < 1 || t->batch_size < 1) {
      bad("training needs lr > 0, momentum in [0, 1), epochs >= 1 and batch_size >= 1");
    }
  }
  sim::validate(world);
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(errc::kConfig, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  const Schema schema(c);
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) fail(errc::kConfig, "key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const auto it = std::find_if(schema.fields().begin(), schema.fields().end(),
                                   [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == schema.fields().end()) fail(errc::kConfig, "unknown setting " + context_of(section, key));
      parse_as_config(context_of(section, key), [&] { it->set(value.get_value<std::string>()); });
    }
  }
  c.data_dir = anchored(c.data_dir, base);
  c.out_dir = anchored(c.out_dir, base);
  c.labels = anchored(c.labels, c.data_dir);
  c.codebook = anchored(c.codebook, c.data_dir);
  c.acting.classes = c.planning.classes = c.classes;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(textio::read_file(path), path.parent_path());
}

std::string to_ini(const RunConfig& config) {
  RunConfig copy = config;
  const Schema schema(copy);
  std::string out, section;
  for (const auto& f : schema.fields()) {
    if (f.section != section) {
      out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get() + "\n";
  }
  return out;
}

}  // namespace kennel
