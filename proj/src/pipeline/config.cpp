#include "a2p/error.hpp"
#include "a2p/pipeline.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace a2p::pipeline {

namespace pt = boost::property_tree;

void SplitConfig::validate() const {
  require(train > 0.0 && valid >= 0.0 && test >= 0.0, ErrorCode::InvalidInput,
          "split fractions must be non-negative with a positive train fraction");
  require(std::abs(train + valid + test - 1.0) <= 1e-9, ErrorCode::InvalidInput,
          "split fractions must sum to 1");
  require(chunk_seconds > 0.0, ErrorCode::InvalidInput, "chunk length must be positive");
}

void PipelineConfig::validate() const {
  features.validate();
  split.validate();
  require(upsample_factor >= 1, ErrorCode::InvalidInput, "upsample factor must be >= 1");
  require(data_fraction > 0.0 && data_fraction <= 1.0, ErrorCode::InvalidInput,
          "data fraction must be in (0, 1]");
  require(filter.jump_fraction > 0.0, ErrorCode::InvalidInput, "jump fraction must be positive");
  require(filter.frame_width >= 0.0, ErrorCode::InvalidInput, "frame width must be >= 0");
  require(!pca.fixed_k || *pca.fixed_k >= 1, ErrorCode::InvalidInput, "fixed PCA k must be >= 1");
  require(pca.target_variance > 0.0 && pca.target_variance <= 1.0, ErrorCode::InvalidInput,
          "PCA target variance must be in (0, 1]");
  require(!time_delay_ms || *time_delay_ms >= 0.0, ErrorCode::InvalidInput, "time delay must be >= 0");
  resolved_train().validate();
}

sequence::TrainConfig PipelineConfig::resolved_train() const {
  sequence::TrainConfig t = train;
  t.seed = seed;
  if (time_delay_ms) {
    t.time_delay = static_cast<int>(std::lround(*time_delay_ms * tick_rate() / 1000.0));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g ms", *time_delay_ms);
    t.delay_source = buf;
  } else {
    t.delay_source = "steps";
  }
  return t;
}

const std::vector<std::string>& profile_names() {
  static const std::vector<std::string> names = {"default", "violin-final", "piano-final"};
  return names;
}

void apply_profile(PipelineConfig& c, const std::string& name) {
  if (name == "default") {
    c.profile = name;
    return;
  }
  if (name != "violin-final" && name != "piano-final") {
    fail(ErrorCode::InvalidInput, "unknown profile '" + name + "' (expected default, violin-final or piano-final)");
  }
  c.profile = name;
  c.pca.fixed_k = 15;
  c.train.hidden_dim = 200;
  c.train.bptt_steps = 60;
  c.train.batch_size = 100;
  c.time_delay_ms = 24.0;
  c.upsample_factor = 4;
  if (name == "violin-final") {
    c.train.learning_rate = 2e-3;
    c.train.dropout_rate = 0.15;
    c.retarget.instrument = retarget::Instrument::Violin;
  } else {
    c.train.learning_rate = 1e-3;
    c.train.dropout_rate = 0.1;
    c.retarget.instrument = retarget::Instrument::Piano;
  }
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec3(const retarget::Vec3& v) { return num(v.x()) + "," + num(v.y()) + "," + num(v.z()); }

std::vector<double> parse_list(const std::string& key, const std::string& text, std::size_t count) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidInput, key + ": '" + text + "' is not a list of numbers");
    }
  }
  require(out.size() == count, ErrorCode::InvalidInput,
          key + ": expected " + std::to_string(count) + " comma-separated numbers");
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    auto found = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    std::optional<std::string> v;
    if (found) {
      v = *found;
      // Trailing comments are not part of the value.
      auto cut = v->find_first_of(";#");
      if (cut != std::string::npos) {
        v->erase(cut);
      }
      while (!v->empty() && std::isspace(static_cast<unsigned char>(v->back()))) {
        v->pop_back();
      }
    }
    return v;
  }

  void number(const std::string& key, double& out) {
    if (auto v = raw(key); v && !v->empty()) {
      out = parse_double(key, *v);
    }
  }
  void integer(const std::string& key, int& out) {
    if (auto v = raw(key); v && !v->empty()) {
      out = static_cast<int>(parse_int(key, *v));
    }
  }
  void u64(const std::string& key, std::uint64_t& out) {
    if (auto v = raw(key); v && !v->empty()) {
      const long long x = parse_int(key, *v);
      require(x >= 0, ErrorCode::InvalidInput, key + " must be >= 0");
      out = static_cast<std::uint64_t>(x);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (auto v = raw(key); v && !v->empty()) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        fail(ErrorCode::InvalidInput, key + ": expected true or false, got '" + *v + "'");
      }
    }
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = raw(key)) {
      out = *v;
    }
  }
  void path(const std::string& key, fs::path& out, const fs::path& base) {
    if (auto v = raw(key); v && !v->empty()) {
      fs::path p(*v);
      out = (p.is_relative() && !base.empty()) ? base / p : p;
    }
  }
  void optional_number(const std::string& key, std::optional<double>& out) {
    if (auto v = raw(key)) {
      out = v->empty() ? std::nullopt : std::optional<double>(parse_double(key, *v));
    }
  }
  void optional_int(const std::string& key, std::optional<int>& out) {
    if (auto v = raw(key)) {
      out = v->empty() ? std::nullopt : std::optional<int>(static_cast<int>(parse_int(key, *v)));
    }
  }
  void vector3(const std::string& key, retarget::Vec3& out) {
    if (auto v = raw(key); v && !v->empty()) {
      const auto xs = parse_list(key, *v, 3);
      out = {xs[0], xs[1], xs[2]};
    }
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        fail(ErrorCode::InvalidInput, "config key '" + section + "' must be inside a section");
      }
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        require(seen_.count(full) != 0, ErrorCode::InvalidInput, "unknown config key '" + full + "'");
      }
    }
  }

 private:
  static double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size()) {
        return x;
      }
    } catch (const std::exception&) {
    }
    fail(ErrorCode::InvalidInput, key + ": '" + v + "' is not a number");
  }
  static long long parse_int(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used == v.size()) {
        return x;
      }
    } catch (const std::exception&) {
    }
    fail(ErrorCode::InvalidInput, key + ": '" + v + "' is not an integer");
  }

  const pt::ptree& tree_;
  std::set<std::string> seen_;
};

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::optional<std::string>& profile_override,
                            const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::InvalidInput, std::string("config: ") + e.what());
  }
  Reader r(tree);

  PipelineConfig c;
  std::string profile = "default";
  r.text("run.profile", profile);
  if (profile_override) {
    profile = *profile_override;
  }
  apply_profile(c, profile.empty() ? "default" : profile);
  r.u64("run.seed", c.seed);

  r.path("paths.audio_dir", c.paths.audio_dir, base_dir);
  r.path("paths.keypoints_dir", c.paths.keypoints_dir, base_dir);
  r.path("paths.output_dir", c.paths.output_dir, base_dir);

  const double fps_before = c.features.video_fps;
  r.number("features.video_fps", c.features.video_fps);
  if (c.features.video_fps != fps_before) {
    c.features.window_ms = 1000.0 / c.features.video_fps;
  }
  r.number("features.window_ms", c.features.window_ms);
  r.integer("features.num_mel_filters", c.features.num_mel_filters);
  r.integer("features.num_ceps", c.features.num_ceps);
  r.number("features.log_floor", c.features.log_floor);

  r.boolean("filter.enabled", c.filter.enabled);
  r.number("filter.jump_fraction", c.filter.jump_fraction);
  r.number("filter.frame_width", c.filter.frame_width);
  if (auto box = r.raw("filter.reference_box")) {
    if (box->empty()) {
      c.filter.reference_box.reset();
    } else {
      const auto xs = parse_list("filter.reference_box", *box, 4);
      c.filter.reference_box = keypoints::Rect{xs[0], xs[1], xs[2], xs[3]};
    }
  }
  r.text("filter.person_id", c.filter.person_id);
  r.boolean("filter.interpolate_missing", c.filter.interpolate_missing);

  r.number("pca.target_variance", c.pca.target_variance);
  r.optional_int("pca.fixed_k", c.pca.fixed_k);

  auto& t = c.train;
  r.integer("train.hidden_dim", t.hidden_dim);
  r.integer("train.bptt_steps", t.bptt_steps);
  r.integer("train.batch_size", t.batch_size);
  r.number("train.learning_rate", t.learning_rate);
  r.number("train.dropout_rate", t.dropout_rate);
  r.integer("train.epochs", t.epochs);
  r.number("train.beta1", t.beta1);
  r.number("train.beta2", t.beta2);
  r.number("train.epsilon", t.epsilon);
  r.integer("train.time_delay", t.time_delay);
  r.optional_number("train.time_delay_ms", c.time_delay_ms);
  r.number("train.clip_norm", t.clip_norm);
  r.integer("train.upsample_factor", c.upsample_factor);
  r.number("train.data_fraction", c.data_fraction);

  r.number("split.train", c.split.train);
  r.number("split.valid", c.split.valid);
  r.number("split.test", c.split.test);
  r.number("split.chunk_seconds", c.split.chunk_seconds);

  auto& g = c.retarget;
  if (auto inst = r.raw("retarget.instrument"); inst && !inst->empty()) {
    g.instrument = retarget::parse_instrument(*inst);
  }
  r.number("retarget.rest_spine_length", g.rest_spine_length);
  r.number("retarget.depth_gain", g.depth_gain);
  r.number("retarget.piano_root_rotation", g.piano_root_rotation);
  r.number("retarget.head_offset", g.head_offset);
  r.vector3("retarget.violin_offset", g.violin_offset);
  r.vector3("retarget.bow_offset", g.bow_offset);
  r.vector3("retarget.bridge_offset", g.bridge_offset);
  r.vector3("retarget.up_hint", g.up_hint);

  r.reject_unknown();
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path, const std::optional<std::string>& profile_override) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), profile_override, path.parent_path());
}

std::string to_ini(const PipelineConfig& c) {
  std::ostringstream o;
  const auto& t = c.train;
  const auto& g = c.retarget;
  o << "[run]\n"
    << "profile = " << c.profile << "\n"
    << "seed = " << c.seed << "\n\n"
    << "[paths]\n"
    << "audio_dir = " << c.paths.audio_dir.string() << "\n"
    << "keypoints_dir = " << c.paths.keypoints_dir.string() << "\n"
    << "output_dir = " << c.paths.output_dir.string() << "\n\n"
    << "[features]\n"
    << "video_fps = " << num(c.features.video_fps) << "\n"
    << "window_ms = " << num(c.features.window_ms) << "\n"
    << "num_mel_filters = " << c.features.num_mel_filters << "\n"
    << "num_ceps = " << c.features.num_ceps << "\n"
    << "log_floor = " << num(c.features.log_floor) << "\n\n"
    << "[filter]\n"
    << "enabled = " << (c.filter.enabled ? "true" : "false") << "\n"
    << "jump_fraction = " << num(c.filter.jump_fraction) << "\n"
    << "frame_width = " << num(c.filter.frame_width) << "\n"
    << "reference_box = ";
  if (c.filter.reference_box) {
    const auto& b = *c.filter.reference_box;
    o << num(b.x0) << "," << num(b.y0) << "," << num(b.x1) << "," << num(b.y1);
  }
  o << "\n"
    << "person_id = " << c.filter.person_id << "\n"
    << "interpolate_missing = " << (c.filter.interpolate_missing ? "true" : "false") << "\n\n"
    << "[pca]\n"
    << "target_variance = " << num(c.pca.target_variance) << "\n"
    << "fixed_k = " << (c.pca.fixed_k ? std::to_string(*c.pca.fixed_k) : "") << "\n\n"
    << "[train]\n"
    << "hidden_dim = " << t.hidden_dim << "\n"
    << "bptt_steps = " << t.bptt_steps << "\n"
    << "batch_size = " << t.batch_size << "\n"
    << "learning_rate = " << num(t.learning_rate) << "\n"
    << "dropout_rate = " << num(t.dropout_rate) << "\n"
    << "epochs = " << t.epochs << "\n"
    << "beta1 = " << num(t.beta1) << "\n"
    << "beta2 = " << num(t.beta2) << "\n"
    << "epsilon = " << num(t.epsilon) << "\n"
    << "time_delay = " << t.time_delay << "\n"
    << "time_delay_ms = " << (c.time_delay_ms ? num(*c.time_delay_ms) : "") << "\n"
    << "clip_norm = " << num(t.clip_norm) << "\n"
    << "upsample_factor = " << c.upsample_factor << "\n"
    << "data_fraction = " << num(c.data_fraction) << "\n\n"
    << "[split]\n"
    << "train = " << num(c.split.train) << "\n"
    << "valid = " << num(c.split.valid) << "\n"
    << "test = " << num(c.split.test) << "\n"
    << "chunk_seconds = " << num(c.split.chunk_seconds) << "\n\n"
    << "[retarget]\n"
    << "instrument = " << retarget::to_string(g.instrument) << "\n"
    << "rest_spine_length = " << num(g.rest_spine_length) << "\n"
    << "depth_gain = " << num(g.depth_gain) << "\n"
    << "piano_root_rotation = " << num(g.piano_root_rotation) << "\n"
    << "head_offset = " << num(g.head_offset) << "\n"
    << "violin_offset = " << vec3(g.violin_offset) << "\n"
    << "bow_offset = " << vec3(g.bow_offset) << "\n"
    << "bridge_offset = " << vec3(g.bridge_offset) << "\n"
    << "up_hint = " << vec3(g.up_hint) << "\n";
  return o.str();
}

void write_config(const fs::path& path, const PipelineConfig& config) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  out << to_ini(config);
  require(static_cast<bool>(out), ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace a2p::pipeline
