#include "a2p/binary_io.hpp"
#include "a2p/error.hpp"
#include "a2p/pipeline.hpp"

#include <json.hpp>

#include <fstream>

namespace a2p::pipeline {

namespace {

using json = nlohmann::ordered_json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::IoError, "failed writing " + path.string());
}

void write_targets(const fs::path& path, const ClipData& clip, int factor) {
  BinaryWriter body;
  body.u32(static_cast<std::uint32_t>(factor));
  body.matrix(clip.coefficients);
  for (auto v : clip.tick_valid) {
    body.u8(v);
  }
  BinaryWriter w;
  w.magic("A2PT");
  w.u32(kTargetFileVersion);
  w.u32(crc32_of(body.bytes()));
  write_file_bytes(path, w.bytes() + body.bytes());
}

void read_targets(const fs::path& path, ClipData& clip, int factor) {
  const std::string bytes = read_file_bytes(path);
  BinaryReader header(bytes);
  header.expect_magic("A2PT");
  require(header.u32() == kTargetFileVersion, ErrorCode::CorruptFile, path.string() + ": unsupported version");
  const auto crc = header.u32();
  const std::string_view body = std::string_view(bytes).substr(header.position());
  require(crc32_of(body) == crc, ErrorCode::CorruptFile, path.string() + ": checksum mismatch");
  BinaryReader r(body);
  require(static_cast<int>(r.u32()) == factor, ErrorCode::CorruptFile,
          path.string() + ": upsample factor does not match the manifest");
  clip.coefficients = r.matrix();
  clip.tick_valid.resize(static_cast<std::size_t>(clip.coefficients.cols()));
  for (auto& v : clip.tick_valid) {
    v = r.u8();
  }
  require(clip.coefficients.cols() == static_cast<Eigen::Index>(clip.frame_count) * factor,
          ErrorCode::CorruptFile, path.string() + ": tick count does not match the manifest");
}

}  // namespace

std::string manifest_json(const PreparedDataset& ds) {
  json j;
  j["version"] = 1;
  j["profile"] = ds.config.profile;
  j["seed"] = ds.config.seed;
  j["video_fps"] = ds.config.features.video_fps;
  j["upsample_factor"] = ds.config.upsample_factor;
  j["tick_rate"] = ds.config.tick_rate();

  std::size_t frames = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t counts[4] = {0, 0, 0, 0};
  std::map<std::string, std::size_t> reasons;
  json clips = json::array();
  for (const auto& c : ds.clips) {
    json cj;
    cj["id"] = c.id;
    cj["audio_file"] = c.audio_file;
    cj["keypoint_file"] = c.keypoint_file;
    cj["fps"] = c.fps;
    cj["width"] = c.width;
    cj["height"] = c.height;
    cj["frame_count"] = c.frame_count;
    cj["kept"] = c.kept_count;
    cj["dropped"] = c.dropped_count;
    cj["drop_reasons"] = c.drop_reasons;
    cj["split"] = c.test ? "test" : "train_valid";
    json chunks = json::array();
    for (const auto& k : c.chunks) {
      chunks.push_back(json{{"start", k.start_frame}, {"end", k.end_frame}, {"split", to_string(k.split)}});
      counts[static_cast<int>(k.split)] += 1;
    }
    cj["chunks"] = chunks;
    clips.push_back(cj);
    frames += c.frame_count;
    kept += c.kept_count;
    dropped += c.dropped_count;
    for (const auto& [r, n] : c.drop_reasons) {
      reasons[r] += n;
    }
  }
  j["clips"] = clips;

  json corpus;
  corpus["clips"] = ds.clips.size();
  corpus["frames"] = frames;
  corpus["kept"] = kept;
  corpus["dropped"] = dropped;
  corpus["drop_fraction"] = frames > 0 ? static_cast<double>(dropped) / static_cast<double>(frames) : 0.0;
  corpus["drop_reasons"] = reasons;
  corpus["train_chunks"] = counts[static_cast<int>(Split::Train)];
  corpus["valid_chunks"] = counts[static_cast<int>(Split::Valid)];
  corpus["unused_chunks"] = counts[static_cast<int>(Split::Unused)];
  corpus["test_clips"] = counts[static_cast<int>(Split::Test)];
  corpus["pca_modes"] = ds.motion.pca.modes();
  corpus["pca_variance_fraction"] = ds.motion.pca.variance_fraction_captured;
  corpus["skipped"] = ds.skipped;
  j["corpus"] = corpus;
  return j.dump(2) + "\n";
}

void write_prepared(const fs::path& dir, const PreparedDataset& ds) {
  std::error_code ec;
  for (const char* sub : {"features", "targets", "aligned"}) {
    fs::create_directories(dir / sub, ec);
    require(!ec, ErrorCode::IoError, "cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  for (const auto& c : ds.clips) {
    audio::write_feature_file(dir / "features" / (c.id + ".a2pf"), c.features);
    write_targets(dir / "targets" / (c.id + ".a2pt"), c, ds.config.upsample_factor);
    keypoints::KeypointClip clip;
    clip.fps = c.fps;
    clip.width = c.width;
    clip.height = c.height;
    clip.frames = c.aligned;
    keypoints::write_keypoint_json(dir / "aligned" / (c.id + ".json"), clip);
  }
  keypoints::write_motion_model(dir / "motion.a2pm", ds.motion);
  write_text(dir / "motion.json", keypoints::motion_model_json(ds.motion));
  write_text(dir / "manifest.json", manifest_json(ds));
  write_config(dir / "config.ini", ds.config);
}

PreparedDataset load_prepared(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  require(fs::exists(manifest_path), ErrorCode::IoError,
          "no prepared dataset in " + dir.string() + " (run prepare first)");
  PreparedDataset ds;
  ds.config = load_config(dir / "config.ini");
  json m;
  try {
    m = json::parse(read_file_bytes(manifest_path));
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptFile, manifest_path.string() + ": " + e.what());
  }
  try {
    require(m.at("upsample_factor").get<int>() == ds.config.upsample_factor, ErrorCode::CorruptFile,
            "manifest and config disagree on the upsample factor");
    for (const auto& cj : m.at("clips")) {
      ClipData c;
      c.id = cj.at("id").get<std::string>();
      c.audio_file = cj.at("audio_file").get<std::string>();
      c.keypoint_file = cj.at("keypoint_file").get<std::string>();
      c.fps = cj.at("fps").get<double>();
      c.width = cj.at("width").get<int>();
      c.height = cj.at("height").get<int>();
      c.frame_count = cj.at("frame_count").get<std::size_t>();
      c.kept_count = cj.at("kept").get<std::size_t>();
      c.dropped_count = cj.at("dropped").get<std::size_t>();
      c.drop_reasons = cj.at("drop_reasons").get<std::map<std::string, std::size_t>>();
      c.test = cj.at("split").get<std::string>() == "test";
      for (const auto& k : cj.at("chunks")) {
        c.chunks.push_back({k.at("start").get<std::size_t>(), k.at("end").get<std::size_t>(),
                            parse_split(k.at("split").get<std::string>())});
      }
      ds.clips.push_back(std::move(c));
    }
    ds.skipped = m.at("corpus").at("skipped").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptFile, manifest_path.string() + ": " + e.what());
  }
  ds.motion = keypoints::read_motion_model(dir / "motion.a2pm");
  for (auto& c : ds.clips) {
    c.features = audio::read_feature_file(dir / "features" / (c.id + ".a2pf"));
    require(c.features.frames.size() == c.frame_count, ErrorCode::CorruptFile,
            c.id + ": feature frame count does not match the manifest");
    read_targets(dir / "targets" / (c.id + ".a2pt"), c, ds.config.upsample_factor);
    c.aligned = keypoints::read_keypoint_json(dir / "aligned" / (c.id + ".json")).frames;
  }
  return ds;
}

}  // namespace a2p::pipeline
