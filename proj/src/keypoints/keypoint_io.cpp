#include "a2p/binary_io.hpp"
#include "a2p/error.hpp"
#include "a2p/keypoints.hpp"

#include <json.hpp>

namespace a2p::keypoints {

using ordered_json = nlohmann::ordered_json;

namespace {

KeypointFrame parse_frame(const ordered_json& jf, std::int64_t fallback_index) {
  KeypointFrame f;
  f.frame_index = jf.value("index", fallback_index);
  f.person_id = jf.value("person_id", std::string{});
  const auto& pts = jf.at("points");
  require(pts.is_array() && pts.size() == kNumPoints, ErrorCode::InvalidInput,
          "frame " + std::to_string(f.frame_index) + " must list exactly 50 points");
  bool any_source = false;
  std::vector<std::string> source(kNumPoints);
  for (int p = 0; p < kNumPoints; ++p) {
    const auto& jp = pts[static_cast<std::size_t>(p)];
    if (jp.is_null()) {
      continue;
    }
    require(jp.is_array() && jp.size() >= 2, ErrorCode::InvalidInput, "point must be [x, y, ...]");
    f.points[p] = Point2(jp[0].get<double>(), jp[1].get<double>());
    f.confidence[p] = jp.size() > 2 ? jp[2].get<double>() : 1.0;
    if (jp.size() > 3) {
      f.visible[p] = jp[3].is_boolean() ? jp[3].get<bool>() : jp[3].get<double>() != 0.0;
    } else {
      f.visible[p] = true;
    }
    if (jp.size() > 4 && jp[4].is_string()) {
      source[p] = jp[4].get<std::string>();
      any_source = true;
    }
  }
  if (any_source) {
    f.source = std::move(source);
  }
  return f;
}

}  // namespace

KeypointClip parse_keypoint_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptFile, std::string("keypoint JSON: ") + e.what());
  }
  try {
    KeypointClip clip;
    clip.fps = doc.value("fps", 24.0);
    clip.width = doc.value("width", 0);
    clip.height = doc.value("height", 0);
    const auto& frames = doc.at("frames");
    clip.frames.reserve(frames.size());
    std::int64_t i = 0;
    for (const auto& jf : frames) {
      clip.frames.push_back(parse_frame(jf, i++));
    }
    return clip;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("keypoint JSON: ") + e.what());
  }
}

KeypointClip read_keypoint_json(const std::filesystem::path& path) {
  return parse_keypoint_json(read_file_bytes(path));
}

std::string to_keypoint_json(const KeypointClip& clip) {
  ordered_json doc;
  doc["fps"] = clip.fps;
  doc["width"] = clip.width;
  doc["height"] = clip.height;
  auto frames = ordered_json::array();
  for (const auto& f : clip.frames) {
    ordered_json jf;
    jf["index"] = f.frame_index;
    jf["person_id"] = f.person_id;
    auto pts = ordered_json::array();
    for (int p = 0; p < kNumPoints; ++p) {
      auto jp = ordered_json::array({f.points[p].x(), f.points[p].y(), f.confidence[p], f.visible[p]});
      if (!f.source.empty() && !f.source[p].empty()) {
        jp.push_back(f.source[p]);
      }
      pts.push_back(std::move(jp));
    }
    jf["points"] = std::move(pts);
    frames.push_back(std::move(jf));
  }
  doc["frames"] = std::move(frames);
  return doc.dump();
}

void write_keypoint_json(const std::filesystem::path& path, const KeypointClip& clip) {
  write_file_bytes(path, to_keypoint_json(clip));
}

}  // namespace a2p::keypoints
