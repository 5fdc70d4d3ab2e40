#include "a2p/error.hpp"
#include "a2p/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace a2p::retarget {

using namespace keypoints;

const std::vector<SkeletonEdge>& skeleton_edges() {
  static const std::vector<SkeletonEdge> edges = [] {
    std::vector<SkeletonEdge> e = {
        {kRightShoulder, kRightElbow}, {kRightElbow, kRightWrist}, {kLeftShoulder, kLeftElbow},
        {kLeftElbow, kLeftWrist},      {kRightShoulder, kLeftShoulder}, {kRightShoulder, kRightHip},
        {kLeftShoulder, kLeftHip},     {kRightHip, kLeftHip},
        {kLeftWrist, kLeftHandOffset + kHandWrist}, {kRightWrist, kRightHandOffset + kHandWrist},
    };
    for (int off : {kLeftHandOffset, kRightHandOffset}) {
      for (int finger = 0; finger < 5; ++finger) {
        int prev = off + kHandWrist;
        for (int j = 1; j <= 4; ++j) {
          const int cur = off + 4 * finger + j;
          e.push_back({prev, cur});
          prev = cur;
        }
      }
    }
    return e;
  }();
  return edges;
}

Canvas canvas_for(const KeypointClip& clip, const KeypointClip* truth) {
  if (clip.width > 0 && clip.height > 0) {
    return {clip.width, clip.height};
  }
  if (truth != nullptr && truth->width > 0 && truth->height > 0) {
    return {truth->width, truth->height};
  }
  double max_x = 0.0;
  double max_y = 0.0;
  auto scan = [&](const KeypointClip& c) {
    for (const auto& f : c.frames) {
      for (int p = 0; p < kNumPoints; ++p) {
        if (f.visible[p]) {
          max_x = std::max(max_x, f.points[p].x());
          max_y = std::max(max_y, f.points[p].y());
        }
      }
    }
  };
  scan(clip);
  if (truth != nullptr) {
    scan(*truth);
  }
  return {static_cast<int>(std::ceil(max_x)) + 20, static_cast<int>(std::ceil(max_y)) + 20};
}

namespace {

void append(std::string& out, const char* fmt, double a, double b, double c, double d) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  out += buf;
}

void draw(std::string& out, const KeypointFrame& f, const char* cls) {
  out += "<g class=\"";
  out += cls;
  out += "\">\n";
  for (const auto& e : skeleton_edges()) {
    if (f.visible[e.a] && f.visible[e.b]) {
      append(out, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n", f.points[e.a].x(),
             f.points[e.a].y(), f.points[e.b].x(), f.points[e.b].y());
    }
  }
  for (int p = 0; p < kNumPoints; ++p) {
    if (f.visible[p]) {
      append(out, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.1f\"/>\n", f.points[p].x(), f.points[p].y(), 2.5, 0.0);
    }
  }
  out += "</g>\n";
}

}  // namespace

std::string render_svg(const KeypointFrame& predicted, const KeypointFrame* truth, Canvas canvas) {
  require(canvas.width > 0 && canvas.height > 0, ErrorCode::InvalidInput, "canvas size must be positive");
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(canvas.width) + "\" height=\"" +
         std::to_string(canvas.height) + "\" viewBox=\"0 0 " + std::to_string(canvas.width) + " " +
         std::to_string(canvas.height) + "\">\n";
  out += "<style>.truth line{stroke:#d00;stroke-width:1}.truth circle{fill:#d00}"
         ".pred line{stroke:#0a0;stroke-width:1}.pred circle{fill:#0a0}</style>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (truth != nullptr) {
    draw(out, *truth, "truth");
  }
  draw(out, predicted, "pred");
  out += "</svg>\n";
  return out;
}

std::size_t render_frames(const std::filesystem::path& directory, const std::vector<KeypointFrame>& predicted,
                          const std::vector<KeypointFrame>* truth, Canvas canvas) {
  require(truth == nullptr || truth->size() == predicted.size(), ErrorCode::InvalidInput,
          "prediction has " + std::to_string(predicted.size()) + " frames, ground truth has " +
              std::to_string(truth ? truth->size() : 0));
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + directory.string() + ": " + ec.message());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.svg", i);
    const auto path = directory / name;
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
    out << render_svg(predicted[i], truth ? &(*truth)[i] : nullptr, canvas);
    require(static_cast<bool>(out), ErrorCode::IoError, "failed writing " + path.string());
  }
  return predicted.size();
}

}  // namespace a2p::retarget
