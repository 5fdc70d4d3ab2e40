#include "a2p/error.hpp"
#include "a2p/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace a2p::retarget {

using namespace keypoints;

const char* to_string(Instrument instrument) {
  switch (instrument) {
    case Instrument::None: return "none";
    case Instrument::Piano: return "piano";
    case Instrument::Violin: return "violin";
  }
  return "none";
}

Instrument parse_instrument(const std::string& name) {
  if (name == "none") return Instrument::None;
  if (name == "piano") return Instrument::Piano;
  if (name == "violin") return Instrument::Violin;
  fail(ErrorCode::InvalidInput, "unknown instrument '" + name + "' (expected none, piano or violin)");
}

const char* to_string(Palm palm) { return palm == Palm::Up ? "up" : "down"; }

namespace {

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

RigCalibration calibrate(const std::vector<KeypointFrame>& frames) {
  RigCalibration c;
  double spine_sum = 0.0;
  for (const auto& f : frames) {
    bool body = true;
    for (int p = 0; p < kUpperBodyPoints; ++p) {
      body = body && f.visible[p];
    }
    if (!body) {
      continue;
    }
    c.max_forearm_left = std::max(c.max_forearm_left, (f.points[kLeftWrist] - f.points[kLeftElbow]).norm());
    c.max_forearm_right = std::max(c.max_forearm_right, (f.points[kRightWrist] - f.points[kRightElbow]).norm());
    const Point2 hips = 0.5 * (f.points[kLeftHip] + f.points[kRightHip]);
    const Point2 shoulders = 0.5 * (f.points[kLeftShoulder] + f.points[kRightShoulder]);
    spine_sum += (shoulders - hips).norm();
    c.average_left_shoulder += f.points[kLeftShoulder];
    c.average_right_shoulder += f.points[kRightShoulder];
    ++c.frames_used;
  }
  require(c.frames_used > 0, ErrorCode::InvalidInput,
          "calibration needs at least one frame with shoulders, elbows, wrists and hips visible");
  const double n = static_cast<double>(c.frames_used);
  c.average_spine_length = spine_sum / n;
  c.average_left_shoulder /= n;
  c.average_right_shoulder /= n;
  return c;
}

SpinePart spine_transform(const KeypointFrame& frame, const RigCalibration& calibration,
                          double rest_spine_length) {
  require(frame.visible_all({kLeftHip, kRightHip, kLeftShoulder, kRightShoulder}), ErrorCode::InvalidInput,
          "spine needs both hips and both shoulders");
  require(rest_spine_length > 0.0, ErrorCode::InvalidInput, "rest spine length must be positive");
  SpinePart s;
  s.root = 0.5 * (frame.points[kLeftHip] + frame.points[kRightHip]);
  const Point2 top = 0.5 * (frame.points[kLeftShoulder] + frame.points[kRightShoulder]);
  const Point2 d = top - s.root;
  s.length = d.norm();
  require(s.length > 1e-12 * std::max(1.0, s.root.norm()), ErrorCode::DegenerateConfiguration,
          "hip midpoint coincides with shoulder midpoint");
  s.direction = d / s.length;
  s.scale = calibration.average_spine_length / rest_spine_length;
  s.animated = true;
  return s;
}

double arm_out_of_plane(double forearm_length, double max_length, std::string* warning) {
  require(max_length > 0.0 && std::isfinite(max_length), ErrorCode::InvalidInput,
          "maximum forearm length must be positive");
  require(std::isfinite(forearm_length), ErrorCode::InvalidInput, "forearm length is not finite");
  double ratio = forearm_length / max_length;
  if (ratio > 1.0 || ratio < 0.0) {
    if (warning != nullptr) {
      *warning = "forearm length " + std::to_string(forearm_length) + " outside [0, " +
                 std::to_string(max_length) + "], clamped";
    }
    ratio = std::clamp(ratio, 0.0, 1.0);
  }
  return std::acos(ratio);
}

HandOrientation hand_orientation(const Point2& pinkie_root, const Point2& pointer_root, Side side) {
  const Point2 d = pointer_root - pinkie_root;
  require(d.norm() > 0.0, ErrorCode::DegenerateConfiguration, "pinkie and pointer roots coincide");
  HandOrientation o;
  o.rotation = std::atan2(d.y(), d.x());
  const bool pointer_left = pointer_root.x() < pinkie_root.x();
  const bool pointer_right = pointer_root.x() > pinkie_root.x();
  o.palm = (side == Side::Right ? pointer_left : pointer_right) ? Palm::Up : Palm::Down;
  return o;
}

std::array<Point2, kHandPoints> hand_points(const KeypointFrame& frame, Side side) {
  std::array<Point2, kHandPoints> h;
  const int off = hand_offset(side);
  for (int i = 0; i < kHandPoints; ++i) {
    h[i] = frame.points[off + i];
  }
  return h;
}

std::array<double, 5> finger_angles(const std::array<Point2, kHandPoints>& hand,
                                    std::vector<std::string>* warnings) {
  static constexpr int kRoots[5] = {kThumbRoot, kIndexRoot, kMiddleRoot, kRingRoot, kPinkyRoot};
  static constexpr int kTips[5] = {kThumbTip, kIndexTip, kMiddleTip, kRingTip, kPinkyTip};
  static constexpr const char* kNames[5] = {"thumb", "index", "middle", "ring", "pinky"};
  const Point2 axis = hand[kMiddleRoot] - hand[kHandWrist];
  require(axis.norm() > 0.0, ErrorCode::DegenerateConfiguration, "wrist coincides with middle-finger root");
  std::array<double, 5> out{};
  for (int f = 0; f < 5; ++f) {
    const Point2 v = hand[kTips[f]] - hand[kRoots[f]];
    if (v.norm() == 0.0) {
      if (warnings != nullptr) {
        warnings->push_back(std::string(kNames[f]) + " root coincides with tip");
      }
      continue;
    }
    out[f] = std::atan2(cross(axis, v), axis.dot(v));
  }
  return out;
}

double piano_depth(double wrist_x, double frame_width, double depth_gain) {
  require(frame_width > 0.0, ErrorCode::InvalidInput, "frame width must be positive");
  return depth_gain * (0.5 - std::clamp(wrist_x / frame_width, 0.0, 1.0));
}

Vec3 lift(const Point2& p, double z) { return {p.x(), -p.y(), z}; }

}  // namespace a2p::retarget
