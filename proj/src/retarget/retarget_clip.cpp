#include "a2p/error.hpp"
#include "a2p/parallel.hpp"
#include "a2p/retarget.hpp"

#include <cmath>

namespace a2p::retarget {

using namespace keypoints;

namespace {

const char* side_name(Side side) { return side == Side::Left ? "left" : "right"; }

ArmPart arm_part(const KeypointFrame& frame, const RigCalibration& calibration, Side side,
                 std::vector<std::string>& warnings) {
  const int elbow = side == Side::Left ? kLeftElbow : kRightElbow;
  const int wrist = side == Side::Left ? kLeftWrist : kRightWrist;
  ArmPart arm;
  if (!frame.visible_all({elbow, wrist})) {
    warnings.push_back(std::string(side_name(side)) + " arm missing, left at rest");
    return arm;
  }
  const double max_length = calibration.max_forearm(side);
  std::string warning;
  arm.out_of_plane_angle =
      arm_out_of_plane((frame.points[wrist] - frame.points[elbow]).norm(), max_length, &warning);
  if (!warning.empty()) {
    warnings.push_back(std::string(side_name(side)) + " " + warning);
  }
  arm.wrist_target = lift(frame.points[wrist], max_length * std::sin(arm.out_of_plane_angle));
  arm.animated = true;
  return arm;
}

HandPart hand_part(const KeypointFrame& frame, Side side, std::vector<std::string>& warnings) {
  const int off = hand_offset(side);
  HandPart hand;
  if (!frame.visible_all({off + kHandWrist, off + kIndexRoot, off + kMiddleRoot, off + kPinkyRoot})) {
    warnings.push_back(std::string(side_name(side)) + " hand missing, left at rest");
    return hand;
  }
  const auto points = hand_points(frame, side);
  const auto orientation = hand_orientation(points[kPinkyRoot], points[kIndexRoot], side);
  hand.palm = orientation.palm;
  hand.rotation = orientation.rotation;
  hand.finger_angles = finger_angles(points, &warnings);
  static constexpr int kRoots[5] = {kThumbRoot, kIndexRoot, kMiddleRoot, kRingRoot, kPinkyRoot};
  static constexpr int kTips[5] = {kThumbTip, kIndexTip, kMiddleTip, kRingTip, kPinkyTip};
  for (int f = 0; f < 5; ++f) {
    if (!frame.visible_all({off + kRoots[f], off + kTips[f]})) {
      hand.finger_angles[f] = 0.0;
    }
  }
  hand.animated = true;
  return hand;
}

InstrumentPart violin_part(const RigFrame& rig, const RetargetConfig& config) {
  InstrumentPart part;
  if (!rig.spine.animated || !rig.left_arm.animated || !rig.right_arm.animated) {
    return part;
  }
  const Point2 shoulders = rig.spine.root + rig.spine.length * rig.spine.direction;
  const Point2 head = shoulders + config.head_offset * rig.spine.length * rig.spine.direction;
  part.violin_position = lift(head) + config.violin_offset;
  part.violin_look_at = look_at(part.violin_position, rig.left_arm.wrist_target, config.up_hint);
  part.bow_position = rig.right_arm.wrist_target + config.bow_offset;
  const Vec3 bridge = part.violin_position + config.bridge_offset;
  part.bow_look_at = look_at(part.bow_position, bridge, config.up_hint);
  part.animated = true;
  return part;
}

}  // namespace

RigFrame retarget_frame(const KeypointFrame& frame, const RigCalibration& calibration,
                        const RetargetConfig& config, double fps, double frame_width) {
  RigFrame rig;
  rig.frame_index = frame.frame_index;
  rig.timestamp = fps > 0.0 ? static_cast<double>(frame.frame_index) / fps : 0.0;

  auto guarded = [&](const char* part, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      rig.warnings.push_back(std::string(part) + ": " + e.what() + ", left at rest");
    }
  };

  if (frame.visible_all({kLeftHip, kRightHip, kLeftShoulder, kRightShoulder})) {
    guarded("spine", [&] { rig.spine = spine_transform(frame, calibration, config.rest_spine_length); });
  } else {
    rig.warnings.push_back("spine missing, left at rest");
  }
  guarded("left arm", [&] { rig.left_arm = arm_part(frame, calibration, Side::Left, rig.warnings); });
  guarded("right arm", [&] { rig.right_arm = arm_part(frame, calibration, Side::Right, rig.warnings); });
  guarded("left hand", [&] { rig.left_hand = hand_part(frame, Side::Left, rig.warnings); });
  guarded("right hand", [&] { rig.right_hand = hand_part(frame, Side::Right, rig.warnings); });

  if (config.instrument == Instrument::Piano) {
    rig.root_rotation = config.piano_root_rotation;
    double sum = 0.0;
    int count = 0;
    for (int w : {kLeftWrist, kRightWrist}) {
      if (frame.visible[w]) {
        sum += frame.points[w].x();
        ++count;
      }
    }
    rig.piano_depth = 0.0;
    if (count > 0) {
      rig.piano_depth = piano_depth(sum / count, frame_width, config.depth_gain);
    } else {
      rig.warnings.push_back("no wrist visible, piano depth left at rest");
    }
  } else if (config.instrument == Instrument::Violin) {
    rig.instrument = InstrumentPart{};
    guarded("violin", [&] { rig.instrument = violin_part(rig, config); });
  }
  return rig;
}

std::vector<RigFrame> retarget_clip(const std::vector<KeypointFrame>& frames, const RigCalibration& calibration,
                                    const RetargetConfig& config, double fps, double frame_width,
                                    unsigned workers) {
  require(calibration.max_forearm_left > 0.0 && calibration.max_forearm_right > 0.0, ErrorCode::InvalidInput,
          "calibration has a zero maximum forearm length");
  require(config.instrument != Instrument::Piano || frame_width > 0.0, ErrorCode::InvalidInput,
          "piano depth needs the frame width");
  std::vector<RigFrame> out(frames.size());
  parallel_for(frames.size(), workers, [&](std::size_t i) {
    out[i] = retarget_frame(frames[i], calibration, config, fps, frame_width);
  });
  return out;
}

}  // namespace a2p::retarget
