#include "a2p/error.hpp"
#include "a2p/retarget.hpp"

#include <json.hpp>

#include <fstream>

namespace a2p::retarget {

namespace {

using json = nlohmann::ordered_json;

json vec(const Point2& p) { return json::array({p.x(), p.y()}); }
json vec(const Vec3& p) { return json::array({p.x(), p.y(), p.z()}); }
json quat(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

json arm_json(const ArmPart& arm) {
  json j;
  j["animated"] = arm.animated;
  j["wrist_target"] = vec(arm.wrist_target);
  j["out_of_plane_angle"] = arm.out_of_plane_angle;
  return j;
}

json hand_json(const HandPart& hand) {
  json j;
  j["animated"] = hand.animated;
  j["palm"] = to_string(hand.palm);
  j["rotation"] = hand.rotation;
  j["finger_angles"] = hand.finger_angles;
  return j;
}

}  // namespace

std::string rig_frame_json(const RigFrame& frame) {
  json j;
  j["frame"] = frame.frame_index;
  j["timestamp"] = frame.timestamp;
  json spine;
  spine["animated"] = frame.spine.animated;
  spine["root"] = vec(frame.spine.root);
  spine["direction"] = vec(frame.spine.direction);
  spine["length"] = frame.spine.length;
  spine["scale"] = frame.spine.scale;
  j["spine"] = spine;
  j["arms"] = json{{"left", arm_json(frame.left_arm)}, {"right", arm_json(frame.right_arm)}};
  j["hands"] = json{{"left", hand_json(frame.left_hand)}, {"right", hand_json(frame.right_hand)}};
  if (frame.piano_depth) {
    j["piano_depth"] = *frame.piano_depth;
  }
  if (frame.root_rotation) {
    j["root_rotation"] = *frame.root_rotation;
  }
  if (frame.instrument) {
    const auto& in = *frame.instrument;
    json inst;
    inst["animated"] = in.animated;
    inst["violin_position"] = vec(in.violin_position);
    inst["violin_look_at"] = quat(in.violin_look_at);
    inst["bow_position"] = vec(in.bow_position);
    inst["bow_look_at"] = quat(in.bow_look_at);
    j["instrument"] = inst;
  }
  j["warnings"] = frame.warnings;
  return j.dump();
}

void write_rig_stream(const std::filesystem::path& path, const std::vector<RigFrame>& frames) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& f : frames) {
    out << rig_frame_json(f) << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace a2p::retarget
