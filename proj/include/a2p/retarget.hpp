#pragma once

#include "a2p/keypoints.hpp"

#include <Eigen/Geometry>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace a2p::retarget {

using keypoints::KeypointFrame;
using keypoints::Point2;
using keypoints::Side;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

enum class Instrument { None, Piano, Violin };
const char* to_string(Instrument instrument);
Instrument parse_instrument(const std::string& name);

enum class Palm { Up, Down };
const char* to_string(Palm palm);

struct RigCalibration {
  double max_forearm_left = 0.0;
  double max_forearm_right = 0.0;
  double average_spine_length = 0.0;
  Point2 average_left_shoulder = Point2::Zero();
  Point2 average_right_shoulder = Point2::Zero();
  std::size_t frames_used = 0;

  double max_forearm(Side side) const { return side == Side::Left ? max_forearm_left : max_forearm_right; }
};

struct RetargetConfig {
  Instrument instrument = Instrument::None;
  double rest_spine_length = 1.0;
  double depth_gain = 1.0;
  /// Fixed root yaw for the piano rig, radians.
  double piano_root_rotation = 0.0;
  /// Head sits this many spine lengths above the shoulder midpoint.
  double head_offset = 0.35;
  /// Rest offsets of the instrument constraint slots, in pixels of the lifted frame.
  Vec3 violin_offset{0.0, 0.0, 0.0};
  Vec3 bow_offset{0.0, 0.0, 0.0};
  Vec3 bridge_offset{0.0, 0.0, 0.0};
  Vec3 up_hint{0.0, 1.0, 0.0};
};

struct SpinePart {
  bool animated = false;
  Point2 root = Point2::Zero();
  Point2 direction{0.0, -1.0};
  double length = 0.0;
  double scale = 1.0;
};

struct ArmPart {
  bool animated = false;
  Vec3 wrist_target = Vec3::Zero();
  double out_of_plane_angle = 0.0;
};

struct HandPart {
  bool animated = false;
  Palm palm = Palm::Down;
  double rotation = 0.0;
  std::array<double, 5> finger_angles{};
};

struct InstrumentPart {
  bool animated = false;
  Vec3 violin_position = Vec3::Zero();
  Quat violin_look_at = Quat::Identity();
  Vec3 bow_position = Vec3::Zero();
  Quat bow_look_at = Quat::Identity();
};

struct RigFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  SpinePart spine;
  ArmPart left_arm;
  ArmPart right_arm;
  HandPart left_hand;
  HandPart right_hand;
  std::optional<double> piano_depth;
  std::optional<double> root_rotation;
  std::optional<InstrumentPart> instrument;
  std::vector<std::string> warnings;
};

/// Per-clip statistics over frames with the whole upper body visible.
RigCalibration calibrate(const std::vector<KeypointFrame>& frames);

SpinePart spine_transform(const KeypointFrame& frame, const RigCalibration& calibration,
                          double rest_spine_length = 1.0);

/// arccos(length / max): 0 for a straight in-plane arm, pi/2 for a fully foreshortened one.
/// Lengths outside [0, max] are clamped and reported through `warning`.
double arm_out_of_plane(double forearm_length, double max_length, std::string* warning = nullptr);

struct HandOrientation {
  Palm palm = Palm::Down;
  double rotation = 0.0;
};
/// Right hand: pointer root left of the pinkie root in the image means palm up. The left hand mirrors this.
HandOrientation hand_orientation(const Point2& pinkie_root, const Point2& pointer_root, Side side);

/// Signed angle of each finger's root->tip vector against the wrist->middle-root axis.
/// Order: thumb, index, middle, ring, pinky.
std::array<double, 5> finger_angles(const std::array<Point2, keypoints::kHandPoints>& hand,
                                    std::vector<std::string>* warnings = nullptr);
std::array<Point2, keypoints::kHandPoints> hand_points(const KeypointFrame& frame, Side side);

/// Rotation taking rest forward (+Z) onto normalize(target - source), rest up (+Y) toward `up`.
Quat look_at(const Vec3& source, const Vec3& target, const Vec3& up = Vec3::UnitY());

/// gain * (0.5 - x / width), with x clamped to the frame.
double piano_depth(double wrist_x, double frame_width, double depth_gain = 1.0);

/// Image point lifted to the rig frame: x right, y up, z toward the camera.
Vec3 lift(const Point2& p, double z = 0.0);

RigFrame retarget_frame(const KeypointFrame& frame, const RigCalibration& calibration,
                        const RetargetConfig& config, double fps, double frame_width);
std::vector<RigFrame> retarget_clip(const std::vector<KeypointFrame>& frames, const RigCalibration& calibration,
                                    const RetargetConfig& config, double fps, double frame_width,
                                    unsigned workers = 1);

/// One NDJSON line. Quaternions are [w, x, y, z].
std::string rig_frame_json(const RigFrame& frame);
void write_rig_stream(const std::filesystem::path& path, const std::vector<RigFrame>& frames);

// Rendering

struct SkeletonEdge {
  int a;
  int b;
};
const std::vector<SkeletonEdge>& skeleton_edges();

struct Canvas {
  int width = 0;
  int height = 0;
};
/// Frame size if known, otherwise the bounding box of every visible point plus a margin.
Canvas canvas_for(const keypoints::KeypointClip& clip, const keypoints::KeypointClip* truth = nullptr);

/// Ground truth (red) is drawn first so predicted markers (green) sit on top.
std::string render_svg(const KeypointFrame& predicted, const KeypointFrame* truth, Canvas canvas);
/// Writes frame_%06d.svg per frame; returns the number of files written.
std::size_t render_frames(const std::filesystem::path& directory, const std::vector<KeypointFrame>& predicted,
                          const std::vector<KeypointFrame>* truth, Canvas canvas);

}  // namespace a2p::retarget
