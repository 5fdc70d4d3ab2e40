#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace a2p::keypoints {

inline constexpr int kNumPoints = 50;
inline constexpr int kUpperBodyPoints = 8;
inline constexpr int kHandPoints = 21;
inline constexpr int kLeftHandOffset = 8;
inline constexpr int kRightHandOffset = 29;
inline constexpr int kPoseDim = 2 * kNumPoints;

/// Upper-body slots 0-7.
enum BodyPoint : int {
  kRightShoulder = 0,
  kRightElbow = 1,
  kRightWrist = 2,
  kLeftShoulder = 3,
  kLeftElbow = 4,
  kLeftWrist = 5,
  kRightHip = 6,
  kLeftHip = 7,
};

/// Offsets inside one 21-point hand block (wrist, then 4 joints per finger).
enum HandPoint : int {
  kHandWrist = 0,
  kThumbRoot = 1,
  kThumbTip = 4,
  kIndexRoot = 5,
  kIndexTip = 8,
  kMiddleRoot = 9,
  kMiddleTip = 12,
  kRingRoot = 13,
  kRingTip = 16,
  kPinkyRoot = 17,
  kPinkyTip = 20,
};

enum class Side { Left, Right };

constexpr int hand_offset(Side side) {
  return side == Side::Left ? kLeftHandOffset : kRightHandOffset;
}

using Point2 = Eigen::Vector2d;
using PoseVector = Eigen::Matrix<double, kPoseDim, 1>;

struct KeypointFrame {
  std::int64_t frame_index = 0;
  std::string person_id;
  std::array<Point2, kNumPoints> points;
  std::array<double, kNumPoints> confidence{};
  std::array<bool, kNumPoints> visible{};
  std::vector<std::string> source;  // optional per-point detector tag

  KeypointFrame();

  bool all_visible() const;
  bool visible_all(std::initializer_list<int> indices) const;

  /// [x0, y0, x1, y1, ...]
  PoseVector pose() const;
  static KeypointFrame from_pose(const Eigen::Ref<const Eigen::VectorXd>& pose,
                                 std::int64_t frame_index);
};

struct KeypointClip {
  double fps = 24.0;
  int width = 0;
  int height = 0;
  std::vector<KeypointFrame> frames;
};

/// {fps, width, height, frames: [{index, person_id, points: [[x, y, confidence, visible], ...]}]}
KeypointClip read_keypoint_json(const std::filesystem::path& path);
KeypointClip parse_keypoint_json(const std::string& text);
std::string to_keypoint_json(const KeypointClip& clip);
void write_keypoint_json(const std::filesystem::path& path, const KeypointClip& clip);

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(const Point2& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1; }
};

struct FilterConfig {
  double frame_width = 0.0;
  double jump_fraction = 0.10;
  std::optional<Rect> reference_box;
  /// Empty selects the most frequent person id of the clip.
  std::string reference_person_id;
  /// Fill invisible points from temporal neighbours instead of dropping the frame.
  bool interpolate_missing = false;

  double jump_threshold() const { return jump_fraction * frame_width; }
};

enum class DropReason { MissingPoints, PersonMismatch, OutsideReferenceBox, Jump };
const char* to_string(DropReason reason);

struct DropRecord {
  std::int64_t frame_index = 0;
  DropReason reason = DropReason::MissingPoints;
};

struct FilterResult {
  std::vector<KeypointFrame> kept;
  std::vector<DropRecord> dropped;
};

FilterResult filter_frames(const std::vector<KeypointFrame>& frames, const FilterConfig& config);

/// Linear-in-time fill of invisible points; points never visible stay invisible.
std::vector<KeypointFrame> interpolate_missing(const std::vector<KeypointFrame>& frames);

}  // namespace a2p::keypoints
