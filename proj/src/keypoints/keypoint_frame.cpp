#include "a2p/keypoints.hpp"

#include <algorithm>

namespace a2p::keypoints {

KeypointFrame::KeypointFrame() { points.fill(Point2::Zero()); }

bool KeypointFrame::all_visible() const {
  return std::all_of(visible.begin(), visible.end(), [](bool v) { return v; });
}

bool KeypointFrame::visible_all(std::initializer_list<int> indices) const {
  return std::all_of(indices.begin(), indices.end(), [&](int i) { return visible[i]; });
}

PoseVector KeypointFrame::pose() const {
  PoseVector v;
  for (int p = 0; p < kNumPoints; ++p) {
    v[2 * p] = points[p].x();
    v[2 * p + 1] = points[p].y();
  }
  return v;
}

KeypointFrame KeypointFrame::from_pose(const Eigen::Ref<const Eigen::VectorXd>& pose,
                                       std::int64_t frame_index) {
  KeypointFrame f;
  f.frame_index = frame_index;
  for (int p = 0; p < kNumPoints; ++p) {
    f.points[p] = Point2(pose[2 * p], pose[2 * p + 1]);
    f.confidence[p] = 1.0;
    f.visible[p] = true;
  }
  return f;
}

}  // namespace a2p::keypoints
