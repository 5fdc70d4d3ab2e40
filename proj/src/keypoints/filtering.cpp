#include "a2p/error.hpp"
#include "a2p/keypoints.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace a2p::keypoints {

const char* to_string(DropReason reason) {
  switch (reason) {
    case DropReason::MissingPoints:
      return "missing_points";
    case DropReason::PersonMismatch:
      return "person_mismatch";
    case DropReason::OutsideReferenceBox:
      return "outside_reference_box";
    case DropReason::Jump:
      return "jump";
  }
  return "unknown";
}

namespace {

std::string most_frequent_person(const std::vector<KeypointFrame>& frames) {
  std::map<std::string, std::size_t> counts;
  for (const auto& f : frames) {
    ++counts[f.person_id];
  }
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [id, count] : counts) {
    if (count > best_count) {
      best = id;
      best_count = count;
    }
  }
  return best;
}

std::optional<Point2> box_center(const KeypointFrame& f) {
  Point2 lo = Point2::Constant(std::numeric_limits<double>::infinity());
  Point2 hi = -lo;
  bool any = false;
  for (int p = 0; p < kNumPoints; ++p) {
    if (f.visible[p]) {
      lo = lo.cwiseMin(f.points[p]);
      hi = hi.cwiseMax(f.points[p]);
      any = true;
    }
  }
  if (!any) {
    return std::nullopt;
  }
  return 0.5 * (lo + hi);
}

bool jumped(const KeypointFrame& prev, const KeypointFrame& cur, double threshold) {
  for (int p = 0; p < kNumPoints; ++p) {
    if (prev.visible[p] && cur.visible[p] && (cur.points[p] - prev.points[p]).norm() > threshold) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<KeypointFrame> interpolate_missing(const std::vector<KeypointFrame>& frames) {
  std::vector<KeypointFrame> out = frames;
  const auto n = frames.size();
  for (int p = 0; p < kNumPoints; ++p) {
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i) {
      if (frames[i].visible[p]) {
        seen.push_back(i);
      }
    }
    if (seen.empty()) {
      continue;
    }
    std::size_t next = 0;  // index into seen of first visible frame at or after i
    for (std::size_t i = 0; i < n; ++i) {
      while (next < seen.size() && seen[next] < i) {
        ++next;
      }
      if (frames[i].visible[p]) {
        continue;
      }
      Point2 value;
      if (next == 0) {
        value = frames[seen.front()].points[p];
      } else if (next == seen.size()) {
        value = frames[seen.back()].points[p];
      } else {
        const auto& a = frames[seen[next - 1]];
        const auto& b = frames[seen[next]];
        const double span = static_cast<double>(b.frame_index - a.frame_index);
        const double w = static_cast<double>(frames[i].frame_index - a.frame_index) / span;
        value = (1.0 - w) * a.points[p] + w * b.points[p];
      }
      out[i].points[p] = value;
      out[i].visible[p] = true;
      out[i].confidence[p] = 0.0;
    }
  }
  return out;
}

FilterResult filter_frames(const std::vector<KeypointFrame>& frames, const FilterConfig& config) {
  require(!frames.empty(), ErrorCode::InvalidInput, "no frames to filter");
  require(config.jump_fraction > 0.0 && config.jump_fraction < 1.0, ErrorCode::InvalidInput,
          "jump_fraction must be in (0, 1)");
  require(config.frame_width > 0.0, ErrorCode::InvalidInput, "frame_width must be positive");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    require(frames[i].frame_index > frames[i - 1].frame_index, ErrorCode::InvalidInput,
            "frame indices must be strictly increasing");
  }

  const std::vector<KeypointFrame> filled =
      config.interpolate_missing ? interpolate_missing(frames) : std::vector<KeypointFrame>{};
  const auto& input = config.interpolate_missing ? filled : frames;

  const std::string person = config.reference_person_id.empty()
                                 ? most_frequent_person(input)
                                 : config.reference_person_id;
  const double threshold = config.jump_threshold();

  FilterResult result;
  result.kept.reserve(input.size());
  bool have_previous = false;
  for (const auto& f : input) {
    std::optional<DropReason> reason;
    if (!f.all_visible()) {
      reason = DropReason::MissingPoints;
    } else if (f.person_id != person) {
      reason = DropReason::PersonMismatch;
    } else if (config.reference_box) {
      const auto center = box_center(f);
      if (!center || !config.reference_box->contains(*center)) {
        reason = DropReason::OutsideReferenceBox;
      }
    }
    if (!reason && have_previous && jumped(result.kept.back(), f, threshold)) {
      reason = DropReason::Jump;
    }

    if (reason) {
      result.dropped.push_back({f.frame_index, *reason});
    } else {
      result.kept.push_back(f);
      have_previous = true;
    }
  }
  return result;
}

}  // namespace a2p::keypoints
