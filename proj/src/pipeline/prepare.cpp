#include "a2p/alignment.hpp"
#include "a2p/error.hpp"
#include "a2p/parallel.hpp"
#include "a2p/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

namespace a2p::pipeline {

using keypoints::KeypointFrame;

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
    case Split::Unused: return "unused";
  }
  return "unused";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "valid") return Split::Valid;
  if (name == "test") return Split::Test;
  if (name == "unused") return Split::Unused;
  fail(ErrorCode::CorruptFile, "unknown split '" + name + "'");
}

Split ClipData::split_of_frame(std::size_t frame) const {
  for (const auto& c : chunks) {
    if (frame >= c.start_frame && frame < c.end_frame) {
      return c.split;
    }
  }
  return Split::Unused;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::map<std::string, fs::path> list_by_stem(const fs::path& dir, const std::string& extension) {
  require(fs::is_directory(dir), ErrorCode::IoError, "directory not found: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && lower(entry.path().extension().string()) == extension) {
      out.emplace(entry.path().stem().string(), entry.path());
    }
  }
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)), i - 1);
    std::swap(v[i - 1], v[j]);
  }
}

std::size_t usable_frames(const RawClip& clip) {
  std::int64_t extent = 0;
  for (const auto& f : clip.keypoints.frames) {
    extent = std::max(extent, f.frame_index + 1);
  }
  return std::min(clip.features.frames.size(), static_cast<std::size_t>(extent));
}

/// Assigns whole test clips, then train/valid/unused chunks, from one seeded stream.
void assign_splits(std::vector<ClipData>& clips, const PipelineConfig& config) {
  std::mt19937_64 rng(config.seed);
  const std::size_t n_clips = clips.size();
  std::size_t n_test = 0;
  if (config.split.test > 0.0 && n_clips >= 2) {
    n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(config.split.test * n_clips)), 1,
                                     n_clips - 1);
  }
  std::vector<std::size_t> clip_order(n_clips);
  std::iota(clip_order.begin(), clip_order.end(), std::size_t{0});
  shuffle(clip_order, rng);
  for (std::size_t i = 0; i < n_test; ++i) {
    clips[clip_order[i]].test = true;
  }

  const auto chunk_frames = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.split.chunk_seconds * config.features.video_fps)));
  std::vector<std::pair<std::size_t, std::size_t>> all;  // (clip, chunk)
  for (std::size_t c = 0; c < n_clips; ++c) {
    auto& clip = clips[c];
    clip.chunks.clear();
    if (clip.test) {
      clip.chunks.push_back({0, clip.frame_count, Split::Test});
      continue;
    }
    for (std::size_t s = 0; s < clip.frame_count; s += chunk_frames) {
      clip.chunks.push_back({s, std::min(s + chunk_frames, clip.frame_count), Split::Train});
      all.emplace_back(c, clip.chunks.size() - 1);
    }
  }
  require(!all.empty(), ErrorCode::InvalidInput, "no training chunks after holding out test clips");

  shuffle(all, rng);
  const double valid_share = config.split.valid / (config.split.train + config.split.valid);
  std::size_t n_valid = static_cast<std::size_t>(std::llround(valid_share * static_cast<double>(all.size())));
  if (config.split.valid > 0.0 && all.size() >= 2) {
    n_valid = std::clamp<std::size_t>(n_valid, 1, all.size() - 1);
  }
  n_valid = std::min(n_valid, all.size() - 1);
  const std::size_t n_train = all.size() - n_valid;
  const auto n_used = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.data_fraction * static_cast<double>(n_train) - 1e-9)));
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& chunk = clips[all[i].first].chunks[all[i].second];
    if (i < n_valid) {
      chunk.split = Split::Valid;
    } else if (i - n_valid < n_used) {
      chunk.split = Split::Train;
    } else {
      chunk.split = Split::Unused;
    }
  }
}

bool alignable(const KeypointFrame& f) {
  int visible = 0;
  for (int p = 0; p < keypoints::kUpperBodyPoints; ++p) {
    visible += f.visible[p] ? 1 : 0;
  }
  return visible >= 2;
}

void filter_clip(ClipData& out, const RawClip& raw, const PipelineConfig& config, std::vector<KeypointFrame>& kept) {
  std::vector<KeypointFrame> frames;
  frames.reserve(raw.keypoints.frames.size());
  for (const auto& f : raw.keypoints.frames) {
    if (f.frame_index >= 0 && static_cast<std::size_t>(f.frame_index) < out.frame_count) {
      frames.push_back(f);
    }
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const KeypointFrame& a, const KeypointFrame& b) { return a.frame_index < b.frame_index; });

  if (!config.filter.enabled && !out.test) {
    for (auto& f : frames) {
      if (alignable(f)) {
        kept.push_back(std::move(f));
      } else {
        ++out.drop_reasons[keypoints::to_string(keypoints::DropReason::MissingPoints)];
      }
    }
  } else {
    keypoints::FilterConfig fc;
    fc.frame_width = config.filter.frame_width > 0.0 ? config.filter.frame_width : raw.keypoints.width;
    require(fc.frame_width > 0.0, ErrorCode::InvalidInput,
            raw.id + ": frame width unknown; set filter.frame_width");
    fc.jump_fraction = config.filter.jump_fraction;
    fc.reference_box = config.filter.reference_box;
    fc.reference_person_id = config.filter.person_id;
    fc.interpolate_missing = config.filter.interpolate_missing;
    auto result = keypoints::filter_frames(frames, fc);
    for (const auto& d : result.dropped) {
      ++out.drop_reasons[keypoints::to_string(d.reason)];
    }
    kept = std::move(result.kept);
  }
  out.kept_count = kept.size();
  out.dropped_count = frames.size() - kept.size();
  // Frames absent from the detector output count as missing.
  if (out.frame_count > frames.size()) {
    const std::size_t absent = out.frame_count - frames.size();
    out.dropped_count += absent;
    out.drop_reasons[keypoints::to_string(keypoints::DropReason::MissingPoints)] += absent;
  }
}

void build_targets(ClipData& clip, const Eigen::MatrixXd& coefficients, int factor) {
  std::vector<long> column(clip.frame_count, -1);
  for (std::size_t i = 0; i < clip.aligned.size(); ++i) {
    column[static_cast<std::size_t>(clip.aligned[i].frame_index)] = static_cast<long>(i);
  }
  const auto ticks = static_cast<Eigen::Index>(clip.frame_count) * factor;
  clip.coefficients = Eigen::MatrixXd::Zero(coefficients.rows(), ticks);
  clip.tick_valid.assign(static_cast<std::size_t>(ticks), 0);
  for (Eigen::Index t = 0; t < ticks; ++t) {
    const auto j = static_cast<std::size_t>(t / factor);
    const int r = static_cast<int>(t % factor);
    const long a = column[j];
    if (a < 0) {
      continue;
    }
    if (r == 0) {
      clip.coefficients.col(t) = coefficients.col(a);
      clip.tick_valid[static_cast<std::size_t>(t)] = 1;
      continue;
    }
    if (j + 1 >= clip.frame_count || column[j + 1] < 0) {
      continue;
    }
    const double w = static_cast<double>(r) / factor;
    clip.coefficients.col(t) = (1.0 - w) * coefficients.col(a) + w * coefficients.col(column[j + 1]);
    clip.tick_valid[static_cast<std::size_t>(t)] = 1;
  }
}

}  // namespace

RawCorpus load_corpus(const PipelineConfig& config, unsigned workers) {
  config.validate();
  const auto audio = list_by_stem(config.paths.audio_dir, ".wav");
  const auto keys = list_by_stem(config.paths.keypoints_dir, ".json");
  RawCorpus corpus;
  for (const auto& [id, path] : keys) {
    if (audio.count(id) == 0) {
      corpus.skipped.push_back(path.filename().string() + ": no matching audio");
      continue;
    }
    RawClip clip;
    clip.id = id;
    clip.audio_path = audio.at(id);
    clip.keypoint_path = path;
    corpus.clips.push_back(std::move(clip));
  }
  for (const auto& [id, path] : audio) {
    if (keys.count(id) == 0) {
      corpus.skipped.push_back(path.filename().string() + ": no matching keypoints");
    }
  }
  require(!corpus.clips.empty(), ErrorCode::IoError,
          "no paired clips in " + config.paths.audio_dir.string() + " and " + config.paths.keypoints_dir.string());

  parallel_for(corpus.clips.size(), workers, [&](std::size_t i) {
    auto& clip = corpus.clips[i];
    clip.keypoints = keypoints::read_keypoint_json(clip.keypoint_path);
    require(std::abs(clip.keypoints.fps - config.features.video_fps) < 1e-6, ErrorCode::InvalidInput,
            clip.id + ": keypoints at " + std::to_string(clip.keypoints.fps) + " fps, expected " +
                std::to_string(config.features.video_fps));
    clip.features = audio::extract_features(audio::read_wav(clip.audio_path), config.features);
  });
  return corpus;
}

PreparedDataset prepare_dataset(const RawCorpus& corpus, const PipelineConfig& config, unsigned workers) {
  config.validate();
  require(!corpus.clips.empty(), ErrorCode::InvalidInput, "empty corpus");
  const int factor = config.upsample_factor;

  PreparedDataset ds;
  ds.config = config;
  ds.skipped = corpus.skipped;
  ds.clips.resize(corpus.clips.size());
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    const auto& raw = corpus.clips[i];
    auto& clip = ds.clips[i];
    clip.id = raw.id;
    clip.audio_file = raw.audio_path.filename().string();
    clip.keypoint_file = raw.keypoint_path.filename().string();
    clip.fps = raw.keypoints.fps;
    clip.width = raw.keypoints.width;
    clip.height = raw.keypoints.height;
    clip.frame_count = usable_frames(raw);
    require(clip.frame_count >= 1, ErrorCode::InvalidInput, raw.id + ": no frames with both audio and keypoints");
  }
  assign_splits(ds.clips, config);

  std::vector<std::vector<KeypointFrame>> kept(ds.clips.size());
  parallel_for(ds.clips.size(), workers,
               [&](std::size_t i) { filter_clip(ds.clips[i], corpus.clips[i], config, kept[i]); });

  // Corpus-level reference: medoid of the fully visible training frames.
  std::vector<KeypointFrame> pool;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    for (const auto& f : kept[i]) {
      if (f.all_visible() && ds.clips[i].split_of_frame(static_cast<std::size_t>(f.frame_index)) == Split::Train) {
        pool.push_back(f);
      }
    }
  }
  require(!pool.empty(), ErrorCode::InvalidInput, "no fully visible training frames survive filtering");
  ds.motion.reference_pose = pool[keypoints::medoid_index(pool)].pose();
  pool.clear();
  pool.shrink_to_fit();

  std::vector<Eigen::MatrixXd> aligned(ds.clips.size());
  parallel_for(ds.clips.size(), workers, [&](std::size_t i) {
    auto& clip = ds.clips[i];
    if (kept[i].empty()) {
      aligned[i].resize(keypoints::kPoseDim, 0);
      return;
    }
    const auto model = keypoints::fit_alignment(kept[i], ds.motion.reference_pose);
    aligned[i] = keypoints::remove_rigid(kept[i], model);
    clip.aligned.reserve(kept[i].size());
    for (std::size_t k = 0; k < kept[i].size(); ++k) {
      auto f = KeypointFrame::from_pose(aligned[i].col(static_cast<Eigen::Index>(k)), kept[i][k].frame_index);
      f.person_id = kept[i][k].person_id;
      f.confidence = kept[i][k].confidence;
      f.visible = kept[i][k].visible;
      clip.aligned.push_back(std::move(f));
    }
  });

  Eigen::Index total = 0;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    for (const auto& f : ds.clips[i].aligned) {
      total += ds.clips[i].split_of_frame(static_cast<std::size_t>(f.frame_index)) == Split::Train ? 1 : 0;
    }
  }
  Eigen::MatrixXd train_poses(keypoints::kPoseDim, total);
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    const auto& clip = ds.clips[i];
    for (std::size_t k = 0; k < clip.aligned.size(); ++k) {
      if (clip.split_of_frame(static_cast<std::size_t>(clip.aligned[k].frame_index)) == Split::Train) {
        train_poses.col(col++) = aligned[i].col(static_cast<Eigen::Index>(k));
      }
    }
  }
  ds.motion.pca = keypoints::fit_pca(train_poses, config.pca);
  train_poses.resize(0, 0);

  parallel_for(ds.clips.size(), workers, [&](std::size_t i) {
    auto& clip = ds.clips[i];
    clip.features.fps = corpus.clips[i].features.fps;
    clip.features.frames.assign(corpus.clips[i].features.frames.begin(),
                                corpus.clips[i].features.frames.begin() +
                                    static_cast<std::ptrdiff_t>(clip.frame_count));
    build_targets(clip, keypoints::project_all(ds.motion.pca, aligned[i]), factor);
  });

  // Standardization statistics over the training ticks.
  std::vector<Eigen::MatrixXd> inputs;
  Eigen::Index in_count = 0;
  Eigen::Index out_count = 0;
  for (const auto& clip : ds.clips) {
    const Eigen::MatrixXd ticks = sequence::upsample_features(clip.features.matrix(), factor);
    Eigen::Index n = 0;
    for (Eigen::Index t = 0; t < ticks.cols(); ++t) {
      if (clip.split_of_frame(static_cast<std::size_t>(t / factor)) == Split::Train) {
        ++n;
        out_count += clip.tick_valid[static_cast<std::size_t>(t)];
      }
    }
    Eigen::MatrixXd selected(ticks.rows(), n);
    n = 0;
    for (Eigen::Index t = 0; t < ticks.cols(); ++t) {
      if (clip.split_of_frame(static_cast<std::size_t>(t / factor)) == Split::Train) {
        selected.col(n++) = ticks.col(t);
      }
    }
    in_count += n;
    inputs.push_back(std::move(selected));
  }
  require(out_count > 0, ErrorCode::InvalidInput, "no valid training targets");
  Eigen::MatrixXd all_in(audio::kFeatureDim, in_count);
  Eigen::MatrixXd all_out(ds.motion.pca.modes(), out_count);
  Eigen::Index ci = 0;
  Eigen::Index co = 0;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    all_in.middleCols(ci, inputs[i].cols()) = inputs[i];
    ci += inputs[i].cols();
    const auto& clip = ds.clips[i];
    for (Eigen::Index t = 0; t < clip.coefficients.cols(); ++t) {
      if (clip.tick_valid[static_cast<std::size_t>(t)] != 0 &&
          clip.split_of_frame(static_cast<std::size_t>(t / factor)) == Split::Train) {
        all_out.col(co++) = clip.coefficients.col(t);
      }
    }
  }
  ds.motion.input_stats = keypoints::StandardizationStats::fit(all_in);
  ds.motion.output_stats = keypoints::StandardizationStats::fit(all_out);
  return ds;
}

}  // namespace a2p::pipeline
