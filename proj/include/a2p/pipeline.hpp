#pragma once

#include "a2p/audio.hpp"
#include "a2p/keypoints.hpp"
#include "a2p/motion.hpp"
#include "a2p/predict.hpp"
#include "a2p/retarget.hpp"
#include "a2p/train.hpp"

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace a2p::pipeline {

namespace fs = std::filesystem;

// Configuration

struct PathsConfig {
  fs::path audio_dir = "audio";
  fs::path keypoints_dir = "keypoints";
  fs::path output_dir = "out";
};

struct FilterSettings {
  /// When false, training clips keep every frame that can be aligned. Test clips are always filtered.
  bool enabled = true;
  double jump_fraction = 0.10;
  /// 0 uses each clip's own frame width.
  double frame_width = 0.0;
  std::optional<keypoints::Rect> reference_box;
  std::string person_id;
  bool interpolate_missing = false;
};

struct SplitConfig {
  double train = 0.8;
  double valid = 0.2;
  /// Whole clips held out for testing.
  double test = 0.0;
  double chunk_seconds = 30.0;

  void validate() const;
};

struct PipelineConfig {
  std::string profile = "default";
  std::uint64_t seed = 1;
  PathsConfig paths;
  audio::FeatureConfig features;
  FilterSettings filter;
  keypoints::PcaConfig pca{0.90, 15};
  sequence::TrainConfig train;
  int upsample_factor = 4;
  /// When set, overrides train.time_delay after conversion to ticks.
  std::optional<double> time_delay_ms;
  /// Fraction of the training chunks actually used.
  double data_fraction = 1.0;
  SplitConfig split;
  retarget::RetargetConfig retarget;

  void validate() const;
  double tick_rate() const { return features.video_fps * upsample_factor; }
  /// Train config with the seed applied and the delay converted to ticks.
  sequence::TrainConfig resolved_train() const;
};

const std::vector<std::string>& profile_names();
/// Unknown names raise InvalidInput.
void apply_profile(PipelineConfig& config, const std::string& name);

/// INI file: [run] [paths] [features] [filter] [pca] [train] [split] [retarget].
/// The profile named in [run] (or the override) is applied before the file's own values.
PipelineConfig parse_config(const std::string& text, const std::optional<std::string>& profile_override = {},
                            const fs::path& base_dir = {});
PipelineConfig load_config(const fs::path& path, const std::optional<std::string>& profile_override = {});
/// Fully resolved configuration; parsing it back reproduces `config`.
std::string to_ini(const PipelineConfig& config);
void write_config(const fs::path& path, const PipelineConfig& config);

// Dataset preparation

enum class Split { Train, Valid, Test, Unused };
const char* to_string(Split split);
Split parse_split(const std::string& name);

struct Chunk {
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  Split split = Split::Train;
};

struct RawClip {
  std::string id;
  fs::path audio_path;
  fs::path keypoint_path;
  audio::FeatureSequence features;
  keypoints::KeypointClip keypoints;
};

struct RawCorpus {
  std::vector<RawClip> clips;
  /// Files without a partner of the same basename.
  std::vector<std::string> skipped;
};

/// Pairs <audio_dir>/<id>.wav with <keypoints_dir>/<id>.json and extracts features.
RawCorpus load_corpus(const PipelineConfig& config, unsigned workers);

struct ClipData {
  std::string id;
  std::string audio_file;
  std::string keypoint_file;
  double fps = 24.0;
  int width = 0;
  int height = 0;
  std::size_t frame_count = 0;
  std::size_t kept_count = 0;
  std::size_t dropped_count = 0;
  std::map<std::string, std::size_t> drop_reasons;
  bool test = false;
  std::vector<Chunk> chunks;
  audio::FeatureSequence features;
  /// Kept frames mapped into reference coordinates.
  std::vector<keypoints::KeypointFrame> aligned;
  /// Raw PCA coefficients per tick (k x frame_count * factor) and their validity.
  Eigen::MatrixXd coefficients;
  std::vector<std::uint8_t> tick_valid;

  Split split_of_frame(std::size_t frame) const;
};

struct PreparedDataset {
  PipelineConfig config;
  keypoints::MotionModel motion;
  std::vector<ClipData> clips;
  std::vector<std::string> skipped;
};

/// Filtering, rigid alignment to a corpus reference pose, PCA on the training
/// frames, tick-rate targets and standardization statistics.
PreparedDataset prepare_dataset(const RawCorpus& corpus, const PipelineConfig& config, unsigned workers);

std::string manifest_json(const PreparedDataset& dataset);
void write_prepared(const fs::path& directory, const PreparedDataset& dataset);
PreparedDataset load_prepared(const fs::path& directory);

// Target file: "A2PT" | u32 version | u32 crc32(body) | body.
inline constexpr std::uint32_t kTargetFileVersion = 1;

/// Standardized chunk sequences for the training and validation splits.
sequence::TrainingData build_training_data(const PreparedDataset& dataset);
sequence::NetworkBundle make_bundle(const sequence::LstmModel& model, const PreparedDataset& dataset);

// Evaluation

struct SplitErrors {
  double train = std::numeric_limits<double>::quiet_NaN();
  double valid = std::numeric_limits<double>::quiet_NaN();
  double test = std::numeric_limits<double>::quiet_NaN();
};

/// Pixel error of whole-clip predictions against the aligned kept frames, per split.
SplitErrors evaluate_splits(const sequence::NetworkBundle& bundle, const PreparedDataset& dataset,
                            unsigned workers);

/// Pairs ground-truth frame j with prediction frame j * (predicted fps / truth fps).
struct AlignedPairs {
  std::vector<keypoints::KeypointFrame> predicted;
  std::vector<keypoints::KeypointFrame> truth;
};
AlignedPairs pair_by_frame_index(const keypoints::KeypointClip& predicted, const keypoints::KeypointClip& truth);

/// RMS distance of the visible points from their per-point mean position.
double pose_std(const std::vector<keypoints::KeypointFrame>& frames);

struct TrainedRun {
  sequence::NetworkBundle bundle;
  sequence::TrainReport report;
  SplitErrors errors;
};
TrainedRun train_and_evaluate(const PreparedDataset& dataset, unsigned workers);

// Ablation

struct Variant {
  std::string spec;
  std::string label;
  std::vector<std::pair<std::string, std::string>> settings;
};

/// "key=value[,key=value...]"; flag keys (no_filtering, interpolate_missing) need no value.
Variant parse_variant(const std::string& spec);
PipelineConfig apply_variant(const PipelineConfig& base, const Variant& variant);
/// Configs with equal keys produce identical prepared datasets.
std::string preparation_key(const PipelineConfig& config);

struct AblationRow {
  std::string label;
  std::string spec;
  SplitErrors errors;
  std::uint32_t checksum = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // variants in order, baseline last
  bool determinism_checked = false;
  bool determinism_ok = true;
  std::vector<std::string> notes;
};

AblationReport run_ablation(const RawCorpus& corpus, const PipelineConfig& base,
                            const std::vector<Variant>& variants, unsigned workers,
                            std::ostream* progress = nullptr);
/// Method | Train | Valid | Test, in pixels.
std::string format_table(const AblationReport& report);
std::string ablation_json(const AblationReport& report);

// Commands. Each returns the process exit code; errors propagate as exceptions.

struct CommandOptions {
  std::optional<fs::path> config_file;
  std::optional<std::string> profile;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
};

PipelineConfig resolve_config(const CommandOptions& options);

int cmd_prepare(const CommandOptions& options, std::ostream& log);
int cmd_train(const CommandOptions& options, const std::optional<fs::path>& data_dir, std::ostream& log);
int cmd_predict(const fs::path& model, const fs::path& audio, const fs::path& out, std::ostream& log);
int cmd_evaluate(const fs::path& predictions, const fs::path& truth, const std::optional<fs::path>& out,
                 std::ostream& log);
int cmd_ablate(const CommandOptions& options, const std::vector<std::string>& variants, std::ostream& log);
int cmd_retarget(const CommandOptions& options, const fs::path& keypoints, const std::optional<std::string>& instrument,
                 std::ostream& log);
int cmd_render(const fs::path& predictions, const std::optional<fs::path>& truth, const fs::path& out,
               std::ostream& log);

/// 2 for missing or corrupt input, 1 for any other failure.
int exit_code_for(const std::exception& error);

}  // namespace a2p::pipeline
