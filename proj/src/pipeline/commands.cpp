#include "a2p/error.hpp"
#include "a2p/parallel.hpp"
#include "a2p/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace a2p::pipeline {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    require(!ec, ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::IoError, "failed writing " + path.string());
}

std::string px(double v) {
  if (!std::isfinite(v)) {
    return "-";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void print_errors(std::ostream& log, const SplitErrors& e) {
  log << "pixel error: train " << px(e.train) << "  valid " << px(e.valid) << "  test " << px(e.test) << "\n";
}

}  // namespace

PipelineConfig resolve_config(const CommandOptions& options) {
  PipelineConfig config;
  if (options.config_file) {
    config = load_config(*options.config_file, options.profile);
  } else if (options.profile) {
    apply_profile(config, *options.profile);
  }
  if (options.seed) {
    config.seed = *options.seed;
  }
  if (options.out) {
    config.paths.output_dir = *options.out;
  }
  config.validate();
  return config;
}

int cmd_prepare(const CommandOptions& options, std::ostream& log) {
  const PipelineConfig config = resolve_config(options);
  const unsigned workers = worker_count();
  const RawCorpus corpus = load_corpus(config, workers);
  for (const auto& s : corpus.skipped) {
    log << "warning: skipped " << s << "\n";
  }
  const PreparedDataset ds = prepare_dataset(corpus, config, workers);
  write_prepared(config.paths.output_dir, ds);

  std::size_t frames = 0;
  std::size_t dropped = 0;
  for (const auto& c : ds.clips) {
    log << c.id << ": " << c.kept_count << "/" << c.frame_count << " frames kept";
    if (!c.drop_reasons.empty()) {
      log << " (";
      bool first = true;
      for (const auto& [reason, n] : c.drop_reasons) {
        log << (first ? "" : ", ") << reason << " " << n;
        first = false;
      }
      log << ")";
    }
    log << (c.test ? " [test]" : "") << "\n";
    frames += c.frame_count;
    dropped += c.dropped_count;
  }
  log << "dropped " << dropped << " of " << frames << " frames ("
      << px(100.0 * static_cast<double>(dropped) / static_cast<double>(std::max<std::size_t>(frames, 1)))
      << "%)\n";
  log << "PCA: " << ds.motion.pca.modes() << " modes, " << px(100.0 * ds.motion.pca.variance_fraction_captured)
      << "% of variance\n";
  log << "wrote " << config.paths.output_dir.string() << "\n";
  return 0;
}

int cmd_train(const CommandOptions& options, const std::optional<fs::path>& data_dir, std::ostream& log) {
  fs::path dir;
  if (data_dir) {
    dir = *data_dir;
  } else {
    CommandOptions probe = options;
    probe.out.reset();
    dir = resolve_config(probe).paths.output_dir;
  }
  PreparedDataset ds = load_prepared(dir);
  if (options.config_file || options.profile) {
    CommandOptions o = options;
    o.out.reset();
    PipelineConfig c = resolve_config(o);
    PipelineConfig a = c;
    PipelineConfig b = ds.config;
    a.seed = b.seed;
    a.paths = b.paths;
    require(preparation_key(a) == preparation_key(b), ErrorCode::InvalidInput,
            "config differs from the prepared dataset in preparation settings; rerun prepare");
    c.paths = ds.config.paths;
    ds.config = c;
  }
  if (options.seed) {
    ds.config.seed = *options.seed;
  }
  const fs::path out = options.out.value_or(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + out.string() + ": " + ec.message());

  const unsigned workers = worker_count();
  const auto config = ds.config.resolved_train();
  log << "training: " << ds.motion.pca.modes() << " outputs, hidden " << config.hidden_dim << ", delay "
      << config.time_delay << " ticks (" << config.delay_source << "), " << config.epochs << " epochs\n";

  auto write_log = [&](const sequence::TrainReport& report) {
    std::string text;
    for (const auto& e : report.epochs) {
      text += sequence::train_log_line(e) + "\n";
    }
    write_text(out / "train_log.ndjson", text);
  };
  TrainedRun run;
  try {
    run = train_and_evaluate(ds, workers);
  } catch (const sequence::TrainingAborted& e) {
    write_log(e.report());
    throw;
  }
  write_log(run.report);
  sequence::write_network(out / "model.a2pn", run.bundle);
  write_text(out / "model.json", sequence::network_sidecar_json(run.bundle, &run.report) + "\n");
  write_config(out / "train_config.ini", ds.config);
  log << "best epoch " << run.report.best_epoch << ", parameter checksum " << run.report.parameter_checksum << "\n";
  print_errors(log, run.errors);
  log << "wrote " << (out / "model.a2pn").string() << "\n";
  return 0;
}

int cmd_predict(const fs::path& model, const fs::path& audio_file, const fs::path& out, std::ostream& log) {
  const auto bundle = sequence::read_network(model);
  const auto features = audio::extract_features(audio::read_wav(audio_file), bundle.features);
  const auto clip = sequence::predict(bundle, features);
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  keypoints::write_keypoint_json(out, clip);
  log << features.frames.size() << " audio frames -> " << clip.frames.size() << " keypoint frames at "
      << clip.fps << " fps\n";
  return 0;
}

int cmd_evaluate(const fs::path& predictions, const fs::path& truth_file, const std::optional<fs::path>& out,
                 std::ostream& log) {
  const auto predicted = keypoints::read_keypoint_json(predictions);
  const auto truth = keypoints::read_keypoint_json(truth_file);
  const auto pairs = pair_by_frame_index(predicted, truth);
  const double error = sequence::pixel_error(pairs.predicted, pairs.truth);
  log << "pixel error " << px(error) << " over " << pairs.truth.size() << " frames\n";
  if (out) {
    nlohmann::ordered_json j;
    j["predictions"] = predictions.string();
    j["ground_truth"] = truth_file.string();
    j["frames"] = pairs.truth.size();
    j["pixel_error"] = error;
    write_text(*out, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_ablate(const CommandOptions& options, const std::vector<std::string>& specs, std::ostream& log) {
  const PipelineConfig config = resolve_config(options);
  std::vector<Variant> variants;
  for (const auto& s : specs) {
    variants.push_back(parse_variant(s));
  }
  const unsigned workers = worker_count();
  const RawCorpus corpus = load_corpus(config, workers);
  const auto report = run_ablation(corpus, config, variants, workers, &log);
  const std::string table = format_table(report);
  log << table;
  const fs::path out = config.paths.output_dir;
  write_text(out / "ablation.md", table);
  write_text(out / "ablation.json", ablation_json(report));
  write_config(out / "ablation_config.ini", config);
  return report.determinism_ok ? 0 : 1;
}

int cmd_retarget(const CommandOptions& options, const fs::path& keypoint_file,
                 const std::optional<std::string>& instrument, std::ostream& log) {
  CommandOptions o = options;
  o.out.reset();
  PipelineConfig config = resolve_config(o);
  if (instrument) {
    config.retarget.instrument = retarget::parse_instrument(*instrument);
  }
  const auto clip = keypoints::read_keypoint_json(keypoint_file);
  const auto calibration = retarget::calibrate(clip.frames);
  const double width = clip.width > 0 ? clip.width : retarget::canvas_for(clip).width;
  const auto frames = retarget::retarget_clip(clip.frames, calibration, config.retarget, clip.fps, width,
                                              worker_count());
  fs::path out = options.out.value_or(fs::path(keypoint_file).replace_extension(".rig.ndjson"));
  if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  retarget::write_rig_stream(out, frames);
  std::size_t warned = 0;
  for (const auto& f : frames) {
    warned += f.warnings.empty() ? 0 : 1;
  }
  log << frames.size() << " rig frames (" << retarget::to_string(config.retarget.instrument) << "), " << warned
      << " with warnings -> " << out.string() << "\n";
  return 0;
}

int cmd_render(const fs::path& predictions, const std::optional<fs::path>& truth_file, const fs::path& out,
               std::ostream& log) {
  const auto predicted = keypoints::read_keypoint_json(predictions);
  std::size_t written = 0;
  if (truth_file) {
    const auto truth = keypoints::read_keypoint_json(*truth_file);
    const auto pairs = pair_by_frame_index(predicted, truth);
    written = retarget::render_frames(out, pairs.predicted, &pairs.truth, retarget::canvas_for(predicted, &truth));
  } else {
    written = retarget::render_frames(out, predicted.frames, nullptr, retarget::canvas_for(predicted));
  }
  log << "wrote " << written << " frames to " << out.string() << "\n";
  return 0;
}

int exit_code_for(const std::exception& error) {
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    return e->code() == ErrorCode::IoError || e->code() == ErrorCode::CorruptFile ? 2 : 1;
  }
  if (dynamic_cast<const fs::filesystem_error*>(&error) != nullptr) {
    return 2;
  }
  return 1;
}

}  // namespace a2p::pipeline
