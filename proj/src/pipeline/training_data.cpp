#include "a2p/pipeline.hpp"

#include <algorithm>

namespace a2p::pipeline {

sequence::TrainingData build_training_data(const PreparedDataset& ds) {
  const int factor = ds.config.upsample_factor;
  sequence::TrainingData data;
  data.motion = ds.motion;
  for (const auto& clip : ds.clips) {
    if (clip.test) {
      continue;
    }
    const Eigen::MatrixXd inputs =
        keypoints::standardize(sequence::upsample_features(clip.features.matrix(), factor), ds.motion.input_stats);
    Eigen::MatrixXd targets = keypoints::standardize(clip.coefficients, ds.motion.output_stats);
    for (Eigen::Index t = 0; t < targets.cols(); ++t) {
      if (clip.tick_valid[static_cast<std::size_t>(t)] == 0) {
        targets.col(t).setZero();
      }
    }
    for (std::size_t c = 0; c < clip.chunks.size(); ++c) {
      const auto& chunk = clip.chunks[c];
      if (chunk.split != Split::Train && chunk.split != Split::Valid) {
        continue;
      }
      const auto s = static_cast<Eigen::Index>(chunk.start_frame) * factor;
      const auto n = static_cast<Eigen::Index>(chunk.end_frame - chunk.start_frame) * factor;
      sequence::Sequence seq;
      seq.id = clip.id + "#" + std::to_string(c);
      seq.inputs = inputs.middleCols(s, n);
      seq.targets = targets.middleCols(s, n);
      seq.valid.assign(clip.tick_valid.begin() + s, clip.tick_valid.begin() + s + n);
      if (std::none_of(seq.valid.begin(), seq.valid.end(), [](std::uint8_t v) { return v != 0; })) {
        continue;
      }
      (chunk.split == Split::Train ? data.train : data.valid).push_back(std::move(seq));
    }
  }
  return data;
}

sequence::NetworkBundle make_bundle(const sequence::LstmModel& model, const PreparedDataset& ds) {
  sequence::NetworkBundle b;
  b.network = model;
  b.motion = ds.motion;
  b.upsample_factor = ds.config.upsample_factor;
  b.features = ds.config.features;
  b.config = ds.config.resolved_train();
  return b;
}

TrainedRun train_and_evaluate(const PreparedDataset& ds, unsigned workers) {
  const auto config = ds.config.resolved_train();
  const auto data = build_training_data(ds);
  const auto initial = sequence::LstmModel::initialize(audio::kFeatureDim, config.hidden_dim,
                                                       ds.motion.pca.modes(), config.time_delay, config.seed);
  auto result = sequence::train(data, initial, config);
  TrainedRun run;
  run.bundle = make_bundle(result.model, ds);
  run.report = std::move(result.report);
  run.errors = evaluate_splits(run.bundle, ds, workers);
  return run;
}

}  // namespace a2p::pipeline
