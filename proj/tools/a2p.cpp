// Command-line front end: prepare, train, predict, evaluate, ablate, retarget, render.

#include "a2p/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace a2p::pipeline;

namespace {

void add_common(CLI::App* cmd, std::string& config, std::string& profile, std::uint64_t& seed,
                std::string& out) {
  cmd->add_option("--config", config, "INI configuration file");
  cmd->add_option("--profile", profile, "Named preset: default, violin-final, piano-final");
  cmd->add_option("--seed", seed, "Random seed");
  cmd->add_option("--out", out, "Output location");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio-to-pose: learn keypoint motion from music and retarget it onto an avatar rig"};
  app.require_subcommand(1);

  CommandOptions options;
  std::string config;
  std::string profile;
  std::uint64_t seed = 0;
  std::string out;

  auto* prepare = app.add_subcommand("prepare", "Extract features, filter and align keypoints, fit PCA");
  add_common(prepare, config, profile, seed, out);

  std::string data_dir;
  auto* train = app.add_subcommand("train", "Train the LSTM on a prepared dataset");
  add_common(train, config, profile, seed, out);
  train->add_option("--data", data_dir, "Prepared dataset directory (default: paths.output_dir)");

  std::string model;
  std::string audio;
  auto* predict = app.add_subcommand("predict", "Predict keypoints from an audio file");
  predict->add_option("model", model, "Model file (.a2pn)")->required();
  predict->add_option("audio", audio, "WAV file")->required();
  predict->add_option("--out", out, "Output keypoint JSON")->required();

  std::string predictions;
  std::string truth;
  auto* evaluate = app.add_subcommand("evaluate", "Pixel error of predictions against ground truth");
  evaluate->add_option("predictions", predictions, "Predicted keypoint JSON")->required();
  evaluate->add_option("truth", truth, "Ground-truth keypoint JSON")->required();
  evaluate->add_option("--out", out, "Report JSON");

  std::vector<std::string> variants;
  auto* ablate = app.add_subcommand("ablate", "Train variants and print the Train/Valid/Test error table");
  add_common(ablate, config, profile, seed, out);
  ablate->add_option("variants", variants, "Variant specs, e.g. pca_coeff=5 dropout=0 no_filtering");

  std::string keypoint_file;
  std::string instrument;
  auto* retarget_cmd = app.add_subcommand("retarget", "Convert keypoints into an avatar rig stream");
  add_common(retarget_cmd, config, profile, seed, out);
  retarget_cmd->add_option("keypoints", keypoint_file, "Keypoint JSON")->required();
  retarget_cmd->add_option("--instrument", instrument, "none, piano or violin");

  auto* render = app.add_subcommand("render", "Write SVG frames (predicted green over ground truth red)");
  render->add_option("predictions", predictions, "Keypoint JSON")->required();
  render->add_option("--truth", truth, "Ground-truth keypoint JSON");
  render->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto opt_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
  if (!config.empty()) options.config_file = config;
  if (!profile.empty()) options.profile = profile;
  for (auto* cmd : {prepare, train, ablate, retarget_cmd}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) {
      options.seed = seed;
    }
  }
  options.out = opt_path(out);

  try {
    if (prepare->parsed()) return cmd_prepare(options, std::cout);
    if (train->parsed()) return cmd_train(options, opt_path(data_dir), std::cout);
    if (predict->parsed()) return cmd_predict(model, audio, out, std::cout);
    if (evaluate->parsed()) return cmd_evaluate(predictions, truth, opt_path(out), std::cout);
    if (ablate->parsed()) return cmd_ablate(options, variants, std::cout);
    if (retarget_cmd->parsed()) {
      return cmd_retarget(options, keypoint_file,
                          instrument.empty() ? std::nullopt : std::optional<std::string>(instrument), std::cout);
    }
    if (render->parsed()) return cmd_render(predictions, opt_path(truth), out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}
