#include "a2p/binary_io.hpp"
#include "a2p/error.hpp"
#include "a2p/predict.hpp"

#include <json.hpp>

#include <cmath>

namespace a2p::sequence {

namespace {

nlohmann::ordered_json config_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["hidden_dim"] = c.hidden_dim;
  j["bptt_steps"] = c.bptt_steps;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["dropout_rate"] = c.dropout_rate;
  j["epochs"] = c.epochs;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["time_delay"] = c.time_delay;
  j["delay_source"] = c.delay_source;
  j["clip_norm"] = c.clip_norm;
  return j;
}

// NaN is not representable in JSON.
nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

void encode_config(BinaryWriter& w, const TrainConfig& c) {
  w.u32(static_cast<std::uint32_t>(c.hidden_dim));
  w.u32(static_cast<std::uint32_t>(c.bptt_steps));
  w.u32(static_cast<std::uint32_t>(c.batch_size));
  w.f64(c.learning_rate);
  w.f64(c.dropout_rate);
  w.u32(static_cast<std::uint32_t>(c.epochs));
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.epsilon);
  w.u64(c.seed);
  w.u32(static_cast<std::uint32_t>(c.time_delay));
  w.str(c.delay_source);
  w.f64(c.clip_norm);
}

TrainConfig decode_config(BinaryReader& r) {
  TrainConfig c;
  c.hidden_dim = static_cast<int>(r.u32());
  c.bptt_steps = static_cast<int>(r.u32());
  c.batch_size = static_cast<int>(r.u32());
  c.learning_rate = r.f64();
  c.dropout_rate = r.f64();
  c.epochs = static_cast<int>(r.u32());
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.epsilon = r.f64();
  c.seed = r.u64();
  c.time_delay = static_cast<int>(r.u32());
  c.delay_source = r.str();
  c.clip_norm = r.f64();
  return c;
}

}  // namespace

void write_network(const std::filesystem::path& path, const NetworkBundle& bundle) {
  const auto& net = bundle.network;
  BinaryWriter body;
  body.u32(static_cast<std::uint32_t>(net.input_dim()));
  body.u32(static_cast<std::uint32_t>(net.hidden_dim()));
  body.u32(static_cast<std::uint32_t>(net.output_dim()));
  body.u32(static_cast<std::uint32_t>(net.time_delay()));
  body.u32(static_cast<std::uint32_t>(bundle.upsample_factor));
  body.f64(bundle.features.video_fps);
  body.f64(bundle.features.window_ms);
  body.u32(static_cast<std::uint32_t>(bundle.features.num_mel_filters));
  body.u32(static_cast<std::uint32_t>(bundle.features.num_ceps));
  body.f64(bundle.features.log_floor);
  body.vector(net.parameters());
  encode_config(body, bundle.config);
  body.u8(bundle.motion ? 1 : 0);
  if (bundle.motion) {
    keypoints::encode_motion_model(body, *bundle.motion);
  }

  BinaryWriter w;
  w.magic("A2PN");
  w.u32(kNetworkFileVersion);
  w.u32(crc32_of(body.bytes()));
  write_file_bytes(path, w.bytes() + body.bytes());
}

NetworkBundle read_network(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  BinaryReader header(bytes);
  header.expect_magic("A2PN");
  const auto version = header.u32();
  require(version == kNetworkFileVersion, ErrorCode::CorruptFile,
          "unsupported network file version " + std::to_string(version));
  const auto crc = header.u32();
  const std::string_view body = std::string_view(bytes).substr(header.position());
  require(crc32_of(body) == crc, ErrorCode::CorruptFile,
          path.string() + ": checksum mismatch, model file is corrupt");

  BinaryReader r(body);
  const int in = static_cast<int>(r.u32());
  const int hidden = static_cast<int>(r.u32());
  const int out = static_cast<int>(r.u32());
  const int delay = static_cast<int>(r.u32());
  NetworkBundle bundle;
  bundle.upsample_factor = static_cast<int>(r.u32());
  bundle.features.video_fps = r.f64();
  bundle.features.window_ms = r.f64();
  bundle.features.num_mel_filters = static_cast<int>(r.u32());
  bundle.features.num_ceps = static_cast<int>(r.u32());
  bundle.features.log_floor = r.f64();
  require(bundle.upsample_factor >= 1 && bundle.features.video_fps > 0.0, ErrorCode::CorruptFile,
          "invalid rates in network file");
  bundle.network = LstmModel(in, hidden, out, delay);
  Eigen::VectorXd params = r.vector();
  require(params.size() == bundle.network.parameters().size(), ErrorCode::CorruptFile,
          "parameter count does not match the dimensions");
  bundle.network.parameters() = std::move(params);
  bundle.config = decode_config(r);
  if (r.u8() != 0) {
    bundle.motion = keypoints::decode_motion_model(r);
    require(bundle.motion->pca.modes() == out, ErrorCode::CorruptFile,
            "attached PCA model does not match the network output");
  }
  return bundle;
}

std::string network_sidecar_json(const NetworkBundle& bundle, const TrainReport* report) {
  nlohmann::ordered_json j;
  j["format"] = "A2PN";
  j["version"] = kNetworkFileVersion;
  j["input_dim"] = bundle.network.input_dim();
  j["hidden_dim"] = bundle.network.hidden_dim();
  j["output_dim"] = bundle.network.output_dim();
  j["time_delay_ticks"] = bundle.network.time_delay();
  j["upsample_factor"] = bundle.upsample_factor;
  j["video_fps"] = bundle.features.video_fps;
  j["window_ms"] = bundle.features.window_ms;
  j["tick_rate"] = bundle.tick_rate();
  j["loss"] = "mse_standardized_pca";
  j["train_config"] = config_json(bundle.config);
  if (report != nullptr) {
    j["best_epoch"] = report->best_epoch;
    j["epochs_run"] = report->epochs.size();
    j["final_train_pixel_error"] = number(report->final_train_pixel_error);
    j["final_valid_pixel_error"] = number(report->final_valid_pixel_error);
    j["parameter_checksum"] = report->parameter_checksum;
    j["clip_norm"] = report->clip_norm;
    j["delay_source"] = report->delay_source;
  }
  return j.dump(2);
}

std::string train_log_line(const EpochRecord& record) {
  nlohmann::ordered_json j;
  j["epoch"] = record.epoch;
  j["train_loss"] = number(record.train_loss);
  j["valid_loss"] = number(record.valid_loss);
  j["pixel_error"] = number(record.pixel_error);
  j["seconds"] = record.seconds;
  return j.dump();
}

}  // namespace a2p::sequence
