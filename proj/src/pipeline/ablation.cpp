#include "a2p/error.hpp"
#include "a2p/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace a2p::pipeline {

namespace {

const std::set<std::string> kValueKeys = {"pca_coeff", "dropout", "seq_length", "time_delay", "upsample",
                                          "data_fraction"};
const std::set<std::string> kFlagKeys = {"no_filtering", "interpolate_missing"};

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) {
      return x;
    }
  } catch (const std::exception&) {
  }
  fail(ErrorCode::InvalidInput, "variant " + key + ": '" + v + "' is not a number");
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  require(x == std::floor(x), ErrorCode::InvalidInput, "variant " + key + ": '" + v + "' is not an integer");
  return static_cast<int>(x);
}

bool is_ms(const std::string& v) { return v.size() > 2 && v.compare(v.size() - 2, 2, "ms") == 0; }

std::string trim_number(const std::string& v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", to_double("", v));
  return buf;
}

std::string label_for(const std::string& key, const std::string& value) {
  if (key == "pca_coeff") return "PCA coeff = " + value;
  if (key == "dropout") return "Dropout = " + trim_number(value);
  if (key == "seq_length") return "Seq. length = " + value;
  if (key == "upsample") return "Upsample " + value + "x";
  if (key == "data_fraction") return trim_number(std::to_string(to_double(key, value) * 100.0)) + "% training data";
  if (key == "no_filtering") return "Frames not dropped";
  if (key == "interpolate_missing") return "Interpolated missing data";
  // time_delay
  if (is_ms(value)) {
    const std::string ms = value.substr(0, value.size() - 2);
    return to_double(key, ms) == 0.0 ? "No time delay" : "Time delay = " + trim_number(ms) + " ms";
  }
  return to_int(key, value) == 0 ? "No time delay" : "Time delay = " + value + " ticks";
}

}  // namespace

std::string preparation_key(const PipelineConfig& c) {
  PipelineConfig k = c;
  k.profile = "";
  k.train = sequence::TrainConfig{};
  k.time_delay_ms.reset();
  k.retarget = retarget::RetargetConfig{};
  return to_ini(k);
}

namespace {

std::string cell(double v) {
  if (!std::isfinite(v)) {
    return "-";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

Variant parse_variant(const std::string& spec) {
  require(!spec.empty(), ErrorCode::InvalidInput, "empty variant");
  Variant v;
  v.spec = spec;
  std::stringstream ss(spec);
  std::string item;
  std::vector<std::string> labels;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    const std::string key = item.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : item.substr(eq + 1);
    if (kFlagKeys.count(key) != 0) {
      require(value.empty() || value == "true" || value == "1", ErrorCode::InvalidInput,
              "variant flag " + key + " takes no value");
    } else if (kValueKeys.count(key) != 0) {
      require(!value.empty(), ErrorCode::InvalidInput, "variant " + key + " needs a value");
      if (key == "time_delay") {
        is_ms(value) ? (void)to_double(key, value.substr(0, value.size() - 2)) : (void)to_int(key, value);
      } else if (key == "dropout" || key == "data_fraction") {
        to_double(key, value);
      } else {
        to_int(key, value);
      }
    } else {
      fail(ErrorCode::InvalidInput,
           "unknown variant key '" + key +
               "' (expected pca_coeff, dropout, seq_length, time_delay, upsample, data_fraction, "
               "no_filtering or interpolate_missing)");
    }
    v.settings.emplace_back(key, value);
    labels.push_back(label_for(key, value));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    v.label += (i > 0 ? ", " : "") + labels[i];
  }
  return v;
}

PipelineConfig apply_variant(const PipelineConfig& base, const Variant& variant) {
  PipelineConfig c = base;
  for (const auto& [key, value] : variant.settings) {
    if (key == "pca_coeff") {
      c.pca.fixed_k = to_int(key, value);
    } else if (key == "dropout") {
      c.train.dropout_rate = to_double(key, value);
    } else if (key == "seq_length") {
      c.train.bptt_steps = to_int(key, value);
    } else if (key == "time_delay") {
      if (is_ms(value)) {
        c.time_delay_ms = to_double(key, value.substr(0, value.size() - 2));
      } else {
        c.time_delay_ms.reset();
        c.train.time_delay = to_int(key, value);
      }
    } else if (key == "upsample") {
      c.upsample_factor = to_int(key, value);
    } else if (key == "data_fraction") {
      c.data_fraction = to_double(key, value);
    } else if (key == "no_filtering") {
      c.filter.enabled = false;
    } else if (key == "interpolate_missing") {
      c.filter.interpolate_missing = true;
    }
  }
  c.validate();
  return c;
}

AblationReport run_ablation(const RawCorpus& corpus, const PipelineConfig& base,
                            const std::vector<Variant>& variants, unsigned workers, std::ostream* progress) {
  std::vector<std::pair<Variant, PipelineConfig>> runs;
  for (const auto& v : variants) {
    runs.emplace_back(v, apply_variant(base, v));
  }
  base.validate();
  runs.emplace_back(Variant{"", "Baseline", {}}, base);

  std::map<std::string, std::shared_ptr<const PreparedDataset>> prepared;
  AblationReport report;
  for (const auto& [variant, config] : runs) {
    const std::string key = preparation_key(config);
    auto it = prepared.find(key);
    if (it == prepared.end()) {
      it = prepared.emplace(key, std::make_shared<const PreparedDataset>(prepare_dataset(corpus, config, workers)))
               .first;
    }
    // The dataset carries the training settings of whichever variant prepared it.
    const PreparedDataset* ds = it->second.get();
    std::unique_ptr<PreparedDataset> copy;
    if (to_ini(ds->config) != to_ini(config)) {
      copy = std::make_unique<PreparedDataset>(*ds);
      copy->config = config;
      ds = copy.get();
    }
    const auto run = train_and_evaluate(*ds, workers);
    AblationRow row{variant.label, variant.spec, run.errors, run.report.parameter_checksum};
    if (progress != nullptr) {
      *progress << row.label << ": train " << cell(row.errors.train) << " valid " << cell(row.errors.valid)
                << " test " << cell(row.errors.test) << std::endl;
    }
    report.rows.push_back(std::move(row));
  }

  // Repeated specs must reproduce bit for bit.
  std::map<std::string, std::size_t> first;
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    const auto [it, inserted] = first.emplace(row.spec, i);
    if (inserted) {
      continue;
    }
    const auto& ref = report.rows[it->second];
    const bool same = same_bits(ref.errors.train, row.errors.train) &&
                      same_bits(ref.errors.valid, row.errors.valid) &&
                      same_bits(ref.errors.test, row.errors.test) && ref.checksum == row.checksum;
    report.determinism_checked = true;
    report.determinism_ok = report.determinism_ok && same;
    report.notes.push_back("determinism check '" + row.spec + "': " + (same ? "identical" : "MISMATCH"));
  }
  return report;
}

std::string format_table(const AblationReport& report) {
  std::size_t width = 6;
  for (const auto& r : report.rows) {
    width = std::max(width, r.label.size());
  }
  std::ostringstream o;
  auto line = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
    o << "| " << a << std::string(width - a.size(), ' ') << " | " << std::string(6 - std::min<std::size_t>(6, b.size()), ' ')
      << b << " | " << std::string(6 - std::min<std::size_t>(6, c.size()), ' ') << c << " | "
      << std::string(6 - std::min<std::size_t>(6, d.size()), ' ') << d << " |\n";
  };
  line("Method", "Train", "Valid", "Test");
  o << "|" << std::string(width + 2, '-') << "|--------|--------|--------|\n";
  for (const auto& r : report.rows) {
    line(r.label, cell(r.errors.train), cell(r.errors.valid), cell(r.errors.test));
  }
  o << "Errors in pixels (lower is better).\n";
  for (const auto& n : report.notes) {
    o << n << "\n";
  }
  return o.str();
}

std::string ablation_json(const AblationReport& report) {
  nlohmann::ordered_json j;
  j["units"] = "pixels";
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.label},
                    {"spec", r.spec},
                    {"train", number(r.errors.train)},
                    {"valid", number(r.errors.valid)},
                    {"test", number(r.errors.test)},
                    {"parameter_checksum", r.checksum}});
  }
  j["rows"] = rows;
  j["determinism_checked"] = report.determinism_checked;
  j["determinism_ok"] = report.determinism_ok;
  j["notes"] = report.notes;
  return j.dump(2) + "\n";
}

}  // namespace a2p::pipeline
