// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/run_config.hpp"

#include <initializer_list>
#include <string>

#include "rfood/binary_io.hpp"
#include "rfood/error.hpp"

namespace rfood {

namespace {

using nlohmann::json;

void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
}

void reject_unknown(const json& j, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& j, std::string_view key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": wrong type");
  }
}

ProtocolSpec parse_protocol(const json& j) {
  reject_unknown(j, "synth.classes[]", {"hop_frequencies", "burst_len", "gap_len", "amplitude"});
  ProtocolSpec p;
  read(j, "hop_frequencies", p.hop_frequencies, "synth.classes[]");
  read(j, "burst_len", p.burst_len, "synth.classes[]");
  read(j, "gap_len", p.gap_len, "synth.classes[]");
  read(j, "amplitude", p.amplitude, "synth.classes[]");
  return p;
}

void parse_synth(const json& j, SynthConfig& s) {
  reject_unknown(j, "synth", {"classes", "ood_kinds", "records_per_class", "records_per_ood_kind",
                              "length", "snr_db", "split", "seed"});
  if (j.contains("classes")) {
    if (!j["classes"].is_array()) throw ConfigError("synth.classes: expected an array");
    s.classes.clear();
    for (const auto& c : j["classes"]) s.classes.push_back(parse_protocol(c));
  }
  if (j.contains("ood_kinds")) {
    std::vector<std::string> names;
    read(j, "ood_kinds", names, "synth");
    s.ood_kinds.clear();
    for (const auto& n : names) s.ood_kinds.push_back(parse_ood_kind(n));
  }
  read(j, "records_per_class", s.records_per_class, "synth");
  read(j, "records_per_ood_kind", s.records_per_ood_kind, "synth");
  read(j, "length", s.length, "synth");
  read(j, "snr_db", s.snr_db, "synth");
  read(j, "seed", s.seed, "synth");
  if (j.contains("split")) {
    reject_unknown(j["split"], "synth.split", {"train", "val", "test"});
    read(j["split"], "train", s.split.train, "synth.split");
    read(j["split"], "val", s.split.val, "synth.split");
    read(j["split"], "test", s.split.test, "synth.split");
  }
}

std::string read_string(const json& j, std::string_view key, std::string fallback,
                        std::string_view where) {
  read(j, key, fallback, where);
  return fallback;
}

}  // namespace

void RunConfig::validate() const {
  synth.validate();
  pipeline.validate();
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j, "config", {"synth", "stft", "extractor", "selection", "train", "fusion",
                               "retention", "variant", "positive_class", "energy_axis"});
  RunConfig c;
  auto& p = c.pipeline;
  if (j.contains("synth")) parse_synth(j["synth"], c.synth);
  if (j.contains("stft")) {
    const auto& s = j["stft"];
    reject_unknown(s, "stft", {"fft_size", "hop", "window", "scale"});
    read(s, "fft_size", p.stft.fft_size, "stft");
    read(s, "hop", p.stft.hop, "stft");
    p.stft.window = parse_window(read_string(s, "window", "hann", "stft"));
    p.stft.scale = parse_magnitude_scale(read_string(s, "scale", "linear", "stft"));
  }
  if (j.contains("extractor")) {
    const auto& e = j["extractor"];
    reject_unknown(e, "extractor", {"kind", "channels", "height", "width", "seed"});
    p.extractor.kind =
        parse_extractor_kind(read_string(e, "kind", "reference_projection", "extractor"));
    read(e, "channels", p.extractor.channels, "extractor");
    read(e, "height", p.extractor.height, "extractor");
    read(e, "width", p.extractor.width, "extractor");
    read(e, "seed", p.extractor.seed, "extractor");
  }
  if (j.contains("selection")) {
    const auto& s = j["selection"];
    reject_unknown(s, "selection", {"alpha", "beta", "sim_mode", "epsilon"});
    read(s, "alpha", p.selection.alpha, "selection");
    read(s, "beta", p.selection.beta, "selection");
    read(s, "epsilon", p.selection.epsilon, "selection");
    p.selection.sim_mode = parse_sim_mode(read_string(s, "sim_mode", "profile", "selection"));
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    reject_unknown(t, "train", {"learning_rate", "epochs", "l2", "seed", "standardize"});
    read(t, "learning_rate", p.train.learning_rate, "train");
    read(t, "epochs", p.train.epochs, "train");
    read(t, "l2", p.train.l2, "train");
    read(t, "seed", p.train.seed, "train");
    read(t, "standardize", p.train.standardize, "train");
  }
  if (j.contains("fusion")) {
    const auto& f = j["fusion"];
    reject_unknown(f, "fusion", {"lambda", "grad_mode"});
    read(f, "lambda", p.fusion.lambda, "fusion");
    p.fusion.grad_mode = parse_grad_mode(read_string(f, "grad_mode", "max_logit", "fusion"));
  }
  read(j, "retention", p.retention, "config");
  p.variant = parse_variant(read_string(j, "variant", "full", "config"));
  const auto positive = read_string(j, "positive_class", "id", "config");
  if (positive != "id" && positive != "ood")
    throw ConfigError("positive_class must be 'id' or 'ood'");
  p.id_positive = positive == "id";
  const auto axis = read_string(j, "energy_axis", "literal", "config");
  if (axis != "literal" && axis != "transposed")
    throw ConfigError("energy_axis must be 'literal' or 'transposed'");
  p.energy_axis = axis == "literal" ? EnergyAxis::Literal : EnergyAxis::Transposed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& ex) {
    throw ConfigError("config '" + path.string() + "': " + ex.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  const auto& s = c.synth;
  const auto& p = c.pipeline;
  json classes = json::array();
  for (const auto& k : s.classes)
    classes.push_back({{"hop_frequencies", k.hop_frequencies},
                       {"burst_len", k.burst_len},
                       {"gap_len", k.gap_len},
                       {"amplitude", k.amplitude}});
  json kinds = json::array();
  for (auto k : s.ood_kinds) kinds.push_back(to_string(k));
  return {
      {"synth",
       {{"classes", classes},
        {"ood_kinds", kinds},
        {"records_per_class", s.records_per_class},
        {"records_per_ood_kind", s.records_per_ood_kind},
        {"length", s.length},
        {"snr_db", s.snr_db},
        {"split", {{"train", s.split.train}, {"val", s.split.val}, {"test", s.split.test}}},
        {"seed", s.seed}}},
      {"stft",
       {{"fft_size", p.stft.fft_size},
        {"hop", p.stft.hop},
        {"window", to_string(p.stft.window)},
        {"scale", to_string(p.stft.scale)}}},
      {"extractor",
       {{"kind", to_string(p.extractor.kind)},
        {"channels", p.extractor.channels},
        {"height", p.extractor.height},
        {"width", p.extractor.width},
        {"seed", p.extractor.seed}}},
      {"selection",
       {{"alpha", p.selection.alpha},
        {"beta", p.selection.beta},
        {"sim_mode", to_string(p.selection.sim_mode)},
        {"epsilon", p.selection.epsilon}}},
      {"train",
       {{"learning_rate", p.train.learning_rate},
        {"epochs", p.train.epochs},
        {"l2", p.train.l2},
        {"seed", p.train.seed},
        {"standardize", p.train.standardize}}},
      {"fusion", {{"lambda", p.fusion.lambda}, {"grad_mode", to_string(p.fusion.grad_mode)}}},
      {"retention", p.retention},
      {"variant", to_string(p.variant)},
      {"positive_class", p.id_positive ? "id" : "ood"},
      {"energy_axis", p.energy_axis == EnergyAxis::Literal ? "literal" : "transposed"}};
}

json seeds_json(const RunConfig& c) {
  return {{"data", c.synth.seed},
          {"extractor", c.pipeline.extractor.seed},
          {"train", c.pipeline.train.seed}};
}

}  // namespace rfood
