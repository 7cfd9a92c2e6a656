// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Calibration artifact container:
//   "DCAL" | u32 version | u32 section count |
//   per section: u32 name length | name | u64 payload length | payload
// Sections, in order: meta (JSON), selection (f32), head (f32),
// normalizer (f64: mu_energy, sigma_energy, mu_grad, sigma_grad, gamma).

#include <cmath>
#include <map>
#include <string>

#include "rfood/binary_io.hpp"
#include "rfood/error.hpp"
#include "rfood/scoring.hpp"

namespace rfood {

namespace {

const char* const kSectionNames[] = {"meta", "selection", "head", "normalizer"};

void put_f32(ByteWriter& w, const std::vector<double>& values) {
  for (double v : values) w.f32(static_cast<float>(v));
}

std::vector<double> get_f32(ByteReader& r, std::size_t n, std::string_view field) {
  std::vector<double> out(n);
  for (auto& v : out) v = r.f32(field);
  return out;
}

std::size_t spatial_means_count(const CalibrationArtifact& a) {
  return a.variant == SelectionVariant::Full || a.variant == SelectionVariant::SpatialOnly
             ? a.head.classes() * a.height * a.width
             : 0;
}

std::size_t channel_means_count(const CalibrationArtifact& a) {
  return a.variant == SelectionVariant::Full || a.variant == SelectionVariant::ChannelOnly
             ? a.head.classes() * a.channels
             : 0;
}

nlohmann::json meta_json(const CalibrationArtifact& a) {
  nlohmann::json m;
  m["format"] = "rfood-calibration";
  m["version"] = a.version;
  m["dims"] = {a.channels, a.height, a.width};
  m["n_classes"] = a.head.classes();
  m["alpha"] = a.selection.alpha;
  m["beta"] = a.selection.beta;
  m["epsilon"] = a.selection.epsilon;
  m["sim_mode"] = to_string(a.selection.sim_mode);
  m["variant"] = to_string(a.variant);
  m["lambda"] = a.fusion.lambda;
  m["grad_mode"] = to_string(a.fusion.grad_mode);
  m["score_mode"] = to_string(a.score_mode);
  m["retention"] = a.retention;
  m["gamma"] = a.gamma;
  m["train"] = {{"learning_rate", a.train.learning_rate},
                {"epochs", a.train.epochs},
                {"l2", a.train.l2},
                {"seed", a.train.seed},
                {"standardize", a.train.standardize}};
  m["seeds"] = a.seeds;
  return m;
}

void check_size(std::size_t n, std::size_t expected, std::string_view what) {
  if (n != expected)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(expected) +
                         " values, have " + std::to_string(n));
}

}  // namespace

std::string encode_artifact(const CalibrationArtifact& a) {
  if (!a.fitted) throw Error("encode_artifact: artifact is not fitted");
  check_size(a.weights.spatial.size(), a.height * a.width, "spatial weights");
  check_size(a.weights.channel.size(), a.channels, "channel weights");
  check_size(a.head.inputs(), a.channels, "head inputs");

  ByteWriter meta;
  meta.bytes(meta_json(a).dump());

  ByteWriter sel;
  put_f32(sel, a.weights.spatial.data());
  put_f32(sel, a.weights.channel);
  std::size_t n_spatial_means = 0;
  for (const auto& m : a.spatial_class_means) {
    put_f32(sel, m.data());
    n_spatial_means += m.size();
  }
  check_size(n_spatial_means, spatial_means_count(a), "spatial class means");
  check_size(a.channel_class_means.size(), channel_means_count(a), "channel class means");
  put_f32(sel, a.channel_class_means.data());

  ByteWriter head;
  put_f32(head, a.head.weights.data());
  put_f32(head, a.head.bias);

  ByteWriter norm;
  norm.f64(a.normalizer.mu_energy);
  norm.f64(a.normalizer.sigma_energy);
  norm.f64(a.normalizer.mu_grad);
  norm.f64(a.normalizer.sigma_grad);
  norm.f64(a.gamma);

  const std::string* payloads[] = {&meta.buffer(), &sel.buffer(), &head.buffer(), &norm.buffer()};
  ByteWriter w;
  w.magic("DCAL");
  w.u32(a.version);
  w.u32(4);
  for (int i = 0; i < 4; ++i) {
    const std::string name = kSectionNames[i];
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u64(payloads[i]->size());
    w.bytes(*payloads[i]);
  }
  return w.release();
}

CalibrationArtifact decode_artifact(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("DCAL");
  CalibrationArtifact a;
  a.version = r.u32("version");
  if (a.version != kArtifactVersion)
    throw ParseError("version: unsupported artifact version " + std::to_string(a.version));
  const auto count = r.u32("section count");
  std::map<std::string, std::string_view> sections;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.u32("section name length");
    if (name_len > 64) throw ParseError("section name length: too long");
    std::string name(r.bytes(name_len, "section name"));
    const auto len = r.u64("section '" + name + "' length");
    if (len > r.remaining())
      throw ParseError("section '" + name + "': payload length mismatch");
    sections[name] = r.bytes(len, name);
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after last section");
  for (const char* name : kSectionNames)
    if (!sections.count(name)) throw ParseError(std::string("missing section '") + name + "'");

  try {
    const auto m = nlohmann::json::parse(sections["meta"]);
    const auto dims = m.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 3) throw ParseError("meta.dims: expected 3 entries");
    a.channels = dims[0];
    a.height = dims[1];
    a.width = dims[2];
    const auto n_cls = m.at("n_classes").get<std::size_t>();
    if (a.channels == 0 || a.height == 0 || a.width == 0 || n_cls < 2 ||
        a.channels > (1u << 24) || a.height * a.width > (1u << 24) || n_cls > (1u << 16))
      throw ParseError("meta.dims: invalid dimensions");
    a.selection.alpha = m.at("alpha").get<double>();
    a.selection.beta = m.at("beta").get<double>();
    a.selection.epsilon = m.at("epsilon").get<double>();
    a.selection.sim_mode = parse_sim_mode(m.at("sim_mode").get<std::string>());
    a.variant = parse_selection_variant(m.at("variant").get<std::string>());
    a.fusion.lambda = m.at("lambda").get<double>();
    a.fusion.grad_mode = parse_grad_mode(m.at("grad_mode").get<std::string>());
    a.score_mode = parse_score_mode(m.at("score_mode").get<std::string>());
    a.retention = m.at("retention").get<double>();
    const auto& t = m.at("train");
    a.train.learning_rate = t.at("learning_rate").get<double>();
    a.train.epochs = t.at("epochs").get<std::size_t>();
    a.train.l2 = t.at("l2").get<double>();
    a.train.seed = t.at("seed").get<std::uint64_t>();
    a.train.standardize = t.at("standardize").get<bool>();
    a.seeds = m.at("seeds");
    a.head.weights = Matrix(n_cls, a.channels);
    a.head.bias.resize(n_cls);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("meta: ") + ex.what());
  } catch (const ConfigError& ex) {
    throw ParseError(std::string("meta: ") + ex.what());
  }

  const std::size_t n_cls = a.head.classes();
  {
    ByteReader s(sections["selection"]);
    const std::size_t hw = a.height * a.width;
    const std::size_t expected =
        (hw + a.channels + spatial_means_count(a) + channel_means_count(a)) * 4;
    if (s.remaining() != expected)
      throw ParseError("section 'selection': payload length mismatch");
    a.weights.spatial = Matrix(a.height, a.width, get_f32(s, hw, "selection.spatial"));
    a.weights.channel = get_f32(s, a.channels, "selection.channel");
    if (spatial_means_count(a) > 0)
      for (std::size_t c = 0; c < n_cls; ++c)
        a.spatial_class_means.emplace_back(a.height, a.width,
                                           get_f32(s, hw, "selection.spatial_class_means"));
    if (channel_means_count(a) > 0)
      a.channel_class_means =
          Matrix(n_cls, a.channels, get_f32(s, n_cls * a.channels, "selection.channel_class_means"));
  }
  {
    ByteReader h(sections["head"]);
    if (h.remaining() != (n_cls * a.channels + n_cls) * 4)
      throw ParseError("section 'head': payload length mismatch");
    a.head.weights = Matrix(n_cls, a.channels, get_f32(h, n_cls * a.channels, "head.weights"));
    a.head.bias = get_f32(h, n_cls, "head.bias");
  }
  {
    ByteReader n(sections["normalizer"]);
    if (n.remaining() != 5 * 8) throw ParseError("section 'normalizer': payload length mismatch");
    a.normalizer.mu_energy = n.f64("normalizer.mu_energy");
    a.normalizer.sigma_energy = n.f64("normalizer.sigma_energy");
    a.normalizer.mu_grad = n.f64("normalizer.mu_grad");
    a.normalizer.sigma_grad = n.f64("normalizer.sigma_grad");
    a.gamma = n.f64("normalizer.gamma");
  }
  a.fitted = true;
  return a;
}

void write_artifact(const CalibrationArtifact& artifact, const std::filesystem::path& path) {
  write_file_atomic(path, encode_artifact(artifact));
}

CalibrationArtifact read_artifact(const std::filesystem::path& path) {
  try {
    return decode_artifact(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace rfood
