// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rfood/binary_io.hpp"
#include "rfood/error.hpp"
#include "rfood/seed.hpp"

namespace rfood {

namespace {

// Caps C*H*W so that payload sizes cannot overflow or exhaust memory.
constexpr std::uint64_t kMaxFeatureElements = std::uint64_t{1} << 31;

bool channels_equal(const Tensor3& image) {
  const auto c0 = image.channel(0);
  for (std::size_t k = 1; k < image.channels(); ++k)
    if (!std::equal(c0.begin(), c0.end(), image.channel(k).begin())) return false;
  return true;
}

}  // namespace

std::string_view to_string(ExtractorKind kind) {
  return kind == ExtractorKind::ReferenceProjection ? "reference_projection" : "file_ingest";
}

ExtractorKind parse_extractor_kind(std::string_view name) {
  if (name == "reference_projection") return ExtractorKind::ReferenceProjection;
  if (name == "file_ingest") return ExtractorKind::FileIngest;
  throw ConfigError("unknown extractor kind '" + std::string(name) + "'");
}

void ExtractorSpec::validate() const {
  if (channels < 1) throw ConfigError("extractor: channels must be >= 1");
  if (height < 1 || width < 1) throw ConfigError("extractor: grid must be at least 1 x 1");
}

ExtractorSpec ExtractorSpec::mobilenet_preset() {
  ExtractorSpec spec;
  spec.channels = 1280;
  spec.height = 7;
  spec.width = 7;
  return spec;
}

ReferenceExtractor::ReferenceExtractor(const ExtractorSpec& spec, std::size_t image_height,
                                       std::size_t image_width)
    : spec_(spec), image_h_(image_height), image_w_(image_width) {
  spec_.validate();
  if (spec_.kind != ExtractorKind::ReferenceProjection)
    throw ConfigError("reference extractor requires kind reference_projection");
  if (image_h_ < spec_.height || image_w_ < spec_.width)
    throw DimensionError("image " + std::to_string(image_h_) + "x" + std::to_string(image_w_) +
                         " is smaller than the " + std::to_string(spec_.height) + "x" +
                         std::to_string(spec_.width) + " feature grid");
  cell_h_ = image_h_ / spec_.height;
  cell_w_ = image_w_ / spec_.width;
  const std::size_t plane = cell_h_ * cell_w_;
  templates_.reserve(spec_.channels);
  for (std::size_t k = 0; k < spec_.channels; ++k) {
    std::mt19937_64 rng(derive_seed(spec_.seed, {k, cell_h_, cell_w_}));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Tensor3 t(3, cell_h_, cell_w_);
    double norm2 = 0.0;
    for (auto& v : t.data()) {
      v = gauss(rng);
      norm2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<double> folded(plane, 0.0);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto ch = t.channel(c);
      for (std::size_t p = 0; p < plane; ++p) folded[p] += ch[p];
    }
    for (auto& v : folded) v *= inv;
    templates_.push_back(std::move(t));
    folded_.push_back(std::move(folded));
    inv_norms_.push_back(inv);
  }
}

FeatureTensor ReferenceExtractor::extract(const Tensor3& image) const {
  if (image.channels() != 3 || image.height() != image_h_ || image.width() != image_w_)
    throw DimensionError("extract: image shape does not match the extractor");
  const bool fold = channels_equal(image);
  FeatureTensor out{Tensor3(spec_.channels, spec_.height, spec_.width), kUnknownLabel};
  std::vector<double> patch(3 * cell_h_ * cell_w_);
  const std::size_t plane = cell_h_ * cell_w_;
  for (std::size_t ci = 0; ci < spec_.height; ++ci) {
    for (std::size_t cj = 0; cj < spec_.width; ++cj) {
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t r = 0; r < cell_h_; ++r)
          for (std::size_t s = 0; s < cell_w_; ++s)
            patch[c * plane + r * cell_w_ + s] = image(c, ci * cell_h_ + r, cj * cell_w_ + s);
      for (std::size_t k = 0; k < spec_.channels; ++k) {
        double acc = 0.0;
        if (fold) {
          const auto& f = folded_[k];
          for (std::size_t p = 0; p < plane; ++p) acc += patch[p] * f[p];
        } else {
          const auto& t = templates_[k].data();
          for (std::size_t p = 0; p < patch.size(); ++p) acc += patch[p] * t[p];
          acc *= inv_norms_[k];
        }
        out.values(k, ci, cj) = static_cast<double>(static_cast<float>(std::max(0.0, acc)));
      }
    }
  }
  return out;
}

FeatureTensor extract_reference(const Tensor3& image, const ExtractorSpec& spec) {
  return ReferenceExtractor(spec, image.height(), image.width()).extract(image);
}

std::string encode_features(const FeatureTensor& tensor) {
  const auto& v = tensor.values;
  if (v.channels() > std::numeric_limits<std::uint32_t>::max() ||
      v.height() > std::numeric_limits<std::uint32_t>::max() ||
      v.width() > std::numeric_limits<std::uint32_t>::max())
    throw DimensionError("feature dims exceed u32");
  ByteWriter w;
  w.magic("DFTF");
  w.u32(kFeatureFormatVersion);
  w.u32(static_cast<std::uint32_t>(v.channels()));
  w.u32(static_cast<std::uint32_t>(v.height()));
  w.u32(static_cast<std::uint32_t>(v.width()));
  w.i32(tensor.label);
  for (double x : v.data()) w.f32(static_cast<float>(x));
  return w.release();
}

FeatureTensor decode_features(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_magic("DFTF");
  const auto version = r.u32("version");
  if (version != kFeatureFormatVersion)
    throw ParseError("version: unsupported feature file version " + std::to_string(version));
  const std::uint64_t c = r.u32("C");
  const std::uint64_t h = r.u32("H");
  const std::uint64_t w = r.u32("W");
  const int label = r.i32("label");
  if (c == 0 || h == 0 || w == 0) throw ParseError("dims: zero-sized dimension");
  if (c * h > kMaxFeatureElements || c * h * w > kMaxFeatureElements)
    throw ParseError("dims: dim overflow (" + std::to_string(c) + "x" + std::to_string(h) +
                     "x" + std::to_string(w) + ")");
  const std::uint64_t n = c * h * w;
  if (r.remaining() != n * 4)
    throw ParseError("payload length mismatch: expected " + std::to_string(n * 4) +
                     " bytes, found " + std::to_string(r.remaining()));
  FeatureTensor t{Tensor3(c, h, w), label};
  for (auto& x : t.values.data()) {
    const float f = r.f32("payload");
    if (!std::isfinite(f)) throw ParseError("payload: non-finite feature value");
    x = f;
  }
  return t;
}

void write_features(const FeatureTensor& tensor, const std::filesystem::path& path) {
  write_file_atomic(path, encode_features(tensor));
}

FeatureTensor read_features(const std::filesystem::path& path) {
  try {
    return decode_features(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const FeatureManifest& manifest) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : manifest.files)
    files.push_back({{"path", f.path}, {"label", f.label}, {"split", to_string(f.split)}});
  return {{"files", std::move(files)}, {"class_names", manifest.class_names}};
}

FeatureManifest feature_manifest_from_json(const nlohmann::json& j) {
  FeatureManifest m;
  try {
    for (const auto& f : j.at("files")) {
      FeatureManifestEntry e;
      e.path = f.at("path").get<std::string>();
      e.label = f.at("label").get<int>();
      e.split = parse_split(f.at("split").get<std::string>());
      m.files.push_back(std::move(e));
    }
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("feature manifest: ") + ex.what());
  }
  return m;
}

FeatureManifest read_feature_manifest(const std::filesystem::path& path) {
  try {
    return feature_manifest_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError("feature manifest '" + path.string() + "': " + ex.what());
  }
}

void write_feature_manifest(const FeatureManifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(manifest).dump(2) + "\n");
}

}  // namespace rfood
