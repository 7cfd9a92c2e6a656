// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rfood/dataset.hpp"
#include "rfood/tensor.hpp"

namespace rfood {

inline constexpr int kUnknownLabel = -1;
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

// C_s x H_s x W_s feature map of one sample.
struct FeatureTensor {
  Tensor3 values;
  int label = kUnknownLabel;

  std::size_t channels() const { return values.channels(); }
  std::size_t height() const { return values.height(); }
  std::size_t width() const { return values.width(); }
};

enum class ExtractorKind { ReferenceProjection, FileIngest };

std::string_view to_string(ExtractorKind kind);
ExtractorKind parse_extractor_kind(std::string_view name);

struct ExtractorSpec {
  ExtractorKind kind = ExtractorKind::ReferenceProjection;
  std::size_t channels = 64;
  std::size_t height = 7;
  std::size_t width = 7;
  std::uint64_t seed = 7;

  void validate() const;

  // 1280 x 7 x 7, the shape of MobileNetV2's last feature map.
  static ExtractorSpec mobilenet_preset();
};

// Random-template patch projection. The image is cut into a height x width
// grid of equal cells of floor(H / height) x floor(W / width) pixels (trailing
// rows and columns that do not fill a cell are ignored). Channel k at cell
// (i, j) is max(0, <patch, T_k> / |T_k|) for a seeded Gaussian template T_k
// shaped like the patch. Outputs are rounded to float precision so that they
// survive the feature file format unchanged.
class ReferenceExtractor {
 public:
  ReferenceExtractor(const ExtractorSpec& spec, std::size_t image_height,
                     std::size_t image_width);

  FeatureTensor extract(const Tensor3& image) const;

  std::size_t cell_height() const { return cell_h_; }
  std::size_t cell_width() const { return cell_w_; }
  // 3 x cell_height x cell_width template of channel k.
  const Tensor3& template_for(std::size_t k) const { return templates_[k]; }

 private:
  ExtractorSpec spec_;
  std::size_t image_h_;
  std::size_t image_w_;
  std::size_t cell_h_;
  std::size_t cell_w_;
  std::vector<Tensor3> templates_;
  // Sum of the three template planes, scaled by 1/|T_k|; used when all image
  // channels are equal.
  std::vector<std::vector<double>> folded_;
  std::vector<double> inv_norms_;
};

FeatureTensor extract_reference(const Tensor3& image, const ExtractorSpec& spec);

// "DFTF" feature file. Values are stored as f32.
std::string encode_features(const FeatureTensor& tensor);
FeatureTensor decode_features(std::string_view bytes);
void write_features(const FeatureTensor& tensor, const std::filesystem::path& path);
FeatureTensor read_features(const std::filesystem::path& path);

struct FeatureManifestEntry {
  std::string path;
  int label = kUnknownLabel;
  Split split = Split::Test;
};

struct FeatureManifest {
  std::vector<FeatureManifestEntry> files;
  std::vector<std::string> class_names;
};

nlohmann::json to_json(const FeatureManifest& manifest);
FeatureManifest feature_manifest_from_json(const nlohmann::json& j);
FeatureManifest read_feature_manifest(const std::filesystem::path& path);
void write_feature_manifest(const FeatureManifest& manifest, const std::filesystem::path& path);

}  // namespace rfood
