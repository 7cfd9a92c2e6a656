// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "rfood/binary_io.hpp"
#include "rfood/error.hpp"
#include "rfood/tfi.hpp"

namespace rfood {

void write_png(const Tensor3& image, const std::filesystem::path& path) {
  if (image.channels() != 3) throw DimensionError("write_png: image must have 3 channels");
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  std::vector<std::uint8_t> pixels(h * w * 3);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        pixels[(i * w + j) * 3 + k] = static_cast<std::uint8_t>(
            std::lround(std::clamp(image(k, i, j), 0.0, 1.0) * 255.0));

  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(w);
  png.height = static_cast<png_uint_32>(h);
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels.data(), 0, nullptr))
    throw Error(std::string("write_png: ") + png.message);
  std::string bytes(size, '\0');
  if (!png_image_write_to_memory(&png, bytes.data(), &size, 0, pixels.data(), 0, nullptr))
    throw Error(std::string("write_png: ") + png.message);
  bytes.resize(size);
  write_file_atomic(path, bytes);
}

Tensor3 read_png(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    throw ParseError("read_png '" + path.string() + "': " + png.message);
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr))
    throw ParseError("read_png '" + path.string() + "': " + png.message);
  const std::size_t h = png.height;
  const std::size_t w = png.width;
  Tensor3 image(3, h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        image(k, i, j) = pixels[(i * w + j) * 3 + k] / 255.0;
  return image;
}

}  // namespace rfood
