// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace rfood {

// Little-endian encoder, independent of host byte order.
class ByteWriter {
 public:
  void magic(std::string_view tag) { buffer_.append(tag); }
  void u32(std::uint32_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void bytes(std::string_view data) { buffer_.append(data); }

  const std::string& buffer() const { return buffer_; }
  std::string release() { return std::move(buffer_); }

 private:
  std::string buffer_;
};

// Little-endian decoder. Every read names the field it is decoding so that
// a truncated or malformed input produces a ParseError naming that field.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  void expect_magic(std::string_view tag);
  std::uint32_t u32(std::string_view field);
  std::int32_t i32(std::string_view field) { return static_cast<std::int32_t>(u32(field)); }
  std::uint64_t u64(std::string_view field);
  float f32(std::string_view field);
  double f64(std::string_view field);
  std::string_view bytes(std::size_t n, std::string_view field);

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::string_view take(std::size_t n, std::string_view field);

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace rfood
