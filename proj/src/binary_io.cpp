// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rfood/binary_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <system_error>

#include "rfood/error.hpp"

namespace rfood {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

std::string_view ByteReader::take(std::size_t n, std::string_view field) {
  if (remaining() < n) {
    std::ostringstream msg;
    msg << "truncated input while reading '" << field << "' at byte " << pos_;
    throw ParseError(msg.str());
  }
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::expect_magic(std::string_view tag) {
  auto got = take(tag.size(), "magic");
  if (got != tag) throw ParseError("bad magic: expected '" + std::string(tag) + "'");
}

std::uint32_t ByteReader::u32(std::string_view field) {
  auto b = take(4, field);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
  return v;
}

std::uint64_t ByteReader::u64(std::string_view field) {
  auto b = take(8, field);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
  return v;
}

float ByteReader::f32(std::string_view field) { return std::bit_cast<float>(u32(field)); }

double ByteReader::f64(std::string_view field) { return std::bit_cast<double>(u64(field)); }

std::string_view ByteReader::bytes(std::size_t n, std::string_view field) {
  return take(n, field);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " +
                ec.message());
  }
}

}  // namespace rfood
