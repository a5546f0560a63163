// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/image.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "amrender/errors.hpp"

namespace amrender {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t pos, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
  return v;
}

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_warn(png_structp, png_const_charp) {}

// libpng reports errors by longjmp, so nothing with a destructor may live in this frame.
bool write_png_rows(const Image8& img, std::vector<std::uint8_t>* out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_append, nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.nx), static_cast<png_uint_32>(img.ny), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img.nx) * img.channels;
  for (int row = img.ny - 1; row >= 0; --row) {
    png_write_row(png, img.bytes.data() + static_cast<std::size_t>(row) * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_fmap(const ScalarMap& map) {
  std::vector<std::uint8_t> out{'F', 'M', 'A', 'P'};
  out.reserve(12 + 8 * map.size());
  put_u32(out, static_cast<std::uint32_t>(map.nx()));
  put_u32(out, static_cast<std::uint32_t>(map.ny()));
  for (double v : map.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

ScalarMap decode_fmap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw CorruptionError("fmap: truncated header");
  if (std::memcmp(bytes.data(), "FMAP", 4) != 0) throw FormatError("fmap: bad magic");
  const auto nx = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  const auto ny = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  const std::uint64_t n = std::uint64_t{nx} * ny;
  if (bytes.size() != 12 + 8 * n) throw CorruptionError("fmap: payload size mismatch");
  ScalarMap map(static_cast<int>(nx), static_cast<int>(ny));
  auto data = map.data();
  for (std::uint64_t i = 0; i < n; ++i) data[i] = std::bit_cast<double>(get_le(bytes, 12 + 8 * i, 8));
  return map;
}

std::vector<std::uint8_t> encode_png(const Image8& img) {
  if (img.channels != 1 && img.channels != 3) throw ArgumentError("png: channels must be 1 or 3");
  if (img.nx < 1 || img.ny < 1) throw ArgumentError("png: empty image");
  if (img.bytes.size() != static_cast<std::size_t>(img.nx) * img.ny * img.channels) {
    throw ArgumentError("png: byte count does not match dimensions");
  }
  std::vector<std::uint8_t> out;
  if (!write_png_rows(img, &out)) throw Error("png: encoding failed");
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace amrender
