// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace amrender {

/// Row-major nx * ny grid; row 0 is the bottom of the image.
template <class T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int nx, int ny, T fill = T{})
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int px, int py) { return data_[static_cast<std::size_t>(py) * nx_ + px]; }
  const T& operator()(int px, int py) const { return data_[static_cast<std::size_t>(py) * nx_ + px]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const auto& o) const { return nx_ == o.nx() && ny_ == o.ny(); }
  bool operator==(const Grid2D&) const = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

/// Accumulated field values, one per pixel.
using ScalarMap = Grid2D<double>;

/// Coarsest AMR level that contributed to each pixel.
using LevelMap = Grid2D<int>;
inline constexpr int kMissLevel = -1;

/// 8-bit image, 1 (gray) or 3 (RGB) interleaved channels, row 0 at the bottom.
struct Image8 {
  int nx = 0;
  int ny = 0;
  int channels = 1;
  std::vector<std::uint8_t> bytes;

  bool operator==(const Image8&) const = default;
};

/// FMAP: "FMAP", u32 nx, u32 ny, nx*ny f64 row-major, little-endian.
std::vector<std::uint8_t> encode_fmap(const ScalarMap& map);
ScalarMap decode_fmap(std::span<const std::uint8_t> bytes);

/// PNG with the top image row first.
std::vector<std::uint8_t> encode_png(const Image8& img);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace amrender
