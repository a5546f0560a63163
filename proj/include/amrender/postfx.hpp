// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "amrender/camera.hpp"
#include "amrender/image.hpp"

namespace amrender {

struct BlurOptions {
  /// sigma = strength * (projected cell size in pixels) at a pixel's level.
  double strength = 0.0;
  /// Levels whose sigma falls below this are left unblurred.
  double min_sigma = 0.25;

  /// Throws ArgumentError.
  void validate() const;
};

/// Separable Gaussian blur with the truncated kernel used by the splatter
/// (radius ceil(4 sigma)); borders replicate the edge pixel.
ScalarMap gaussian_blur(const ScalarMap& map, double sigma_px);

/// Blurs the map once per distinct level present in `levels` and keeps, at
/// each pixel, the result of the pass matching its own level. Miss pixels are
/// copied through. Throws ArgumentError on shape mismatch.
ScalarMap adaptive_blur(const ScalarMap& map, const LevelMap& levels, const Camera& cam, double box_len,
                        const BlurOptions& opts);

enum class ToneScale { kLinear, kLog10 };
enum class Colormap { kGray, kHeat };

struct ToneOptions {
  ToneScale scale = ToneScale::kLog10;
  /// Bounds in data units (before scaling). Default to the map's finite range;
  /// for kLog10 the lower default is the smallest positive value.
  std::optional<double> vmin;
  std::optional<double> vmax;
  Colormap colormap = Colormap::kGray;
};

/// Affine map of the scaled values to [0, 255], clamped, then colormapped.
/// Throws ArgumentError for an empty map or vmin >= vmax.
Image8 tonemap(const ScalarMap& map, const ToneOptions& opts);

/// 256-entry RGB table of the built-in colormap.
const std::array<std::array<std::uint8_t, 3>, 256>& colormap_table(Colormap cmap);

}  // namespace amrender
