// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/postfx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "amrender/errors.hpp"
#include "amrender/splat.hpp"

namespace amrender {

void BlurOptions::validate() const {
  if (!(strength >= 0.0) || !std::isfinite(strength)) throw ArgumentError("blur: strength must be >= 0");
  if (!(min_sigma >= 0.0)) throw ArgumentError("blur: min_sigma must be >= 0");
}

namespace {

std::vector<double> kernel_1d(double sigma, int radius) {
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  double total = 0.0;
  for (int d = -radius; d <= radius; ++d) total += (k[static_cast<std::size_t>(d + radius)] = std::exp(-d * d * inv2s2));
  for (double& w : k) w /= total;
  return k;
}

}  // namespace

ScalarMap gaussian_blur(const ScalarMap& map, double sigma_px) {
  if (!(sigma_px > 0.0)) throw ArgumentError("gaussian_blur: sigma must be > 0");
  const int r = gaussian_radius(sigma_px);
  const std::vector<double> k = kernel_1d(sigma_px, r);
  const int nx = map.nx();
  const int ny = map.ny();
  ScalarMap tmp(nx, ny);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) acc += k[static_cast<std::size_t>(d + r)] * map(std::clamp(x - d, 0, nx - 1), y);
      tmp(x, y) = acc;
    }
  }
  ScalarMap out(nx, ny);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) acc += k[static_cast<std::size_t>(d + r)] * tmp(x, std::clamp(y - d, 0, ny - 1));
      out(x, y) = acc;
    }
  }
  return out;
}

ScalarMap adaptive_blur(const ScalarMap& map, const LevelMap& levels, const Camera& cam, double box_len,
                        const BlurOptions& opts) {
  opts.validate();
  if (!map.same_shape(levels)) throw ArgumentError("adaptive_blur: map and level map shapes differ");
  ScalarMap out = map;
  if (opts.strength == 0.0) return out;

  std::map<int, bool> present;
  for (int l : levels.data()) {
    if (l != kMissLevel) present[l] = true;
  }
  const double fp = cam.pixel_footprint();
  for (const auto& [level, unused] : present) {
    const double sigma = opts.strength * cell_size(box_len, level) / fp;
    if (sigma < opts.min_sigma || sigma == 0.0) continue;
    const ScalarMap pass = gaussian_blur(map, sigma);
    for (int y = 0; y < map.ny(); ++y) {
      for (int x = 0; x < map.nx(); ++x) {
        if (levels(x, y) == level) out(x, y) = pass(x, y);
      }
    }
  }
  return out;
}

namespace {

std::array<std::array<std::uint8_t, 3>, 256> build_table(Colormap cmap) {
  std::array<std::array<std::uint8_t, 3>, 256> table{};
  // Piecewise-linear black -> red -> yellow -> white.
  struct Stop {
    double t, r, g, b;
  };
  static constexpr Stop kHeat[] = {{0.0, 0, 0, 0}, {0.4, 190, 20, 0}, {0.75, 255, 200, 0}, {1.0, 255, 255, 255}};
  for (int i = 0; i < 256; ++i) {
    if (cmap == Colormap::kGray) {
      const auto g = static_cast<std::uint8_t>(i);
      table[static_cast<std::size_t>(i)] = {g, g, g};
      continue;
    }
    const double t = i / 255.0;
    std::size_t s = 0;
    while (s + 2 < std::size(kHeat) && t > kHeat[s + 1].t) ++s;
    const Stop& a = kHeat[s];
    const Stop& b = kHeat[s + 1];
    const double f = (t - a.t) / (b.t - a.t);
    table[static_cast<std::size_t>(i)] = {static_cast<std::uint8_t>(std::lround(a.r + f * (b.r - a.r))),
                                          static_cast<std::uint8_t>(std::lround(a.g + f * (b.g - a.g))),
                                          static_cast<std::uint8_t>(std::lround(a.b + f * (b.b - a.b)))};
  }
  return table;
}

}  // namespace

const std::array<std::array<std::uint8_t, 3>, 256>& colormap_table(Colormap cmap) {
  static const auto gray = build_table(Colormap::kGray);
  static const auto heat = build_table(Colormap::kHeat);
  return cmap == Colormap::kGray ? gray : heat;
}

Image8 tonemap(const ScalarMap& map, const ToneOptions& opts) {
  if (map.empty()) throw ArgumentError("tonemap: empty map");
  const bool log = opts.scale == ToneScale::kLog10;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : map.data()) {
    if (!std::isfinite(v) || (log && !(v > 0.0))) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (opts.vmin) lo = *opts.vmin;
  if (opts.vmax) hi = *opts.vmax;
  if (opts.vmin && opts.vmax && !(lo < hi)) throw ArgumentError("tonemap: vmin must be below vmax");
  if (log && opts.vmin && !(lo > 0.0)) throw ArgumentError("tonemap: log scale needs a positive vmin");

  const bool degenerate = !std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi);
  const double s_lo = log && !degenerate ? std::log10(lo) : lo;
  const double s_hi = log && !degenerate ? std::log10(hi) : hi;

  Image8 img;
  img.nx = map.nx();
  img.ny = map.ny();
  img.channels = opts.colormap == Colormap::kGray ? 1 : 3;
  img.bytes.reserve(map.size() * static_cast<std::size_t>(img.channels));
  const auto& table = colormap_table(opts.colormap);
  for (double v : map.data()) {
    std::uint8_t index = 0;
    if (!degenerate && !std::isnan(v)) {
      double s;
      if (log) {
        s = v >= lo ? std::log10(std::max(v, lo)) : s_lo;
      } else {
        s = v;
      }
      const double t = std::clamp((s - s_lo) / (s_hi - s_lo), 0.0, 1.0);
      index = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
    if (img.channels == 1) {
      img.bytes.push_back(index);
    } else {
      img.bytes.insert(img.bytes.end(), table[index].begin(), table[index].end());
    }
  }
  return img;
}

}  // namespace amrender
