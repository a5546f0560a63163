// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "amrender/amr_tree.hpp"
#include "amrender/camera.hpp"
#include "amrender/image.hpp"

namespace amrender {

/// Image-plane sample carrying a weight.
struct SplatPoint {
  double u = 0.0;
  double v = 0.0;
  double weight = 0.0;
};

enum class SplatWeighting {
  /// value * cell_size * (cell_size / pixel)^2: the cell's column integral
  /// spread over the pixels it covers. Level maps add up to a line-of-sight
  /// integral comparable to the ray-cast sum.
  kColumnDensity,
  /// value * cell_size. Matches kColumnDensity only when cells are one pixel wide.
  kPathLength,
};

struct SplatOptions {
  /// Kernel sigma in units of the projected cell size.
  double kernel_width = 0.6;
  /// Random shift of each splat center, per axis, uniform in
  /// [-amplitude, amplitude] * cell_size. Breaks up grid-aligned artifacts.
  double shift_amplitude = 0.0;
  std::uint64_t seed = 0;
  SplatWeighting weighting = SplatWeighting::kColumnDensity;

  /// Throws ArgumentError.
  void validate() const;
};

/// Adds each point's weight to the pixel containing (u, v); out-of-frame points are dropped.
ScalarMap histogram_2d(std::span<const SplatPoint> points, const Camera& cam);

/// Half-width of the truncated discrete Gaussian: ceil(4 sigma), at least 1.
int gaussian_radius(double sigma_px);

/// Transfer function of a unit-mass discrete Gaussian on a zero-padded grid.
///
/// The spatial kernel is exp(-(dx^2 + dy^2) / (2 sigma^2)) for
/// |dx|, |dy| <= radius, normalized to sum to 1, stored with wrapped offsets
/// so that offset (0, 0) sits at index (0, 0).
class GaussianKernel {
 public:
  double sigma() const { return sigma_; }
  int radius() const { return radius_; }
  int image_nx() const { return nx_; }
  int image_ny() const { return ny_; }
  int padded_nx() const { return pnx_; }
  int padded_ny() const { return pny_; }

  /// Half spectrum in FFTW r2c layout: padded_ny rows of (padded_nx / 2 + 1).
  std::span<const std::complex<double>> spectrum() const { return spectrum_; }
  std::complex<double> dc() const { return spectrum_.front(); }

  /// Full complex inverse transform, padded_ny x padded_nx, row-major, wrapped offsets.
  std::vector<std::complex<double>> spatial() const;

 private:
  friend GaussianKernel gaussian_kernel_fft(double sigma_px, int nx, int ny);

  double sigma_ = 0.0;
  int radius_ = 0;
  int nx_ = 0;
  int ny_ = 0;
  int pnx_ = 0;
  int pny_ = 0;
  std::vector<std::complex<double>> spectrum_;
};

/// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
int fast_transform_size(int n);

/// Throws ArgumentError for sigma <= 0 or an empty image.
GaussianKernel gaussian_kernel_fft(double sigma_px, int nx, int ny);

/// Linear (non-wrapping) convolution through the frequency domain.
ScalarMap convolve_fft(const ScalarMap& map, const GaussianKernel& kernel);

/// Splats cells that all share one level. Throws ArgumentError on mixed levels.
ScalarMap splat_level(const AmrTree& tree, std::span<const NodeId> cells, const Camera& cam, std::size_t field,
                      const SplatOptions& opts);

/// Sum over levels [levelmin, level_cap] of the level maps of the capped cells
/// whose centers lie inside the camera slab.
ScalarMap render_splat(const AmrTree& tree, const Camera& cam, std::string_view field, const SplatOptions& opts);

}  // namespace amrender
