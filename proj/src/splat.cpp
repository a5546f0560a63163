// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/splat.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "amrender/errors.hpp"

namespace amrender {

namespace {

// The FFTW planner is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (!plan_) throw Error("fftw: planning failed");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

Plan plan_r2c(int pny, int pnx, double* in, fftw_complex* out) {
  std::lock_guard lock(planner_mutex());
  return Plan(fftw_plan_dft_r2c_2d(pny, pnx, in, out, FFTW_ESTIMATE));
}

Plan plan_c2r(int pny, int pnx, fftw_complex* in, double* out) {
  std::lock_guard lock(planner_mutex());
  return Plan(fftw_plan_dft_c2r_2d(pny, pnx, in, out, FFTW_ESTIMATE));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1), a pure function of (seed, cell, axis) so that the shift
// of a cell does not depend on traversal order or domain decomposition.
double cell_jitter(std::uint64_t seed, const CellCoord& c, int axis) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(c.level));
  h = splitmix64(h ^ c.ix);
  h = splitmix64(h ^ c.iy);
  h = splitmix64(h ^ c.iz);
  h = splitmix64(h ^ static_cast<std::uint64_t>(axis));
  return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

void SplatOptions::validate() const {
  if (!(kernel_width > 0.0) || !std::isfinite(kernel_width)) throw ArgumentError("splat: kernel width must be > 0");
  if (!(shift_amplitude >= 0.0 && shift_amplitude <= 0.5)) {
    throw ArgumentError("splat: shift amplitude must be in [0, 0.5]");
  }
}

ScalarMap histogram_2d(std::span<const SplatPoint> points, const Camera& cam) {
  ScalarMap map(cam.nx, cam.ny);
  for (const SplatPoint& p : points) {
    const PixelIndex px = pixel_of(cam, p.u, p.v);
    if (!px.inside(cam)) continue;
    map(static_cast<int>(px.px), static_cast<int>(px.py)) += p.weight;
  }
  return map;
}

int gaussian_radius(double sigma_px) { return std::max(1, static_cast<int>(std::ceil(4.0 * sigma_px))); }

int fast_transform_size(int n) {
  for (int m = std::max(1, n);; ++m) {
    int r = m;
    for (int f : {2, 3, 5, 7}) {
      while (r % f == 0) r /= f;
    }
    if (r == 1) return m;
  }
}

GaussianKernel gaussian_kernel_fft(double sigma_px, int nx, int ny) {
  if (!(sigma_px > 0.0) || !std::isfinite(sigma_px)) throw ArgumentError("gaussian kernel: sigma must be > 0");
  if (nx < 1 || ny < 1) throw ArgumentError("gaussian kernel: empty image");
  GaussianKernel k;
  k.sigma_ = sigma_px;
  k.radius_ = gaussian_radius(sigma_px);
  k.nx_ = nx;
  k.ny_ = ny;
  k.pnx_ = fast_transform_size(nx + 2 * k.radius_);
  k.pny_ = fast_transform_size(ny + 2 * k.radius_);

  const std::size_t n = static_cast<std::size_t>(k.pnx_) * k.pny_;
  const int hx = k.pnx_ / 2 + 1;
  RealBuffer spatial(fftw_alloc_real(n));
  ComplexBuffer freq(fftw_alloc_complex(static_cast<std::size_t>(k.pny_) * hx));
  Plan plan = plan_r2c(k.pny_, k.pnx_, spatial.get(), freq.get());

  std::fill_n(spatial.get(), n, 0.0);
  const int r = k.radius_;
  const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
  double total = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) total += std::exp(-(dx * dx + dy * dy) * inv2s2);
  }
  for (int dy = -r; dy <= r; ++dy) {
    const int row = (dy + k.pny_) % k.pny_;
    for (int dx = -r; dx <= r; ++dx) {
      const int col = (dx + k.pnx_) % k.pnx_;
      spatial[static_cast<std::size_t>(row) * k.pnx_ + col] = std::exp(-(dx * dx + dy * dy) * inv2s2) / total;
    }
  }
  plan.execute();
  k.spectrum_.resize(static_cast<std::size_t>(k.pny_) * hx);
  for (std::size_t i = 0; i < k.spectrum_.size(); ++i) k.spectrum_[i] = {freq[i][0], freq[i][1]};
  return k;
}

std::vector<std::complex<double>> GaussianKernel::spatial() const {
  const std::size_t n = static_cast<std::size_t>(pnx_) * pny_;
  const int hx = pnx_ / 2 + 1;
  ComplexBuffer full(fftw_alloc_complex(n));
  ComplexBuffer out(fftw_alloc_complex(n));
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_2d(pny_, pnx_, full.get(), out.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  // Rebuild the full spectrum from Hermitian symmetry: X[ky][kx] = conj(X[-ky][-kx]).
  for (int ky = 0; ky < pny_; ++ky) {
    for (int kx = 0; kx < pnx_; ++kx) {
      std::complex<double> v;
      if (kx < hx) {
        v = spectrum_[static_cast<std::size_t>(ky) * hx + kx];
      } else {
        v = std::conj(spectrum_[static_cast<std::size_t>((pny_ - ky) % pny_) * hx + (pnx_ - kx)]);
      }
      full[static_cast<std::size_t>(ky) * pnx_ + kx][0] = v.real();
      full[static_cast<std::size_t>(ky) * pnx_ + kx][1] = v.imag();
    }
  }
  plan.execute();
  std::vector<std::complex<double>> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = {out[i][0] / n, out[i][1] / n};
  return result;
}

ScalarMap convolve_fft(const ScalarMap& map, const GaussianKernel& kernel) {
  if (map.nx() != kernel.image_nx() || map.ny() != kernel.image_ny()) {
    throw ArgumentError("convolve_fft: kernel was built for a different image size");
  }
  const int pnx = kernel.padded_nx();
  const int pny = kernel.padded_ny();
  const int hx = pnx / 2 + 1;
  const std::size_t n = static_cast<std::size_t>(pnx) * pny;
  RealBuffer real(fftw_alloc_real(n));
  ComplexBuffer freq(fftw_alloc_complex(static_cast<std::size_t>(pny) * hx));
  Plan forward = plan_r2c(pny, pnx, real.get(), freq.get());
  Plan backward = plan_c2r(pny, pnx, freq.get(), real.get());

  std::fill_n(real.get(), n, 0.0);
  for (int y = 0; y < map.ny(); ++y) {
    for (int x = 0; x < map.nx(); ++x) real[static_cast<std::size_t>(y) * pnx + x] = map(x, y);
  }
  forward.execute();
  const auto spectrum = kernel.spectrum();
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const std::complex<double> a{freq[i][0], freq[i][1]};
    const std::complex<double> b = a * spectrum[i];
    freq[i][0] = b.real();
    freq[i][1] = b.imag();
  }
  backward.execute();
  ScalarMap out(map.nx(), map.ny());
  const double scale = 1.0 / static_cast<double>(n);
  for (int y = 0; y < map.ny(); ++y) {
    for (int x = 0; x < map.nx(); ++x) out(x, y) = real[static_cast<std::size_t>(y) * pnx + x] * scale;
  }
  return out;
}

ScalarMap splat_level(const AmrTree& tree, std::span<const NodeId> cells, const Camera& cam, std::size_t field,
                      const SplatOptions& opts) {
  opts.validate();
  if (field >= tree.field_count()) throw ArgumentError("splat_level: field index out of range");
  if (cells.empty()) return ScalarMap(cam.nx, cam.ny);
  const int level = tree.node(cells.front()).coord.level;
  const double size = cell_size(tree.box_len(), level);
  const double fp = cam.pixel_footprint();
  const double area_factor =
      opts.weighting == SplatWeighting::kColumnDensity ? (size / fp) * (size / fp) : 1.0;

  std::vector<SplatPoint> points;
  points.reserve(cells.size());
  for (NodeId id : cells) {
    const AmrNode& n = tree.node(id);
    if (n.coord.level != level) {
      throw ArgumentError("splat_level: cells from levels " + std::to_string(level) + " and " +
                          std::to_string(n.coord.level) + " mixed");
    }
    Vec3 c = cell_center(tree.box_len(), n.coord);
    if (opts.shift_amplitude > 0.0) {
      for (int a = 0; a < 3; ++a) c[a] += opts.shift_amplitude * size * cell_jitter(opts.seed, n.coord, a);
    }
    const ProjectedPoint q = project(cam, c);
    points.push_back({q.u, q.v, tree.value(id, field) * size * area_factor});
  }
  const ScalarMap hist = histogram_2d(points, cam);
  return convolve_fft(hist, gaussian_kernel_fft(opts.kernel_width * size / fp, cam.nx, cam.ny));
}

ScalarMap render_splat(const AmrTree& tree, const Camera& cam, std::string_view field, const SplatOptions& opts) {
  cam.validate();
  opts.validate();
  const std::size_t f = tree.field_index(field);
  const int cap = level_cap(cam, tree.box_len(), tree.levelmin(), tree.levelmax());
  const double half_depth = 0.5 * cam.depth;

  std::map<int, std::vector<NodeId>> by_level;
  for_each_cell_at_cap(tree, cap, [&](NodeId id) {
    const double w = project(cam, cell_center(tree.box_len(), tree.node(id).coord)).w;
    if (w >= -half_depth && w < half_depth) by_level[tree.node(id).coord.level].push_back(id);
  });

  ScalarMap total(cam.nx, cam.ny);
  for (const auto& [level, cells] : by_level) {
    const ScalarMap m = splat_level(tree, cells, cam, f, opts);
    auto dst = total.data();
    auto src = m.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return total;
}

}  // namespace amrender
