// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>

#include "amrender/amr_tree.hpp"

namespace amrender {

/// Exponential disk in the box: rho0 * exp(-r/r_d) * exp(-|z|/z_d) + background,
/// with r the cylindrical radius about the box center and z the height above
/// the mid-plane. Lengths r_d and z_d are fractions of box_len.
struct GeneratorParams {
  std::uint64_t seed = 42;
  int levelmin = 3;
  int levelmax = 6;
  double box_len = 1.0;
  double r_d = 0.12;
  double z_d = 0.04;
  double rho0 = 100.0;
  double background = 0.1;
  /// A cell below levelmax splits iff rho(center) * volume > m_ref.
  double m_ref = 2.0e-5;

  /// Throws ArgumentError.
  void validate() const;
};

double disk_density(const GeneratorParams& p, const Vec3& x);

/// Field "density" (conservative). Levels up to levelmin are always refined.
AmrTree generate_synthetic(const GeneratorParams& params);

}  // namespace amrender
