// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "amrender/errors.hpp"
#include "amrender/raycast.hpp"
#include "oracles.hpp"

namespace amrender {
namespace {

using testing::RiemannOracle;
using testing::RiemannResult;
using testing::random_tree;

Ray random_ray(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  Ray r;
  r.origin = {u(rng), u(rng), u(rng)};
  r.direction = normalized(Vec3{n(rng), n(rng), n(rng)});
  r.t_min = 0.0;
  r.t_max = 3.0;
  return r;
}

TEST(RayBox, LengthMatchesSampledMembership) {
  std::mt19937_64 rng(1);
  const Box box{{0.2, 0.1, 0.3}, {0.9, 0.6, 0.8}};
  int hits = 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    Ray r = random_ray(rng);
    if (i % 2 == 0) {
      const Vec3 target{0.2 + 0.7 * u(rng), 0.1 + 0.5 * u(rng), 0.3 + 0.5 * u(rng)};
      r.direction = normalized(target - r.origin);
    }
    const auto seg = ray_box_intersect(r, box);
    const double sampled = testing::sampled_length(r, box, 200000);
    const double got = seg ? seg->length() : 0.0;
    EXPECT_NEAR(got, sampled, 3.0 / 200000 * 2) << i;
    hits += seg ? 1 : 0;
  }
  EXPECT_GT(hits, 150);
}

TEST(RayBox, ClipsToParameterRange) {
  const Box box{{0, 0, 0}, {1, 1, 1}};
  Ray r{{0.5, 0.5, -1.0}, {0, 0, 1}, 1.25, 1.75};
  const auto seg = ray_box_intersect(r, box);
  ASSERT_TRUE(seg);
  EXPECT_DOUBLE_EQ(seg->t_in, 1.25);
  EXPECT_DOUBLE_EQ(seg->t_out, 1.75);
  r.t_max = 0.5;
  EXPECT_FALSE(ray_box_intersect(r, box));
}

TEST(RayBox, ZeroComponentUsesHalfOpenFaces) {
  const Box box{{0, 0, 0}, {1, 1, 1}};
  EXPECT_TRUE(ray_box_intersect({{0.0, 0.5, -1}, {0, 0, 1}}, box));
  EXPECT_FALSE(ray_box_intersect({{1.0, 0.5, -1}, {0, 0, 1}}, box));
  EXPECT_FALSE(ray_box_intersect({{0.5, -1e-15, -1}, {0, 0, 1}}, box));
}

TEST(RayBox, GrazingCornerIsAMiss) {
  const Box box{{0, 0, 0}, {1, 1, 1}};
  // Touches only the edge x = 1, y = 0 at t = 1: zero-length overlap.
  const Ray r{{0.0, -1.0, 0.5}, {1, 1, 0}};
  EXPECT_FALSE(ray_box_intersect(r, box));
}

TEST(CastRay, UniformFieldIsValueTimesLength) {
  AmrTreeBuilder b(2.0, 0, 0, {{"rho", true}});
  b.values(b.root())[0] = 3.0;
  const AmrTree t = std::move(b).build();
  const Ray r{{-1.0, 0.5, 0.5}, normalized(Vec3{1, 0.2, 0.1}), 0.0, 10.0};
  const auto seg = ray_box_intersect(r, t.bounds());
  ASSERT_TRUE(seg);
  const RayResult res = cast_ray(t, r, 0, 0, RayMode::kSum);
  EXPECT_NEAR(res.value, 3.0 * seg->length(), 1e-14);
  EXPECT_EQ(res.coarsest_level, 0);
}

TEST(CastRay, MissReturnsSentinel) {
  const AmrTree t = random_tree(1, 1, 3);
  const Ray r{{-1.0, -1.0, -1.0}, {0, 0, 1}};
  for (RayMode m : {RayMode::kSum, RayMode::kMip}) {
    const RayResult res = cast_ray(t, r, 0, 3, m);
    EXPECT_EQ(res.value, 0.0);
    EXPECT_EQ(res.coarsest_level, kMissLevel);
  }
}

TEST(CastRay, SumMatchesRiemannOracleOnRandomTrees) {
  std::mt19937_64 rng(2);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const AmrTree t = random_tree(seed, 1, 4);
    for (int cap : {2, 4}) {
      const RiemannOracle oracle(t, 0, cap);
      for (int i = 0; i < 40; ++i) {
        const Ray r = random_ray(rng);
        const RiemannResult o = oracle.integrate(r, 20000);
        const RayResult got = cast_ray(t, r, 0, cap, RayMode::kSum);
        if (!o.hit) {
          EXPECT_EQ(got.coarsest_level, kMissLevel);
          continue;
        }
        // Each cell boundary costs at most one step of the piecewise-constant integrand.
        EXPECT_NEAR(got.value, o.sum, 4 * 48 * 10.0 * 3.0 / 20000 + 1e-12);
        EXPECT_LE(got.coarsest_level, o.min_level);
      }
    }
  }
}

TEST(CastRay, AxisAlignedMipEqualsOracleMax) {
  const AmrTree t = random_tree(8, 2, 4);
  const RiemannOracle oracle(t, 0, 4);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      const Ray r{{(i + 0.5) / 16, (j + 0.5) / 16, -0.5}, {0, 0, 1}, 0.0, 2.0};
      const RiemannResult o = oracle.integrate(r, 4096);
      const RayResult mip = cast_ray(t, r, 0, 4, RayMode::kMip);
      EXPECT_EQ(mip.value, o.max);
      EXPECT_EQ(mip.coarsest_level, o.min_level);
      EXPECT_NEAR(cast_ray(t, r, 0, 4, RayMode::kSum).value, o.sum, 1e-12 * o.sum);
    }
  }
}

TEST(CastRay, UnitFieldGivesCrossingLength) {
  std::mt19937_64 rng(3);
  const AmrTree t = random_tree(4, 1, 5);
  const std::size_t ones = t.field_index("ones");
  for (int i = 0; i < 500; ++i) {
    const Ray r = random_ray(rng);
    const auto span = testing::clip_to_cube(r, 1.0);
    const double want = span ? span->second - span->first : 0.0;
    EXPECT_NEAR(cast_ray(t, r, ones, 5, RayMode::kSum).value, want, 1e-12);
  }
}

TEST(CastRay, NeverVisitsBelowTheCap) {
  std::mt19937_64 rng(4);
  const AmrTree t = random_tree(5, 1, 6);
  for (int cap = 1; cap <= 6; ++cap) {
    TraversalStats st;
    for (int i = 0; i < 50; ++i) (void)cast_ray(t, random_ray(rng), 0, cap, RayMode::kSum, &st);
    EXPECT_LE(st.deepest_level(), cap);
    EXPECT_GT(st.total(), 0u);
  }
  TraversalStats none;
  EXPECT_EQ(none.deepest_level(), -1);
}

TEST(RenderRay, RectIsAWindowOfTheFullRender) {
  const AmrTree t = random_tree(6, 2, 5);
  Camera cam = full_box_camera(1.0, 24, 18);
  cam.view = normalized(Vec3{0.2, 0.3, 1.0});
  const int cap = level_cap(cam, 1.0, t.levelmin(), t.levelmax());
  const RenderResult full = render_ray_rect(t, cam, 0, cap, RayMode::kSum, {0, 0, 24, 18});
  const PixelRect rect{5, 3, 17, 11};
  const RenderResult part = render_ray_rect(t, cam, 0, cap, RayMode::kSum, rect);
  ASSERT_EQ(part.map.nx(), 12);
  ASSERT_EQ(part.map.ny(), 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 12; ++x) {
      EXPECT_EQ(part.map(x, y), full.map(x + 5, y + 3));
      EXPECT_EQ(part.levels(x, y), full.levels(x + 5, y + 3));
    }
  }
  EXPECT_EQ(render_ray(t, cam, "density", RayMode::kSum).map, full.map);
}

TEST(RenderRay, UnknownFieldThrows) {
  const AmrTree t = random_tree(6, 1, 2);
  EXPECT_THROW(render_ray(t, Camera{}, "missing", RayMode::kSum), UnknownFieldError);
}


TEST(Examples, AxisAndDiagonalSegments) {
  const Box unit{{0, 0, 0}, {1, 1, 1}};
  const auto s = ray_box_intersect({{-1, 0.5, 0.5}, {1, 0, 0}}, unit);
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->t_in, 1.0);
  EXPECT_DOUBLE_EQ(s->t_out, 2.0);
  const auto d = ray_box_intersect({{-1, -1, -1}, normalized(Vec3{1, 1, 1})}, unit);
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->length(), std::sqrt(3.0), 1e-12);
}

TEST(Examples, TenThousandRaysAgainstSampling) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 lo{u(rng), u(rng), u(rng)};
    const Box box{lo, lo + Vec3{0.1 + u(rng), 0.1 + u(rng), 0.1 + u(rng)}};
    Ray r = random_ray(rng);
    if (i % 2 == 0) r.direction = normalized(lo + Vec3{0.05, 0.05, 0.05} - r.origin);
    const auto seg = ray_box_intersect(r, box);
    EXPECT_NEAR(seg ? seg->length() : 0.0, testing::sampled_length(r, box, 10000), 2e-3);
  }
}

TEST(Examples, SingleLeafValueTwo) {
  AmrTreeBuilder b(1.0, 0, 0, {{"rho", true}});
  b.values(b.root())[0] = 2.0;
  const AmrTree t = std::move(b).build();
  const Ray r{{0.5, 0.5, -0.5}, {0, 0, 1}, 0.0, 2.0};
  EXPECT_DOUBLE_EQ(cast_ray(t, r, 0, 0, RayMode::kSum).value, 2.0);
  EXPECT_DOUBLE_EQ(cast_ray(t, r, 0, 0, RayMode::kMip).value, 2.0);
}

TEST(Examples, DepthFiveTreeHundredRaysRiemann) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const AmrTree t = random_tree(14, 2, 5);
  const RiemannOracle oracle(t, 0, 5);
  for (int i = 0; i < 100; ++i) {
    Ray r = random_ray(rng);
    r.direction = normalized(Vec3{u(rng), u(rng), u(rng)} - r.origin);
    const RiemannResult o = oracle.integrate(r, 100000);
    ASSERT_TRUE(o.hit);
    EXPECT_NEAR(cast_ray(t, r, 0, 5, RayMode::kSum).value, o.sum, 1e-3 * o.sum);
    EXPECT_GE(cast_ray(t, r, 0, 5, RayMode::kMip).value, o.max);
  }
}

TEST(Examples, UniformColumnAndSinglePixel) {
  AmrTreeBuilder b(2.0, 2, 2, {{"density", true}});
  b.values(b.root())[0] = 1.5;
  b.refine(b.root());
  for (int o = 0; o < 8; ++o) b.refine(b.child(b.root(), o));
  const AmrTree t = std::move(b).build();
  const RenderResult r = render_ray(t, full_box_camera(2.0, 8, 8), "density", RayMode::kSum);
  for (double v : r.map.data()) EXPECT_EQ(v, 3.0);

  const AmrTree rt = random_tree(15, 2, 5);
  Camera one = full_box_camera(1.0, 1, 1);
  one.view = normalized(Vec3{0.2, 0.1, 1.0});
  const RenderResult single = render_ray(rt, one, "density", RayMode::kSum);
  const int cap = level_cap(one, 1.0, rt.levelmin(), rt.levelmax());
  EXPECT_EQ(single.map(0, 0), cast_ray(rt, pixel_ray(one, 0, 0), 0, cap, RayMode::kSum).value);
  EXPECT_EQ(render_ray(rt, one, "density", RayMode::kSum).map, single.map);
}

}  // namespace
}  // namespace amrender
