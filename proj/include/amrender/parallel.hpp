// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amrender/amr_tree.hpp"
#include "amrender/camera.hpp"
#include "amrender/raycast.hpp"

namespace amrender {

enum class UnitKind { kTile, kDomain };

struct WorkUnit {
  UnitKind kind = UnitKind::kTile;
  int id = 0;
  /// kTile only.
  PixelRect tile;
  /// kDomain only: payload file index.
  std::uint32_t domain = 0;
};

/// Row-major tiles of at most tile_size x tile_size pixels. Throws ArgumentError for tile_size < 1.
std::vector<WorkUnit> plan_tiles(int nx, int ny, int tile_size);
/// One unit per payload file.
std::vector<WorkUnit> plan_domains(std::uint32_t ndomains);

/// Output of one unit: tile-sized for kTile, full-frame for kDomain.
struct PartialResult {
  int unit_id = 0;
  RenderResult result;
};

using RenderJob = std::function<RenderResult(const WorkUnit&)>;

/// Master-side trace of the dispatch protocol.
struct PoolEvent {
  enum class Kind {
    kReady,     // worker asked for work (first request or after finishing a unit)
    kDispatch,  // master handed a unit to the worker
    kRetire,    // master told the worker to stop
  };
  Kind kind;
  unsigned worker;
  int unit_id;  // -1 when not applicable
  std::size_t pending;  // units not yet dispatched, after the event
};

struct PoolOptions {
  unsigned workers = 1;
  /// Called on the master thread, in order.
  std::function<void(const PoolEvent&)> observer;
};

/// Runs `job` on each unit with a pool of worker threads fed by a master that
/// hands the next unit to whichever worker reports idle. Partials are composed
/// in ascending unit id, so the result does not depend on the worker count:
/// tiles are copied in place; domain partials are added (kSum) or maxed (kMip),
/// level maps take the minimum. A failing unit aborts the run with
/// WorkUnitError carrying its id.
RenderResult run_pool(std::span<const WorkUnit> units, int nx, int ny, RayMode mode, const RenderJob& job,
                      const PoolOptions& opts);

/// Tile-parallel ray cast over a shared tree.
RenderResult render_ray_tiles(const AmrTree& tree, const Camera& cam, std::string_view field, RayMode mode,
                              unsigned workers, int tile_size = 32);

/// Sort-last ray cast: every worker reads one payload file and renders it full frame.
/// `level_cap` is derived from the header and camera.
RenderResult render_ray_domains(const std::filesystem::path& base, const Camera& cam, std::string_view field,
                                RayMode mode, unsigned workers);

struct BenchRow {
  unsigned workers = 1;
  double median_seconds = 0.0;
  double speedup = 1.0;
};

/// Median wall time of `render_once(workers)` over `repetitions` runs per worker
/// count; speedup is relative to one worker (measured even if absent from the list).
std::vector<BenchRow> benchmark(const std::function<void(unsigned)>& render_once,
                                std::span<const unsigned> worker_counts, int repetitions = 3);

/// "workers,median_seconds,speedup" plus one row per entry.
std::string bench_csv(std::span<const BenchRow> rows);

/// Worker count from AMR_RENDER_WORKERS when set and valid, else `fallback`.
unsigned workers_from_env(unsigned fallback);

}  // namespace amrender
