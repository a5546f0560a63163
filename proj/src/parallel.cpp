// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "amrender/dataset_io.hpp"
#include "amrender/errors.hpp"

namespace amrender {

std::vector<WorkUnit> plan_tiles(int nx, int ny, int tile_size) {
  if (tile_size < 1) throw ArgumentError("tile_size must be at least 1");
  if (nx < 1 || ny < 1) throw ArgumentError("plan_tiles: empty image");
  std::vector<WorkUnit> units;
  int id = 0;
  for (int y = 0; y < ny; y += tile_size) {
    for (int x = 0; x < nx; x += tile_size) {
      WorkUnit u;
      u.kind = UnitKind::kTile;
      u.id = id++;
      u.tile = {x, y, std::min(nx, x + tile_size), std::min(ny, y + tile_size)};
      units.push_back(u);
    }
  }
  return units;
}

std::vector<WorkUnit> plan_domains(std::uint32_t ndomains) {
  std::vector<WorkUnit> units;
  for (std::uint32_t d = 0; d < ndomains; ++d) {
    WorkUnit u;
    u.kind = UnitKind::kDomain;
    u.id = static_cast<int>(d);
    u.domain = d;
    units.push_back(u);
  }
  return units;
}

namespace {

template <class T>
class Mailbox {
 public:
  void post(T msg) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(msg));
    }
    cv_.notify_one();
  }
  T take() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    T msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<T> queue_;
};

struct WorkerReport {
  unsigned worker = 0;
  // Empty on the first request.
  std::optional<PartialResult> done;
  std::optional<std::pair<int, std::string>> failure;
};

class Composer {
 public:
  Composer(int nx, int ny, RayMode mode) : mode_(mode), out_{ScalarMap(nx, ny), LevelMap(nx, ny, kMissLevel)} {}

  void add(const WorkUnit& unit, const RenderResult& r) {
    if (unit.kind == UnitKind::kTile) {
      const PixelRect& t = unit.tile;
      if (r.map.nx() != t.width() || r.map.ny() != t.height()) {
        throw WorkUnitError(unit.id, "tile partial has the wrong size");
      }
      for (int y = 0; y < t.height(); ++y) {
        for (int x = 0; x < t.width(); ++x) {
          out_.map(t.x0 + x, t.y0 + y) = r.map(x, y);
          out_.levels(t.x0 + x, t.y0 + y) = r.levels(x, y);
        }
      }
      return;
    }
    if (!r.map.same_shape(out_.map) || !r.levels.same_shape(out_.map)) {
      throw WorkUnitError(unit.id, "domain partial is not full-frame");
    }
    auto dst = out_.map.data();
    auto lvl = out_.levels.data();
    const auto src = r.map.data();
    const auto src_lvl = r.levels.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (src_lvl[i] == kMissLevel) continue;
      if (mode_ == RayMode::kSum) {
        dst[i] += src[i];
      } else {
        dst[i] = lvl[i] == kMissLevel ? src[i] : std::max(dst[i], src[i]);
      }
      lvl[i] = lvl[i] == kMissLevel ? src_lvl[i] : std::min(lvl[i], src_lvl[i]);
    }
  }

  RenderResult take() { return std::move(out_); }

 private:
  RayMode mode_;
  RenderResult out_;
};

}  // namespace

RenderResult run_pool(std::span<const WorkUnit> units, int nx, int ny, RayMode mode, const RenderJob& job,
                      const PoolOptions& opts) {
  if (opts.workers < 1) throw ArgumentError("run_pool: worker_count must be at least 1");
  std::vector<WorkUnit> order(units.begin(), units.end());
  std::stable_sort(order.begin(), order.end(), [](const WorkUnit& a, const WorkUnit& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i].id == order[i - 1].id) throw ArgumentError("run_pool: duplicate unit id");
  }
  std::map<int, std::size_t> position;
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i].id] = i;

  const unsigned nworkers = opts.workers;
  Mailbox<WorkerReport> master_inbox;
  std::vector<Mailbox<std::optional<WorkUnit>>> worker_inbox(nworkers);

  std::vector<std::thread> workers;
  workers.reserve(nworkers);
  for (unsigned w = 0; w < nworkers; ++w) {
    workers.emplace_back([&, w] {
      master_inbox.post({w, std::nullopt, std::nullopt});
      for (;;) {
        std::optional<WorkUnit> unit = worker_inbox[w].take();
        if (!unit) return;
        WorkerReport report{w, std::nullopt, std::nullopt};
        try {
          report.done = PartialResult{unit->id, job(*unit)};
        } catch (const std::exception& e) {
          report.failure = {unit->id, e.what()};
        } catch (...) {
          report.failure = {unit->id, "unknown error"};
        }
        master_inbox.post(std::move(report));
      }
    });
  }

  Composer composer(nx, ny, mode);
  std::map<std::size_t, RenderResult> parked;
  std::size_t next_to_compose = 0;
  std::size_t next_to_dispatch = 0;
  std::optional<WorkUnitError> failure;
  unsigned retired = 0;
  auto emit = [&](PoolEvent::Kind kind, unsigned w, int id) {
    if (opts.observer) opts.observer({kind, w, id, order.size() - next_to_dispatch});
  };

  while (retired < nworkers) {
    WorkerReport report = master_inbox.take();
    emit(PoolEvent::Kind::kReady, report.worker, report.done ? report.done->unit_id : -1);
    if (report.failure && !failure) failure.emplace(report.failure->first, report.failure->second);
    if (report.done && !failure) {
      parked.emplace(position.at(report.done->unit_id), std::move(report.done->result));
      try {
        for (auto it = parked.find(next_to_compose); it != parked.end(); it = parked.find(next_to_compose)) {
          composer.add(order[next_to_compose], it->second);
          parked.erase(it);
          ++next_to_compose;
        }
      } catch (const WorkUnitError& e) {
        failure = e;
      }
    }
    if (!failure && next_to_dispatch < order.size()) {
      const WorkUnit& unit = order[next_to_dispatch++];
      worker_inbox[report.worker].post(unit);
      emit(PoolEvent::Kind::kDispatch, report.worker, unit.id);
    } else {
      worker_inbox[report.worker].post(std::nullopt);
      ++retired;
      emit(PoolEvent::Kind::kRetire, report.worker, -1);
    }
  }
  for (auto& t : workers) t.join();
  if (failure) throw *failure;
  return composer.take();
}

RenderResult render_ray_tiles(const AmrTree& tree, const Camera& cam, std::string_view field, RayMode mode,
                              unsigned workers, int tile_size) {
  cam.validate();
  const std::size_t f = tree.field_index(field);
  const int cap = level_cap(cam, tree.box_len(), tree.levelmin(), tree.levelmax());
  const std::vector<WorkUnit> units = plan_tiles(cam.nx, cam.ny, tile_size);
  return run_pool(
      units, cam.nx, cam.ny, mode,
      [&](const WorkUnit& u) { return render_ray_rect(tree, cam, f, cap, mode, u.tile); }, {workers, {}});
}

RenderResult render_ray_domains(const std::filesystem::path& base, const Camera& cam, std::string_view field,
                                RayMode mode, unsigned workers) {
  cam.validate();
  const DatasetHeader h = read_header(base);
  std::size_t f = h.fields.size();
  for (std::size_t i = 0; i < h.fields.size(); ++i) {
    if (h.fields[i].name == field) f = i;
  }
  if (f == h.fields.size()) throw UnknownFieldError(std::string(field));
  const int cap = level_cap(cam, h.box_len, h.levelmin, h.levelmax);
  const std::vector<WorkUnit> units = plan_domains(h.ndomains());
  return run_pool(
      units, cam.nx, cam.ny, mode,
      [&](const WorkUnit& u) {
        ReadOptions ro;
        ro.max_level = cap;
        const AmrTree part = read_domain(base, u.domain, ro);
        return render_ray_rect(part, cam, f, cap, mode, {0, 0, cam.nx, cam.ny});
      },
      {workers, {}});
}

std::vector<BenchRow> benchmark(const std::function<void(unsigned)>& render_once,
                                std::span<const unsigned> worker_counts, int repetitions) {
  if (repetitions < 1) throw ArgumentError("benchmark: repetitions must be at least 1");
  std::map<unsigned, double> medians;
  auto measure = [&](unsigned workers) {
    if (auto it = medians.find(workers); it != medians.end()) return it->second;
    std::vector<double> times;
    for (int r = 0; r < repetitions; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      render_once(workers);
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    const double median = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
    medians[workers] = median;
    return median;
  };
  for (unsigned w : worker_counts) {
    if (w < 1) throw ArgumentError("benchmark: worker counts must be at least 1");
  }
  const double serial = measure(1);
  std::vector<BenchRow> rows;
  for (unsigned w : worker_counts) {
    const double t = measure(w);
    rows.push_back({w, t, w == 1 ? 1.0 : serial / t});
  }
  return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out = "workers,median_seconds,speedup\n";
  char line[128];
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof(line), "%u,%.6f,%.4f\n", r.workers, r.median_seconds, r.speedup);
    out += line;
  }
  return out;
}

unsigned workers_from_env(unsigned fallback) {
  if (const char* env = std::getenv("AMR_RENDER_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  return fallback;
}

}  // namespace amrender
