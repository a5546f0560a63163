// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "amrender/dataset_io.hpp"
#include "amrender/errors.hpp"
#include "amrender/generator.hpp"
#include "amrender/parallel.hpp"
#include "amrender/render.hpp"
#include "amrender/service.hpp"
#include "amrender/ucd.hpp"

namespace amrender {

using nlohmann::json;

namespace {

struct CameraFlags {
  std::vector<double> center;
  std::vector<double> view;
  std::vector<double> up;
  std::optional<double> extent;
  std::optional<double> depth;
  std::optional<int> nx;
  std::optional<int> ny;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--center", center, "Region of interest center x,y,z")->delimiter(',')->expected(3);
    cmd->add_option("--view", view, "Line of sight x,y,z")->delimiter(',')->expected(3);
    cmd->add_option("--up", up, "Up vector x,y,z")->delimiter(',')->expected(3);
    cmd->add_option("--extent", extent, "Field of view width");
    cmd->add_option("--depth", depth, "Slab thickness along the line of sight");
    cmd->add_option("--nx", nx, "Image width in pixels");
    cmd->add_option("--ny", ny, "Image height in pixels");
  }

  // Starts from the full-box view of the dataset, then applies `base` and the flags.
  json resolve(const DatasetHeader& h, json base) const {
    const Camera def = full_box_camera(h.box_len, 256, 256);
    json cam = to_json(def);
    if (base.is_object()) {
      for (auto& [k, v] : base.items()) cam[k] = v;
    }
    if (!center.empty()) cam["center"] = center;
    if (!view.empty()) cam["view"] = view;
    if (!up.empty()) cam["up"] = up;
    if (extent) cam["extent"] = *extent;
    if (depth) cam["depth"] = *depth;
    if (nx) cam["nx"] = *nx;
    if (ny) cam["ny"] = *ny;
    return cam;
  }
};

unsigned default_workers() { return workers_from_env(std::max(1u, std::thread::hardware_concurrency())); }

std::atomic<RenderService*> g_service{nullptr};

void on_signal(int) {
  if (RenderService* s = g_service.load()) s->stop();
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volume renderer for octree AMR datasets", "amrender"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic disk dataset in PAMR format");
  GeneratorParams gp;
  std::string gen_out;
  std::uint32_t gen_domains = 1;
  gen->add_option("--out", gen_out, "Output base path (writes <base>.pamr and <base>.dNNNNN)")->required();
  gen->add_option("--seed", gp.seed);
  gen->add_option("--levelmin", gp.levelmin);
  gen->add_option("--levelmax", gp.levelmax);
  gen->add_option("--box-len", gp.box_len);
  gen->add_option("--r-d", gp.r_d, "Disk scale radius (fraction of box)");
  gen->add_option("--z-d", gp.z_d, "Disk scale height (fraction of box)");
  gen->add_option("--rho0", gp.rho0);
  gen->add_option("--background", gp.background);
  gen->add_option("--m-ref", gp.m_ref, "Refinement mass threshold");
  gen->add_option("--ndomains", gen_domains, "Number of payload files");

  // render
  auto* render = app.add_subcommand("render", "Render a dataset to PNG or FMAP");
  std::string dataset;
  std::string render_out;
  std::string request_file;
  CameraFlags cam_flags;
  std::optional<std::string> mode, field, scale, colormap, output;
  std::optional<double> blur, vmin, vmax, kernel_width, shift;
  std::optional<std::uint64_t> splat_seed;
  std::optional<int> tile_size;
  std::optional<unsigned> workers;
  std::size_t budget = kDefaultPixelBudget;
  render->add_option("--dataset", dataset, "Dataset base path")->required();
  render->add_option("--out", render_out, "Output file")->required();
  render->add_option("--request", request_file, "JSON render request; flags override its keys");
  cam_flags.add_to(render);
  render->add_option("--mode", mode, "ray-sum | ray-mip | splat");
  render->add_option("--field", field);
  render->add_option("--blur", blur, "Adaptive blur strength (ray modes)");
  render->add_option("--scale", scale, "log10 | linear");
  render->add_option("--vmin", vmin);
  render->add_option("--vmax", vmax);
  render->add_option("--colormap", colormap, "gray | heat");
  render->add_option("--output", output, "png | fmap");
  render->add_option("--kernel-width", kernel_width, "Splat sigma per projected cell size");
  render->add_option("--shift", shift, "Splat random shift amplitude in cell sizes");
  render->add_option("--splat-seed", splat_seed);
  render->add_option("--tile-size", tile_size);
  render->add_option("--workers", workers);
  render->add_option("--budget", budget, "Maximum pixel count");

  // bench
  auto* bench = app.add_subcommand("bench", "Time renders for several worker counts, CSV output");
  std::string bench_dataset, bench_out, strategy = "tile", bench_mode = "ray-sum", bench_field = "density";
  std::vector<unsigned> bench_workers{1, 2, 4};
  int reps = 3;
  int bench_tile = 32;
  CameraFlags bench_cam;
  bench->add_option("--dataset", bench_dataset)->required();
  bench->add_option("--workers", bench_workers, "Comma-separated worker counts")->delimiter(',');
  bench->add_option("--reps", reps, "Repetitions per worker count (median reported)");
  bench->add_option("--strategy", strategy, "tile (compute only) | domain (end to end, includes reading)")
      ->check(CLI::IsMember({"tile", "domain"}));
  bench->add_option("--mode", bench_mode)->check(CLI::IsMember({"ray-sum", "ray-mip"}));
  bench->add_option("--field", bench_field);
  bench->add_option("--tile-size", bench_tile);
  bench->add_option("--out", bench_out, "CSV file (default: stdout)");
  bench_cam.add_to(bench);

  // export-ucd
  auto* ucd = app.add_subcommand("export-ucd", "Export the dual mesh as a legacy VTK unstructured grid");
  std::string ucd_dataset, ucd_out;
  std::optional<int> ucd_cap;
  std::vector<std::string> ucd_fields;
  ucd->add_option("--dataset", ucd_dataset)->required();
  ucd->add_option("--out", ucd_out)->required();
  ucd->add_option("--level-cap", ucd_cap, "Deepest level exported (default levelmax)");
  ucd->add_option("--fields", ucd_fields, "Comma-separated fields (default all)")->delimiter(',');

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP frame service");
  std::string serve_dataset;
  ServiceConfig scfg;
  std::optional<unsigned> serve_workers;
  serve->add_option("--dataset", serve_dataset)->required();
  serve->add_option("--port", scfg.port);
  serve->add_option("--host", scfg.host);
  serve->add_option("--workers", serve_workers);
  serve->add_option("--budget", scfg.pixel_budget, "Maximum pixel count per request");

  // info
  auto* info = app.add_subcommand("info", "Print the dataset header");
  std::string info_dataset;
  info->add_option("--dataset", info_dataset)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    if (*gen) {
      const AmrTree tree = generate_synthetic(gp);
      const DatasetHeader h = write_dataset(tree, gen_out, gen_domains);
      out << "wrote " << header_path(gen_out).string() << ": " << h.record_count() << " nodes, "
          << tree.leaf_count() << " leaves, " << h.ndomains() << " domains\n";
      return kExitOk;
    }

    if (*render) {
      const DatasetHeader h = read_header(dataset);
      json j = json::object();
      if (!request_file.empty()) {
        std::ifstream in(request_file);
        if (!in) throw IoError("cannot open " + request_file);
        j = json::parse(in);
      }
      j["camera"] = cam_flags.resolve(h, j.value("camera", json::object()));
      if (mode) j["mode"] = *mode;
      if (field) j["field"] = *field;
      if (blur) j["blur"] = *blur;
      if (scale) j["scale"] = *scale;
      if (vmin) j["vmin"] = *vmin;
      if (vmax) j["vmax"] = *vmax;
      if (colormap) j["colormap"] = *colormap;
      if (output) j["output"] = *output;
      if (tile_size) j["tile_size"] = *tile_size;
      if (kernel_width || shift || splat_seed) {
        json s = j.value("splat", json::object());
        if (kernel_width) s["kernel_width"] = *kernel_width;
        if (shift) s["shift"] = *shift;
        if (splat_seed) s["seed"] = *splat_seed;
        j["splat"] = s;
      }
      const RenderRequest req = parse_render_request(j);
      req.validate(budget);
      const RenderOutput result = render_dataset(dataset, req, workers.value_or(default_workers()));
      write_file(render_out, result.bytes);
      out << "wrote " << render_out << " (" << to_string(req.mode) << ", level cap " << result.level_cap << ")\n";
      return kExitOk;
    }

    if (*bench) {
      const DatasetHeader h = read_header(bench_dataset);
      const Camera cam = parse_camera(bench_cam.resolve(h, json::object()));
      const RayMode rm = bench_mode == "ray-sum" ? RayMode::kSum : RayMode::kMip;
      std::vector<BenchRow> rows;
      if (strategy == "tile") {
        ReadOptions ro;
        ro.max_level = level_cap(cam, h.box_len, h.levelmin, h.levelmax);
        const AmrTree tree = read_dataset(bench_dataset, ro);
        rows = benchmark([&](unsigned w) { render_ray_tiles(tree, cam, bench_field, rm, w, bench_tile); },
                         bench_workers, reps);
      } else {
        rows = benchmark([&](unsigned w) { render_ray_domains(bench_dataset, cam, bench_field, rm, w); },
                         bench_workers, reps);
      }
      const std::string csv = bench_csv(rows);
      if (bench_out.empty()) {
        out << csv;
      } else {
        std::ofstream f(bench_out);
        f << csv;
        if (!f) throw IoError("cannot write " + bench_out);
      }
      return kExitOk;
    }

    if (*ucd) {
      const DatasetHeader h = read_header(ucd_dataset);
      const int cap = std::min(ucd_cap.value_or(h.levelmax), h.levelmax);
      ReadOptions ro;
      ro.max_level = cap;
      const AmrTree tree = read_dataset(ucd_dataset, ro);
      const DualMesh mesh = build_dual_mesh(tree, cap);
      if (!write_vtk(mesh, ucd_out, ucd_fields)) err << "warning: dual mesh has no cells\n";
      out << "wrote " << ucd_out << ": " << mesh.points.size() << " points, " << mesh.hexahedra.size()
          << " hexahedra\n";
      return kExitOk;
    }

    if (*serve) {
      scfg.workers = serve_workers.value_or(default_workers());
      auto service = make_service(serve_dataset, scfg);
      const int port = service->bind();
      out << "serving " << serve_dataset << " on http://" << scfg.host << ":" << port << " with " << scfg.workers
          << " workers" << std::endl;
      g_service = service.get();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service->run();
      g_service = nullptr;
      return kExitOk;
    }

    if (*info) {
      const DatasetHeader h = read_header(info_dataset);
      out << "format     PAMR v" << h.version << "\n"
          << "box_len    " << h.box_len << "\n"
          << "levelmin   " << h.levelmin << "\n"
          << "levelmax   " << h.levelmax << "\n"
          << "fields     ";
      for (std::size_t i = 0; i < h.fields.size(); ++i) {
        out << (i ? ", " : "") << h.fields[i].name << (h.fields[i].conservative ? " (conservative)" : "");
      }
      out << "\n"
          << "ndomains   " << h.ndomains() << "\n"
          << "node_count " << h.record_count() << "\n";
      return kExitOk;
    }
  } catch (const UnknownFieldError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: malformed request: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace amrender
