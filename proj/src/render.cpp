// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/render.hpp"

#include <cmath>
#include <limits>

#include "amrender/errors.hpp"
#include "amrender/parallel.hpp"
#include "amrender/raycast.hpp"

namespace amrender {

using nlohmann::json;

namespace {

Vec3 parse_vec3(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) throw ArgumentError(std::string("'") + key + "' must be an array of 3 numbers");
  Vec3 v;
  for (int a = 0; a < 3; ++a) {
    if (!j[static_cast<std::size_t>(a)].is_number()) {
      throw ArgumentError(std::string("'") + key + "' must be an array of 3 numbers");
    }
    v[a] = j[static_cast<std::size_t>(a)].get<double>();
  }
  return v;
}

template <class T>
T number(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  const json& v = obj[key];
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ArgumentError(std::string("'") + key + "' must be an integer");
  } else {
    if (!v.is_number()) throw ArgumentError(std::string("'") + key + "' must be a number");
  }
  return v.get<T>();
}

std::string text(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  if (!obj[key].is_string()) throw ArgumentError(std::string("'") + key + "' must be a string");
  return obj[key].get<std::string>();
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

std::string to_string(RenderMode m) {
  switch (m) {
    case RenderMode::kRaySum:
      return "ray-sum";
    case RenderMode::kRayMip:
      return "ray-mip";
    case RenderMode::kSplat:
      return "splat";
  }
  return "?";
}

std::string to_string(OutputFormat f) { return f == OutputFormat::kPng ? "png" : "fmap"; }

void RenderRequest::validate(std::size_t pixel_budget) const {
  camera.validate();
  splat.validate();
  if (!(blur >= 0.0) || !std::isfinite(blur)) throw ArgumentError("blur must be >= 0");
  if (tile_size < 1) throw ArgumentError("tile_size must be at least 1");
  if (tone.vmin && tone.vmax && !(*tone.vmin < *tone.vmax)) throw ArgumentError("vmin must be below vmax");
  if (tone.scale == ToneScale::kLog10 && tone.vmin && !(*tone.vmin > 0.0)) {
    throw ArgumentError("log10 scale needs a positive vmin");
  }
  const auto pixels = static_cast<std::size_t>(camera.nx) * static_cast<std::size_t>(camera.ny);
  if (pixels > pixel_budget) {
    throw BudgetError("image of " + std::to_string(pixels) + " pixels exceeds the budget of " +
                      std::to_string(pixel_budget));
  }
}

Camera parse_camera(const json& j) {
  if (!j.is_object()) throw ArgumentError("camera must be a JSON object");
  Camera c;
  if (j.contains("center")) c.center = parse_vec3(j["center"], "center");
  if (j.contains("view")) c.view = parse_vec3(j["view"], "view");
  if (j.contains("up")) c.up = parse_vec3(j["up"], "up");
  if (!(norm(c.view) > 0.0) || !(norm(c.up) > 0.0)) throw ArgumentError("camera: view and up must be non-zero");
  c.view = normalized(c.view);
  c.up = normalized(c.up);
  c.extent = number(j, "extent", c.extent);
  c.depth = number(j, "depth", c.depth);
  c.nx = number(j, "nx", c.nx);
  c.ny = number(j, "ny", c.ny);
  c.validate();
  return c;
}

json to_json(const Camera& c) {
  return {{"center", vec_json(c.center)}, {"view", vec_json(c.view)}, {"up", vec_json(c.up)},
          {"extent", c.extent},           {"depth", c.depth},         {"nx", c.nx},
          {"ny", c.ny}};
}

RenderRequest parse_render_request(const json& j) {
  if (!j.is_object()) throw ArgumentError("request must be a JSON object");
  RenderRequest r;
  if (j.contains("camera")) r.camera = parse_camera(j["camera"]);

  const std::string mode = text(j, "mode", "ray-sum");
  if (mode == "ray-sum") {
    r.mode = RenderMode::kRaySum;
  } else if (mode == "ray-mip") {
    r.mode = RenderMode::kRayMip;
  } else if (mode == "splat") {
    r.mode = RenderMode::kSplat;
  } else {
    throw ArgumentError("unknown mode '" + mode + "'");
  }

  r.field = text(j, "field", r.field);
  r.blur = number(j, "blur", r.blur);

  const std::string scale = text(j, "scale", "log10");
  if (scale == "log10") {
    r.tone.scale = ToneScale::kLog10;
  } else if (scale == "linear") {
    r.tone.scale = ToneScale::kLinear;
  } else {
    throw ArgumentError("unknown scale '" + scale + "'");
  }
  if (j.contains("vmin") && !j["vmin"].is_null()) r.tone.vmin = number(j, "vmin", 0.0);
  if (j.contains("vmax") && !j["vmax"].is_null()) r.tone.vmax = number(j, "vmax", 0.0);

  const std::string cmap = text(j, "colormap", "gray");
  if (cmap == "gray") {
    r.tone.colormap = Colormap::kGray;
  } else if (cmap == "heat") {
    r.tone.colormap = Colormap::kHeat;
  } else {
    throw ArgumentError("unknown colormap '" + cmap + "'");
  }

  const std::string output = text(j, "output", "png");
  if (output == "png") {
    r.output = OutputFormat::kPng;
  } else if (output == "fmap") {
    r.output = OutputFormat::kFmap;
  } else {
    throw ArgumentError("unknown output '" + output + "'");
  }

  if (j.contains("splat")) {
    const json& s = j["splat"];
    if (!s.is_object()) throw ArgumentError("'splat' must be an object");
    r.splat.kernel_width = number(s, "kernel_width", r.splat.kernel_width);
    r.splat.shift_amplitude = number(s, "shift", r.splat.shift_amplitude);
    r.splat.seed = number<std::uint64_t>(s, "seed", r.splat.seed);
  }
  r.tile_size = number(j, "tile_size", r.tile_size);
  return r;
}

json to_json(const RenderRequest& r) {
  json j = {{"camera", to_json(r.camera)},
            {"mode", to_string(r.mode)},
            {"field", r.field},
            {"blur", r.blur},
            {"scale", r.tone.scale == ToneScale::kLog10 ? "log10" : "linear"},
            {"colormap", r.tone.colormap == Colormap::kGray ? "gray" : "heat"},
            {"output", to_string(r.output)},
            {"splat", {{"kernel_width", r.splat.kernel_width}, {"shift", r.splat.shift_amplitude}, {"seed", r.splat.seed}}},
            {"tile_size", r.tile_size}};
  if (r.tone.vmin) j["vmin"] = *r.tone.vmin;
  if (r.tone.vmax) j["vmax"] = *r.tone.vmax;
  return j;
}

json dataset_info(const DatasetHeader& h) {
  json fields = json::array();
  for (const auto& f : h.fields) fields.push_back({{"name", f.name}, {"conservative", f.conservative}});
  return {{"format", "PAMR"},   {"version", h.version},           {"ndim", h.ndim},
          {"levelmin", h.levelmin}, {"levelmax", h.levelmax},     {"box_len", h.box_len},
          {"fields", fields},   {"ndomains", h.ndomains()},       {"node_count", h.record_count()},
          {"domain_records", h.domain_records}};
}

RenderOutput execute_request(const AmrTree& tree, const RenderRequest& req, unsigned workers) {
  req.validate(std::numeric_limits<std::size_t>::max());
  const std::size_t field = tree.field_index(req.field);
  const Camera& cam = req.camera;

  RenderOutput out;
  out.level_cap = level_cap(cam, tree.box_len(), tree.levelmin(), tree.levelmax());
  if (req.mode == RenderMode::kSplat) {
    out.map = render_splat(tree, cam, req.field, req.splat);
  } else {
    const RayMode mode = req.mode == RenderMode::kRaySum ? RayMode::kSum : RayMode::kMip;
    RenderResult r = render_ray_tiles(tree, cam, tree.fields()[field].name, mode, workers, req.tile_size);
    if (req.blur > 0.0) {
      BlurOptions blur;
      blur.strength = req.blur;
      out.map = adaptive_blur(r.map, r.levels, cam, tree.box_len(), blur);
    } else {
      out.map = std::move(r.map);
    }
  }

  if (req.output == OutputFormat::kPng) {
    out.bytes = encode_png(tonemap(out.map, req.tone));
    out.content_type = "image/png";
  } else {
    out.bytes = encode_fmap(out.map);
    out.content_type = "application/octet-stream";
  }
  return out;
}

int request_level_cap(const DatasetHeader& h, const RenderRequest& req) {
  return level_cap(req.camera, h.box_len, h.levelmin, h.levelmax);
}

RenderOutput render_dataset(const std::filesystem::path& base, const RenderRequest& req, unsigned workers) {
  const DatasetHeader h = read_header(base);
  bool known = false;
  for (const auto& f : h.fields) known = known || f.name == req.field;
  if (!known) throw UnknownFieldError(req.field);
  ReadOptions ro;
  ro.max_level = request_level_cap(h, req);
  ro.threads = workers;
  const AmrTree tree = read_dataset(base, ro);
  return execute_request(tree, req, workers);
}

}  // namespace amrender
