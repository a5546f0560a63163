// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "amrender/amr_tree.hpp"
#include "amrender/camera.hpp"
#include "amrender/dataset_io.hpp"
#include "amrender/postfx.hpp"
#include "amrender/splat.hpp"

namespace amrender {

enum class RenderMode { kRaySum, kRayMip, kSplat };
enum class OutputFormat { kPng, kFmap };

inline constexpr std::size_t kDefaultPixelBudget = std::size_t{4096} * 4096;

/// Everything needed to turn a dataset into an output file.
struct RenderRequest {
  Camera camera;
  RenderMode mode = RenderMode::kRaySum;
  std::string field = "density";
  /// Adaptive blur strength; ray modes only.
  double blur = 0.0;
  ToneOptions tone;
  OutputFormat output = OutputFormat::kPng;
  SplatOptions splat;
  int tile_size = 32;

  /// Throws ArgumentError on invalid camera/options and BudgetError when
  /// nx * ny exceeds `pixel_budget`.
  void validate(std::size_t pixel_budget = kDefaultPixelBudget) const;
};

std::string to_string(RenderMode m);
std::string to_string(OutputFormat f);

/// Parses the JSON request schema; missing keys take defaults. Throws ArgumentError.
RenderRequest parse_render_request(const nlohmann::json& j);
nlohmann::json to_json(const RenderRequest& r);

/// {"center": [3], "view": [3], "up": [3], "extent", "depth", "nx", "ny"}.
/// View and up are normalized on input. Throws ArgumentError.
Camera parse_camera(const nlohmann::json& j);
nlohmann::json to_json(const Camera& c);

/// Header summary served by `/info` and printed by `info`.
nlohmann::json dataset_info(const DatasetHeader& h);

struct RenderOutput {
  std::vector<std::uint8_t> bytes;
  std::string content_type;
  int level_cap = 0;
  ScalarMap map;
};

/// Renders with level cap from the camera and the tree's levelmax; ray modes run
/// tile-parallel on `workers` threads. Throws UnknownFieldError, ArgumentError.
RenderOutput execute_request(const AmrTree& tree, const RenderRequest& req, unsigned workers);

/// Level cap a request resolves to for a dataset.
int request_level_cap(const DatasetHeader& h, const RenderRequest& req);

/// Reads only the levels the request needs, then renders.
RenderOutput render_dataset(const std::filesystem::path& base, const RenderRequest& req, unsigned workers);

}  // namespace amrender
