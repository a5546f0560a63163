// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "amrender/amr_tree.hpp"
#include "amrender/dataset_io.hpp"
#include "amrender/render.hpp"

namespace amrender {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port.
  int port = 8080;
  unsigned workers = 1;
  std::size_t pixel_budget = kDefaultPixelBudget;
};

/// HTTP frame service over one immutable dataset.
///
///   GET  /health  -> 200 "ok"
///   GET  /info    -> JSON header summary
///   POST /render  -> image bytes, headers X-Level-Cap and X-Render-Ms
///
/// Errors are JSON {"error": <code>, "message": <text>} with the same code in
/// an X-Error-Code header: bad_request (400), unknown_field (404), not_found
/// (404), pixel_budget_exceeded (413), internal_error (500).
class RenderService {
 public:
  RenderService(AmrTree tree, DatasetHeader header, ServiceConfig config);
  ~RenderService();
  RenderService(const RenderService&) = delete;
  RenderService& operator=(const RenderService&) = delete;

  /// Binds the listening socket and returns the port. Throws IoError.
  int bind();
  /// Serves until stop(); bind() must have succeeded.
  void run();
  void stop();

  const DatasetHeader& header() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads the whole dataset at `base`.
std::unique_ptr<RenderService> make_service(const std::string& base, const ServiceConfig& config);

}  // namespace amrender
