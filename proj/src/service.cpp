// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/service.hpp"

#include <httplib.h>

#include <chrono>
#include <string>

#include "amrender/errors.hpp"

namespace amrender {

using nlohmann::json;

struct RenderService::Impl {
  AmrTree tree;
  DatasetHeader header;
  ServiceConfig config;
  httplib::Server server;

  static void fail(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    res.status = status;
    res.set_header("X-Error-Code", code);
    res.set_content(json{{"error", code}, {"message", message}}.dump() + "\n", "application/json");
  }

  void handle_render(const httplib::Request& req, httplib::Response& res) {
    const auto t0 = std::chrono::steady_clock::now();
    RenderRequest request;
    try {
      request = parse_render_request(json::parse(req.body));
      request.validate(config.pixel_budget);
      if (!tree.has_field(request.field)) throw UnknownFieldError(request.field);
    } catch (const json::exception& e) {
      return fail(res, 400, "bad_request", std::string("malformed JSON: ") + e.what());
    } catch (const BudgetError& e) {
      return fail(res, 413, "pixel_budget_exceeded", e.what());
    } catch (const UnknownFieldError& e) {
      return fail(res, 404, "unknown_field", e.what());
    } catch (const ArgumentError& e) {
      return fail(res, 400, "bad_request", e.what());
    }
    try {
      const RenderOutput out = execute_request(tree, request, config.workers);
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      res.status = 200;
      res.set_header("X-Level-Cap", std::to_string(out.level_cap));
      res.set_header("X-Render-Ms", std::to_string(static_cast<long long>(ms + 0.5)));
      res.set_content(reinterpret_cast<const char*>(out.bytes.data()), out.bytes.size(), out.content_type);
    } catch (const std::exception& e) {
      fail(res, 500, "internal_error", e.what());
    }
  }
};

RenderService::RenderService(AmrTree tree, DatasetHeader header, ServiceConfig config)
    : impl_(std::make_unique<Impl>()) {
  impl_->tree = std::move(tree);
  impl_->header = std::move(header);
  impl_->config = std::move(config);
  Impl* self = impl_.get();

  auto& srv = impl_->server;
  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
  srv.Get("/info", [self](const httplib::Request&, httplib::Response& res) {
    json info = dataset_info(self->header);
    info["workers"] = self->config.workers;
    info["pixel_budget"] = self->config.pixel_budget;
    res.set_content(info.dump() + "\n", "application/json");
  });
  srv.Post("/render",
           [self](const httplib::Request& req, httplib::Response& res) { self->handle_render(req, res); });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) Impl::fail(res, 404, "not_found", "no such endpoint");
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    Impl::fail(res, 500, "internal_error", what);
  });
}

RenderService::~RenderService() { stop(); }

int RenderService::bind() {
  auto& srv = impl_->server;
  const auto& cfg = impl_->config;
  int port = cfg.port;
  if (port == 0) {
    port = srv.bind_to_any_port(cfg.host);
  } else if (!srv.bind_to_port(cfg.host, port)) {
    port = -1;
  }
  if (port < 0) throw IoError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  return port;
}

void RenderService::run() { impl_->server.listen_after_bind(); }

void RenderService::stop() {
  if (impl_) impl_->server.stop();
}

const DatasetHeader& RenderService::header() const { return impl_->header; }

std::unique_ptr<RenderService> make_service(const std::string& base, const ServiceConfig& config) {
  DatasetHeader h = read_header(base);
  ReadOptions ro;
  ro.threads = config.workers;
  AmrTree tree = read_dataset(base, ro);
  return std::make_unique<RenderService>(std::move(tree), std::move(h), config);
}

}  // namespace amrender
