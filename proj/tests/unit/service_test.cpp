// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "httplib.h"

#include "json.hpp"
#include <sstream>
#include <thread>

#include "amrender/cli.hpp"
#include "amrender/dataset_io.hpp"
#include "amrender/generator.hpp"
#include "amrender/image.hpp"
#include "amrender/service.hpp"
#include "oracles.hpp"

namespace amrender {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class Service : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("service"));
    GeneratorParams p;
    p.levelmax = 5;
    write_dataset(generate_synthetic(p), *dir_ / "disk", 2);
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.workers = 2;
    cfg.pixel_budget = 256 * 256;
    service_ = make_service((*dir_ / "disk").string(), cfg).release();
    port_ = service_->bind();
    thread_ = new std::thread([] { service_->run(); });
  }
  static void TearDownTestSuite() {
    service_->stop();
    thread_->join();
    delete thread_;
    delete service_;
  }
  static httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }
  static httplib::Result render(const json& body) {
    return client().Post("/render", body.dump(), "application/json");
  }

  static fs::path* dir_;
  static RenderService* service_;
  static std::thread* thread_;
  static int port_;
};
fs::path* Service::dir_ = nullptr;
RenderService* Service::service_ = nullptr;
std::thread* Service::thread_ = nullptr;
int Service::port_ = 0;

TEST_F(Service, Health) {
  auto res = client().Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, "ok");
}

TEST_F(Service, Info) {
  auto res = client().Get("/info");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["levelmax"], 5);
  EXPECT_EQ(j["ndomains"], 2);
  EXPECT_EQ(j["workers"], 2);
  EXPECT_EQ(j["pixel_budget"], 256 * 256);
  EXPECT_EQ(j["node_count"], read_header(*dir_ / "disk").record_count());
}

TEST_F(Service, RenderMatchesCliBytes) {
  const json req = {{"camera", {{"nx", 40}, {"ny", 30}, {"view", {0, 1, 0}}, {"up", {0, 0, 1}}}},
                    {"mode", "ray-sum"},
                    {"blur", 0.5},
                    {"colormap", "heat"}};
  auto res = render(req);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(res->get_header_value("X-Level-Cap"), "5");
  EXPECT_FALSE(res->get_header_value("X-Render-Ms").empty());

  const fs::path req_file = *dir_ / "req.json";
  const std::string text = req.dump();
  write_file(req_file, std::vector<std::uint8_t>(text.begin(), text.end()));
  std::ostringstream out, err;
  const fs::path png = *dir_ / "cli.png";
  ASSERT_EQ(cli_main({"render", "--dataset", (*dir_ / "disk").string(), "--request", req_file.string(), "--out",
                      png.string(), "--workers", "3"},
                     out, err),
            kExitOk)
      << err.str();
  const auto cli_bytes = read_file(png);
  EXPECT_EQ(std::string(cli_bytes.begin(), cli_bytes.end()), res->body);
}

TEST_F(Service, ZoomingInRaisesTheLevelCap) {
  int previous = -1;
  for (double extent : {1.0, 0.5, 0.25}) {
    auto res = render({{"camera", {{"nx", 8}, {"ny", 8}, {"extent", extent}}}, {"output", "fmap"}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const int cap = std::stoi(res->get_header_value("X-Level-Cap"));
    if (previous >= 0) EXPECT_EQ(cap, previous + 1);
    previous = cap;
    const std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
    EXPECT_EQ(decode_fmap(bytes).nx(), 8);
  }
}

void expect_error(const httplib::Result& res, int status, const std::string& code) {
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, status);
  EXPECT_EQ(res->get_header_value("X-Error-Code"), code);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["error"], code);
  EXPECT_FALSE(j["message"].get<std::string>().empty());
}

TEST_F(Service, Errors) {
  expect_error(client().Post("/render", "{not json", "application/json"), 400, "bad_request");
  expect_error(render({{"mode", "volume"}}), 400, "bad_request");
  expect_error(render({{"camera", {{"nx", 0}}}}), 400, "bad_request");
  expect_error(render({{"field", "temperature"}}), 404, "unknown_field");
  expect_error(render({{"camera", {{"nx", 257}, {"ny", 256}}}}), 413, "pixel_budget_exceeded");
  expect_error(client().Get("/nothing"), 404, "not_found");
}

TEST_F(Service, ConcurrentRequestsAgree) {
  const json req = {{"camera", {{"nx", 32}, {"ny", 32}}}, {"output", "fmap"}};
  std::vector<std::string> bodies(6);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    threads.emplace_back([&, i] {
      auto res = render(req);
      if (res && res->status == 200) bodies[i] = res->body;
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& b : bodies) {
    EXPECT_FALSE(b.empty());
    EXPECT_EQ(b, bodies[0]);
  }
}

}  // namespace
}  // namespace amrender
