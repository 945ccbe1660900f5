#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

#include "specmon/api.hpp"
#include "specmon/monitor.hpp"

using namespace specmon;
using nlohmann::json;

TEST_CASE("API over HTTP") {
  Store store(":memory:");
  SiteRecord a;
  a.site_id = "alpha";
  store.upsert_site(a);
  WallClock clock;
  ApiService service(store, clock, ApiConfig{kDay, 100, 1000, HashStrength::minimal});
  ApiServer server(service, "127.0.0.1", 0);
  const int port = server.start();
  REQUIRE(port > 0);

  httplib::Client cli("127.0.0.1", port);
  auto r = cli.Post("/api/signup", R"({"username":"ann","password":"hunter2hunter2"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  r = cli.Post("/api/login", R"({"username":"ann","password":"hunter2hunter2"})", "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 200);
  const std::string token = json::parse(r->body)["token"];

  r = cli.Get("/api/sites");
  REQUIRE(r);
  CHECK(r->status == 401);
  httplib::Headers h{{"Authorization", "Bearer " + token}};
  r = cli.Get("/api/sites", h);
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type").find("application/json") != std::string::npos);
  CHECK(json::parse(r->body)[0]["site_id"] == "alpha");

  r = cli.Get("/api/au?site_id=alpha&date_from=2024-01-01", h);
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["total"] == 0);
  r = cli.Get("/api/graph/weekly-mean?site_id=alpha", h);
  REQUIRE(r);
  CHECK(r->status == 200);
  r = cli.Delete("/api/sites", h);
  REQUIRE(r);
  CHECK(r->status == 405);

  // concurrent readers
  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", port);
      for (int i = 0; i < 10; ++i) {
        auto res = c.Get("/api/ops/status", h);
        if (res && res->status == 200) ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 40);
  server.stop();
}

TEST_CASE("webhook client posts JSON") {
  httplib::Server hook;
  std::string got_body, got_type;
  hook.Post("/hook", [&](const httplib::Request& req, httplib::Response& res) {
    got_body = req.body;
    got_type = req.get_header_value("Content-Type");
    res.status = 204;
  });
  hook.Post("/down", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = hook.bind_to_any_port("127.0.0.1");
  std::thread t([&] { hook.listen_after_bind(); });
  hook.wait_until_ready();

  HttpWebhookClient client(std::chrono::seconds{2});
  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  CHECK(client.post(base + "/hook", R"({"a":1})") == 204);
  CHECK(got_body == R"({"a":1})");
  CHECK(got_type.find("application/json") != std::string::npos);
  CHECK(client.post(base + "/down", "{}") == 500);
  hook.stop();
  t.join();
  CHECK(client.post(base + "/hook", "{}") < 0);
}
