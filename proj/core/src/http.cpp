// The only translation unit that includes httplib.

#include <httplib.h>

#include <spdlog/spdlog.h>

#include "specmon/api.hpp"
#include "specmon/error.hpp"
#include "specmon/monitor.hpp"

namespace specmon {

int HttpWebhookClient::post(const std::string& url, const std::string& body) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("webhook url lacks a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  const auto origin = slash == std::string::npos ? url : url.substr(0, slash);
  const auto path = slash == std::string::npos ? std::string("/") : url.substr(slash);
  httplib::Client cli(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  auto res = cli.Post(path, body, "application/json");
  if (!res) return -1;
  return res->status;
}

struct ApiServer::Impl {
  httplib::Server server;
};

namespace {

ApiRequest to_request(const httplib::Request& req) {
  ApiRequest r;
  r.method = req.method;
  r.path = req.path;
  for (const auto& [k, v] : req.params) r.query[k] = v;
  for (const auto& [k, v] : req.headers) r.headers[k] = v;
  r.body = req.body;
  return r;
}

}  // namespace

ApiServer::ApiServer(ApiService& service, std::string host, int port)
    : impl_(std::make_unique<Impl>()), host_(std::move(host)), port_(port) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto out = service.handle(to_request(req));
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
  impl_->server.Patch(".*", handler);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  if (port_ == 0) {
    port_ = impl_->server.bind_to_any_port(host_);
  } else if (!impl_->server.bind_to_port(host_, port_)) {
    throw IoError("cannot bind " + host_ + ":" + std::to_string(port_));
  }
  if (port_ <= 0) throw IoError("cannot bind " + host_);
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void ApiServer::run() {
  if (!impl_->server.listen(host_, port_)) throw IoError("cannot listen on " + host_ + ":" + std::to_string(port_));
}

void ApiServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace specmon
