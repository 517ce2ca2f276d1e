#include <httplib.h>

#include <spdlog/spdlog.h>

#include "negograph/service.hpp"

namespace negograph {

namespace {

using json = nlohmann::json;

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    send(res, 200, f());
  } catch (const ServiceError& e) {
    send(res, e.status(), {{"v", NegotiationService::kVersion}, {"error", e.what()}});
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    send(res, 500, {{"v", NegotiationService::kVersion}, {"error", e.what()}});
  }
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(NegotiationService& s) : service(s) {}
  NegotiationService& service;
  httplib::Server server;
};

HttpServer::HttpServer(NegotiationService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  auto& srv = impl_->server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return svc.health(); });
  });
  srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.create_session(body_of(req)); });
  });
  srv.Post(R"(/sessions/([^/]+)/message)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.post_message(req.matches[1], body_of(req)); });
  });
  srv.Post(R"(/sessions/([^/]+)/action)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.post_action(req.matches[1], body_of(req)); });
  });
  srv.Get(R"(/sessions/([^/]+)/trace)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.trace(req.matches[1]); });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace negograph
