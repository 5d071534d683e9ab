#include "eventrec/http_server.hpp"

#include <httplib.h>

#include "eventrec/error.hpp"

namespace eventrec {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    const auto forward = [this](const httplib::Request& request, httplib::Response& response) {
      const auto result = service.handle(request.method, request.path, request.body);
      response.status = result.status;
      response.set_header("Access-Control-Allow-Origin", "*");
      response.set_content(result.body.dump(), "application/json");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Put(".*", forward);
    server.Delete(".*", forward);
    server.Options(".*", [](const httplib::Request&, httplib::Response& response) {
      response.set_header("Access-Control-Allow-Origin", "*");
      response.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      response.set_header("Access-Control-Allow-Headers", "Content-Type");
      response.status = 204;
    });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorKind::InvalidConfig, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::InvalidConfig, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  worker_ = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (worker_.joinable()) worker_.join();
}

}  // namespace eventrec
