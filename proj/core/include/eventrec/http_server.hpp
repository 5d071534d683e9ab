#pragma once

// Thin HTTP front end that forwards every request to a Service.

#include <memory>
#include <string>
#include <thread>

#include "eventrec/service.hpp"

namespace eventrec {

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port; throws
  // InvalidConfig when binding fails.
  int bind(const std::string& host, int port);
  // Serves on the bound socket until stop() is called.
  void run();
  // bind + run on a background thread; returns once accepting.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread worker_;
};

}  // namespace eventrec
