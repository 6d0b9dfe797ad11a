#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "sieve/service/run_service.hpp"

namespace sieve::service {

// HTTP+JSON front end over a RunService; see API.md for the contract.
class HttpServer {
 public:
  explicit HttpServer(RunService& svc);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the port; port 0 picks a free one. Throws
  // std::runtime_error when the address is unavailable.
  int bind(const std::string& host, int port);
  // Serves until stop(); blocking.
  void listen();
  // Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace sieve::service
