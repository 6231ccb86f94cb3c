#pragma once

// HTTP front for the verifier:
//   POST /api/verify     {text, options: {timeout?, provers?}} -> report
//   GET  /api/libraries  [{name, source}]
//   GET  anything else   static front-end, index.html for unknown paths

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elfe/provers.hpp"

namespace elfe::service {

struct Config {
  std::filesystem::path libDir = "lib";
  // Available provers; requests may pick a subset by name.
  std::vector<provers::ProverConfig> provers;
  std::optional<std::filesystem::path> staticDir;
  std::size_t maxConcurrent = 4;
  std::size_t maxBody = 64 * 1024;
  std::chrono::seconds maxTimeout{60};
};

struct Response {
  int status = 200;
  std::string contentType = "application/json";
  std::string body;
};

class Service {
 public:
  explicit Service(Config cfg);
  ~Service();

  Response verify(std::string_view body);
  Response libraries() const;
  Response asset(std::string_view path) const;
  // Dispatch on method and path as the HTTP server does.
  Response handle(std::string_view method, std::string_view path, std::string_view body);

  // Binds and serves until stop(). port 0 picks a free port, reported
  // through port() once bound. False when binding fails.
  bool listen(const std::string& host, int port);
  int port() const { return port_; }
  void stop();

 private:
  Config cfg_;
  std::atomic<std::size_t> active_{0};
  std::atomic<int> port_{0};
  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace elfe::service
