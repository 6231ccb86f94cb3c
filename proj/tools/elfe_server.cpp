// HTTP service for the web front-end.

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "elfe/service.hpp"
#include "elfe/verifier.hpp"

namespace {
elfe::service::Service* running = nullptr;
void onSignal(int) {
  if (running) running->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serves /api/verify, /api/libraries and the front-end."};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string libDir, configPath, staticDir;
  std::size_t maxConcurrent = 4;
  if (const char* p = std::getenv("ELFE_PORT")) port = std::atoi(p);
  if (const char* s = std::getenv("ELFE_STATIC_DIR")) staticDir = s;
  if (const char* c = std::getenv("ELFE_PROVER_CONFIG")) configPath = c;
  app.add_option("--host", host, "Address to bind");
  app.add_option("--port", port, "Port (ELFE_PORT)");
  app.add_option("--lib", libDir, "Library directory (default: first of ELFE_LIB_PATH or ./lib)");
  app.add_option("--config", configPath, "Prover configuration (ELFE_PROVER_CONFIG)");
  app.add_option("--static", staticDir, "Built front-end (ELFE_STATIC_DIR)");
  app.add_option("--max-concurrent", maxConcurrent, "Verifications at the same time")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  elfe::service::Config cfg;
  if (!libDir.empty()) {
    cfg.libDir = libDir;
  } else {
    for (const auto& p : elfe::verifier::defaultLibraryPath())
      if (std::filesystem::is_directory(p)) {
        cfg.libDir = p;
        break;
      }
  }
  cfg.provers = {elfe::provers::internalResolutionConfig(),
                 elfe::provers::internalModelFinderConfig()};
  if (!configPath.empty()) {
    try {
      auto loaded = elfe::provers::loadProverConfigs(configPath);
      cfg.provers.insert(cfg.provers.end(), loaded.begin(), loaded.end());
    } catch (const std::exception& e) {
      std::cerr << "elfe-server: " << e.what() << "\n";
      return 2;
    }
  }
  if (!staticDir.empty()) cfg.staticDir = staticDir;
  cfg.maxConcurrent = maxConcurrent;
  elfe::provers::setMaxExternalProcesses(maxConcurrent * cfg.provers.size());

  elfe::service::Service svc(cfg);
  running = &svc;
  std::signal(SIGINT, onSignal);
  std::signal(SIGTERM, onSignal);
  std::cerr << "elfe-server: libraries from " << cfg.libDir << ", listening on " << host << ":"
            << port << "\n";
  if (!svc.listen(host, port)) {
    std::cerr << "elfe-server: cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}
