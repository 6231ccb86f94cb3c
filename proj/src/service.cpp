#include "elfe/service.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "elfe/verifier.hpp"
#include "httplib.h"
#include "json.hpp"

namespace elfe::service {

namespace {

using nlohmann::json;

Response error(int status, const std::string& message) {
  return {status, "application/json", json{{"error", message}}.dump()};
}

std::optional<std::string> readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string mimeType(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> types = {
      {".html", "text/html; charset=utf-8"}, {".js", "text/javascript"},
      {".css", "text/css"},                  {".json", "application/json"},
      {".svg", "image/svg+xml"},             {".png", "image/png"},
      {".ico", "image/x-icon"},              {".woff2", "font/woff2"},
      {".map", "application/json"},          {".txt", "text/plain; charset=utf-8"},
  };
  auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

constexpr const char* kPlaceholder =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>Elfe</title></head>"
    "<body><p>The front-end is not built. POST text to /api/verify.</p></body></html>";

}  // namespace

struct Service::Server {
  httplib::Server http;
};

Service::Service(Config cfg) : cfg_(std::move(cfg)), server_(std::make_unique<Server>()) {
  if (cfg_.provers.empty())
    cfg_.provers = {provers::internalResolutionConfig(), provers::internalModelFinderConfig()};
}

Service::~Service() { stop(); }

Response Service::verify(std::string_view body) {
  if (body.size() > cfg_.maxBody) return error(400, "request larger than the size limit");
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error(400, "malformed JSON");
  }
  if (!req.is_object() || !req.contains("text") || !req["text"].is_string())
    return error(400, "expected {\"text\": string}");

  verifier::Options opts;
  opts.libPath = {cfg_.libDir};
  opts.provers = cfg_.provers;
  if (req.contains("options")) {
    const auto& o = req["options"];
    if (!o.is_object()) return error(400, "options must be an object");
    if (o.contains("timeout")) {
      if (!o["timeout"].is_number_integer() || o["timeout"].get<long>() <= 0)
        return error(400, "timeout must be a positive integer");
      opts.timeout = std::min(std::chrono::seconds(o["timeout"].get<long>()), cfg_.maxTimeout);
    }
    if (o.contains("provers")) {
      if (!o["provers"].is_array()) return error(400, "provers must be a list of names");
      std::vector<provers::ProverConfig> chosen;
      for (const auto& n : o["provers"]) {
        if (!n.is_string()) return error(400, "provers must be a list of names");
        auto it = std::find_if(cfg_.provers.begin(), cfg_.provers.end(),
                               [&](const auto& c) { return c.name == n.get<std::string>(); });
        if (it == cfg_.provers.end()) return error(400, "unknown prover '" + n.get<std::string>() + "'");
        chosen.push_back(*it);
      }
      if (chosen.empty()) return error(400, "no prover selected");
      opts.provers = std::move(chosen);
    }
  }

  if (active_.fetch_add(1) >= cfg_.maxConcurrent) {
    --active_;
    return error(503, "too many verifications in progress");
  }
  struct Release {
    std::atomic<std::size_t>& n;
    ~Release() { --n; }
  } release{active_};

  auto report = verifier::verifyText(req["text"].get<std::string>(), opts);
  return {200, "application/json", verifier::toJson(report)};
}

Response Service::libraries() const {
  json out = json::array();
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(cfg_.libDir, ec))
    if (e.is_regular_file() && e.path().extension() == ".elfe") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    if (auto src = readFile(f)) out.push_back({{"name", f.stem().string()}, {"source", *src}});
  return {200, "application/json", out.dump()};
}

Response Service::asset(std::string_view path) const {
  if (path == "/api" || path.starts_with("/api/")) return error(404, "not found");
  if (cfg_.staticDir) {
    std::string rel(path.substr(path.starts_with("/") ? 1 : 0));
    bool safe = rel.find("..") == std::string::npos;
    if (safe && !rel.empty()) {
      auto p = *cfg_.staticDir / rel;
      if (std::filesystem::is_regular_file(p))
        if (auto body = readFile(p)) return {200, mimeType(p), *body};
    }
    if (auto index = readFile(*cfg_.staticDir / "index.html"))
      return {200, "text/html; charset=utf-8", *index};
  }
  return {200, "text/html; charset=utf-8", kPlaceholder};
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  if (path == "/api/verify") {
    if (method != "POST") return error(405, "use POST");
    return verify(body);
  }
  if (path == "/api/libraries") {
    if (method != "GET") return error(405, "use GET");
    return libraries();
  }
  if (method != "GET" && method != "HEAD") return error(404, "not found");
  return asset(path);
}

bool Service::listen(const std::string& host, int port) {
  auto& http = server_->http;
  // Oversized bodies are rejected by verify() with 400; the transport cap
  // only guards against unbounded uploads.
  http.set_payload_max_length(cfg_.maxBody * 16);
  auto serve = [this](const httplib::Request& req, httplib::Response& res) {
    auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.contentType);
  };
  http.Get(".*", serve);
  http.Post(".*", serve);
  http.Put(".*", serve);
  http.Delete(".*", serve);
  http.Patch(".*", serve);
  if (port == 0) {
    int p = http.bind_to_any_port(host);
    if (p < 0) return false;
    port_ = p;
  } else {
    if (!http.bind_to_port(host, port)) return false;
    port_ = port;
  }
  return http.listen_after_bind();
}

void Service::stop() {
  server_->http.stop();
}

}  // namespace elfe::service
