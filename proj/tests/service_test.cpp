#include <gtest/gtest.h>
#include <sys/stat.h>

#include <httplib.h>

#include <thread>

#include "elfe/service.hpp"
#include "elfe/verifier.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace elfe;
using namespace elfe::service;
using nlohmann::json;

namespace {

Config config() {
  Config c;
  c.libDir = ELFE_LIB_DIR;
  return c;
}

std::string request(const std::string& text, json options = nullptr) {
  json j{{"text", text}};
  if (!options.is_null()) j["options"] = options;
  return j.dump();
}

}  // namespace

TEST(Service, VerifiesSamples) {
  Service s(config());
  auto r = s.handle("POST", "/api/verify", request(testdata::sample("injective")));
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.contentType, "application/json");
  auto j = json::parse(r.body);
  EXPECT_TRUE(j["verified"].get<bool>());
  EXPECT_FALSE(j["lines"].empty());
}

TEST(Service, SameReportAsTheLibrary) {
  Service s(config());
  auto text = testdata::sample("relations_wrong");
  auto j = json::parse(s.verify(request(text)).body);
  verifier::Options o;
  o.libPath = testdata::libPath();
  auto direct = json::parse(verifier::toJson(verifier::verifyText(text, o), false));
  j["ms"] = 0;
  for (auto& st : j["statements"]) st["ms"] = 0;
  EXPECT_EQ(j, direct);
}

TEST(Service, RejectsBadRequests) {
  Service s(config());
  EXPECT_EQ(s.verify("{not json").status, 400);
  EXPECT_EQ(s.verify("[]").status, 400);
  EXPECT_EQ(s.verify(R"({"text": 3})").status, 400);
  EXPECT_EQ(s.verify(request("", json{{"timeout", 0}})).status, 400);
  EXPECT_EQ(s.verify(request("", json{{"timeout", "5"}})).status, 400);
  EXPECT_EQ(s.verify(request("", json{{"provers", json::array({"nosuch"})}})).status, 400);
  EXPECT_EQ(s.verify(request("", json{{"provers", json::array()}})).status, 400);
  EXPECT_EQ(s.verify(request(std::string(70 * 1024, 'x'))).status, 400);
  auto err = json::parse(s.verify("{not json").body);
  EXPECT_TRUE(err.contains("error"));
}

TEST(Service, ProverSubsetByName) {
  Service s(config());
  auto r = s.verify(request(testdata::sample("relations_wrong"),
                            json{{"provers", json::array({"resolution"})}, {"timeout", 1}}));
  ASSERT_EQ(r.status, 200);
  // Without the model finder nothing can be refuted.
  for (const auto& st : json::parse(r.body)["statements"]) EXPECT_NE(st["status"], "Refuted");
}

TEST(Service, ParseErrorsAreReportsNotHttpErrors) {
  Service s(config());
  auto r = s.verify(request("Lemma: x ∈ A.\nProof:\n  Then x ∈ A\n"));
  ASSERT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  EXPECT_FALSE(j["verified"].get<bool>());
  EXPECT_EQ(j["statements"][0]["status"], "ParseError");
}

TEST(Service, CapacityLimit) {
  auto dir = std::filesystem::temp_directory_path() / "elfe-service-capacity";
  std::filesystem::create_directories(dir);
  auto script = dir / "slow.sh";
  std::ofstream(script) << "#!/bin/sh\nsleep 1\necho 'SZS status Theorem'\n";
  ::chmod(script.c_str(), 0755);
  Config c = config();
  c.maxConcurrent = 1;
  c.provers = {{"slow", provers::ProverKind::External, script.string() + " {file}",
                std::chrono::seconds(5)}};
  Service s(c);
  Response first;
  std::jthread t([&] { first = s.verify(request(testdata::sample("injective"))); });
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  EXPECT_EQ(s.verify(request("")).status, 503);
  t.join();
  EXPECT_EQ(first.status, 200);
  EXPECT_TRUE(json::parse(first.body)["verified"].get<bool>());
  // The slot is free again.
  EXPECT_EQ(s.verify(request("")).status, 200);
  std::filesystem::remove_all(dir);
}

TEST(Service, Libraries) {
  Service s(config());
  auto r = s.handle("GET", "/api/libraries", "");
  ASSERT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  std::vector<std::string> names;
  for (const auto& l : j) {
    names.push_back(l["name"]);
    EXPECT_NO_THROW(language::parse(l["source"].get<std::string>())) << l["name"];
  }
  EXPECT_EQ(names, (std::vector<std::string>{"functions", "relations", "sets"}));

  auto empty = std::filesystem::temp_directory_path() / "elfe-service-empty";
  std::filesystem::create_directories(empty);
  Config c = config();
  c.libDir = empty;
  EXPECT_EQ(Service(c).libraries().body, "[]");
  std::filesystem::remove_all(empty);
}

TEST(Service, Routing) {
  Service s(config());
  EXPECT_EQ(s.handle("GET", "/api/verify", "").status, 405);
  EXPECT_EQ(s.handle("POST", "/api/libraries", "").status, 405);
  EXPECT_EQ(s.handle("GET", "/api/unknown", "").status, 404);
  auto index = s.handle("GET", "/", "");
  EXPECT_EQ(index.status, 200);
  EXPECT_EQ(index.contentType.rfind("text/html", 0), 0u);
  EXPECT_EQ(s.handle("GET", "/some/editor/route", "").body, index.body);
}

TEST(Service, StaticFiles) {
  auto dir = std::filesystem::temp_directory_path() / "elfe-service-static";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "index.html") << "<html>app</html>";
  std::ofstream(dir / "app.js") << "run()";
  Config c = config();
  c.staticDir = dir;
  Service s(c);
  auto js = s.asset("/app.js");
  EXPECT_EQ(js.body, "run()");
  EXPECT_NE(js.contentType.find("javascript"), std::string::npos);
  EXPECT_EQ(s.asset("/missing").body, "<html>app</html>");
  EXPECT_EQ(s.asset("/../etc/passwd").body, "<html>app</html>");
  std::filesystem::remove_all(dir);
}

TEST(Service, OverHttp) {
  Service s(config());
  std::jthread server([&] { s.listen("127.0.0.1", 0); });
  for (int i = 0; i < 200 && s.port() == 0; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  ASSERT_NE(s.port(), 0);
  httplib::Client cli("127.0.0.1", s.port());
  cli.set_read_timeout(60, 0);
  auto libs = cli.Get("/api/libraries");
  ASSERT_TRUE(libs);
  EXPECT_EQ(libs->status, 200);
  auto res = cli.Post("/api/verify", request(testdata::sample("complement")), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_TRUE(json::parse(res->body)["verified"].get<bool>());
  auto bad = cli.Post("/api/verify", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  s.stop();
}
