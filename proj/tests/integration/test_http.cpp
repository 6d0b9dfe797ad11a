#include <gtest/gtest.h>

#include <httplib.h>

#include <map>
#include <sstream>
#include <thread>

#include "sieve/service/http_server.hpp"
#include "sieve/service/run_service.hpp"
#include "test_support.hpp"

using namespace sieve;
using namespace sieve::service;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

struct SseFrame {
  std::string id;
  std::string event;
  json data;
};

std::vector<SseFrame> parse_sse(const std::string& text) {
  std::vector<SseFrame> out;
  std::size_t pos = 0;
  while (true) {
    const auto end = text.find("\n\n", pos);
    if (end == std::string::npos) break;
    SseFrame f;
    std::istringstream block(text.substr(pos, end - pos));
    std::string line;
    while (std::getline(block, line)) {
      if (line.rfind("id: ", 0) == 0) f.id = line.substr(4);
      if (line.rfind("event: ", 0) == 0) f.event = line.substr(7);
      if (line.rfind("data: ", 0) == 0) f.data = json::parse(line.substr(6));
    }
    out.push_back(std::move(f));
    pos = end + 2;
  }
  return out;
}

class Http : public ::testing::Test {
 protected:
  void SetUp() override {
    svc_ = std::make_unique<RunService>(fixtures::shipped_data(), dir_.path());
    server_ = std::make_unique<HttpServer>(*svc_);
    port_ = server_->bind("127.0.0.1", 0);
    server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60, 0);
  }
  void TearDown() override {
    server_->stop();
    svc_->shutdown();
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  std::string start(double speed = 0.0, const std::string& protocol = "cyst") {
    auto r = post("/runs", {{"input_type", "SoilSample"}, {"protocol", protocol}, {"profile", "muscatine"},
                            {"speed", speed}});
    EXPECT_EQ(r->status, 202);
    return json::parse(r->body).at("id");
  }

  std::string events(const std::string& query) {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    std::string body;
    auto r = c.Get("/events" + query, [&](const char* d, std::size_t n) {
      body.append(d, n);
      return true;
    });
    EXPECT_TRUE(r);
    if (r) EXPECT_EQ(r->get_header_value("Content-Type"), "text/event-stream");
    return body;
  }

  fixtures::TempDir dir_;
  std::unique_ptr<RunService> svc_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_{0};
};

}  // namespace

TEST_F(Http, StartRunAndFetchRecord) {
  const auto id = start();
  ASSERT_TRUE(svc_->wait_idle(30s));
  auto r = client_->Get("/runs/" + id);
  ASSERT_EQ(r->status, 200);
  const auto rec = json::parse(r->body);
  EXPECT_EQ(rec.at("status"), "Completed");
  EXPECT_EQ(rec.at("end_ms").get<std::int64_t>() - rec.at("start_ms").get<std::int64_t>(), 140000);
  EXPECT_FALSE(rec.at("telemetry").empty());
}

TEST_F(Http, ListOmitsTelemetryAndFilters) {
  start();
  ASSERT_TRUE(svc_->wait_idle(30s));
  auto r = client_->Get("/runs?status=Completed&profile=muscatine");
  ASSERT_EQ(r->status, 200);
  const auto runs = json::parse(r->body).at("runs");
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_FALSE(runs[0].contains("telemetry"));
  EXPECT_TRUE(json::parse(client_->Get("/runs?protocol=egg")->body).at("runs").empty());
  EXPECT_EQ(client_->Get("/runs?status=Sleeping")->status, 400);
}

TEST_F(Http, ReportCsv) {
  const auto id = start();
  ASSERT_TRUE(svc_->wait_idle(30s));
  auto r = client_->Get("/runs/" + id + "/report.csv");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "text/csv");
  EXPECT_EQ(r->body.substr(0, r->body.find('\n')), "run_id,protocol,profile,seed,status,duration_ms,output,count");
}

TEST_F(Http, BusyAbortAndErrors) {
  const auto id = start(5.0);
  auto busy = post("/runs", {{"input_type", "SoilSample"}});
  EXPECT_EQ(busy->status, 409);
  EXPECT_EQ(json::parse(busy->body).at("error"), "EngineBusy");

  auto locked = client_->Put("/config", json::parse(client_->Get("/config")->body).at("config").dump(),
                             "application/json");
  EXPECT_EQ(locked->status, 409);
  EXPECT_EQ(json::parse(locked->body).at("error"), "ConfigLocked");

  auto ab = post("/runs/" + id + "/abort", json::object());
  EXPECT_EQ(ab->status, 202);
  EXPECT_EQ(json::parse(ab->body).at("status"), "Aborting");
  ASSERT_TRUE(svc_->wait_idle(30s));
  EXPECT_EQ(json::parse(client_->Get("/runs/" + id)->body).at("status"), "Aborted");

  auto again = post("/runs/" + id + "/abort", json::object());
  EXPECT_EQ(again->status, 409);
  EXPECT_EQ(json::parse(again->body).at("error"), "NotRunning");
  EXPECT_EQ(post("/runs/run-424242/abort", json::object())->status, 404);
  EXPECT_EQ(client_->Get("/runs/run-424242")->status, 404);
}

TEST_F(Http, MalformedBodies) {
  auto r = client_->Post("/runs", "{not json", "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body).at("error"), "InvalidProfile");
  r = post("/runs", {{"input_type", "SoilSample"}, {"profile", "atlantis"}});
  EXPECT_EQ(r->status, 400);
  r = client_->Put("/config", "[1,2]", "application/json");
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(json::parse(r->body).at("error"), "SchemaViolation");
}

TEST_F(Http, ConfigRoundTripBumpsVersion) {
  auto got = json::parse(client_->Get("/config")->body);
  EXPECT_EQ(got.at("version"), 1);
  auto doc = got.at("config");
  doc["tick_ms"] = 200;
  auto put = client_->Put("/config", doc.dump(), "application/json");
  ASSERT_EQ(put->status, 200);
  EXPECT_EQ(json::parse(put->body).at("version"), 2);
  EXPECT_EQ(json::parse(client_->Get("/config")->body).at("config").at("tick_ms"), 200);
  EXPECT_EQ(json::parse(client_->Get("/state")->body).at("config_version"), 2);
}

TEST_F(Http, StateSnapshotShape) {
  auto r = client_->Get("/state");
  ASSERT_EQ(r->status, 200);
  const auto s = json::parse(r->body);
  for (const auto* key : {"engine", "active_run", "last_seq", "config_version", "machine"}) {
    EXPECT_TRUE(s.contains(key)) << key;
  }
  EXPECT_EQ(s.at("engine"), "Idle");
}

TEST_F(Http, PerRunStreamOrderedAndTerminates) {
  const auto id = start(40.0);
  const auto frames = parse_sse(events("?run=" + id));
  ASSERT_GE(frames.size(), 3u);
  EXPECT_EQ(frames.front().event, "snapshot");
  EXPECT_TRUE(frames.front().id.empty());
  std::uint64_t prev = frames.front().data.at("last_seq");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    ASSERT_EQ(frames[i].event, "telemetry");
    const auto seq = frames[i].data.at("seq").get<std::uint64_t>();
    EXPECT_EQ(seq, prev + 1);
    EXPECT_EQ(frames[i].id, std::to_string(seq));
    prev = seq;
  }
  EXPECT_EQ(frames.back().data.at("phase"), "end");
}

TEST_F(Http, TwoSubscribersSeeIdenticalStreams) {
  std::string a, b;
  const auto id = start(30.0);
  std::thread ta([&] { a = events("?run=" + id); });
  std::thread tb([&] { b = events("?run=" + id); });
  ta.join();
  tb.join();
  auto fa = parse_sse(a), fb = parse_sse(b);
  ASSERT_FALSE(fa.empty());
  ASSERT_FALSE(fb.empty());
  // Each may join at a different point; after the snapshot the overlap must agree.
  std::map<std::string, json> by_id;
  for (const auto& f : fa) {
    if (!f.id.empty()) by_id[f.id] = f.data;
  }
  std::size_t overlap = 0;
  for (const auto& f : fb) {
    if (f.id.empty() || !by_id.count(f.id)) continue;
    EXPECT_EQ(by_id[f.id], f.data);
    ++overlap;
  }
  EXPECT_GT(overlap, 0u);
  EXPECT_EQ(fa.back().data.at("phase"), "end");
  EXPECT_EQ(fb.back().data.at("phase"), "end");
}

TEST_F(Http, FinishedRunReplaysAndUnknownIs404) {
  const auto id = start();
  ASSERT_TRUE(svc_->wait_idle(30s));
  const auto frames = parse_sse(events("?run=" + id));
  const auto rec = svc_->get_run(id);
  ASSERT_EQ(frames.size(), rec.telemetry.size());
  EXPECT_EQ(frames.front().id, "1");
  EXPECT_EQ(frames.back().data.at("phase"), "end");
  EXPECT_EQ(client_->Get("/events?run=run-999999")->status, 404);
}

TEST_F(Http, UnknownRouteIs404) { EXPECT_EQ(client_->Get("/nothing")->status, 404); }
