#include "sieve/service/http_server.hpp"

#include <httplib.h>

#include <chrono>

namespace sieve::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

json summary(const protocol::RunRecord& r) {
  auto j = protocol::to_json(r);
  j.erase("telemetry");
  return j;
}

// Maps service exceptions onto status codes.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const NotFound& e) {
    send_error(res, 404, "NotFound", e.what());
  } catch (const EngineBusy& e) {
    send_error(res, 409, "EngineBusy", e.what());
  } catch (const protocol::NotRunning& e) {
    send_error(res, 409, "NotRunning", e.what());
  } catch (const ConfigLocked& e) {
    send_error(res, 409, "ConfigLocked", e.what());
  } catch (const SchemaViolation& e) {
    send_error(res, 422, "SchemaViolation", e.what());
  } catch (const InvalidProfile& e) {
    send_error(res, 400, "InvalidProfile", e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

json parse_body(const httplib::Request& req) { return json::parse(req.body); }

}  // namespace

struct HttpServer::Impl {
  explicit Impl(RunService& s) : svc(s) {}

  RunService& svc;
  httplib::Server server;
  std::atomic<bool> stopping{false};

  void routes();
  void events(const httplib::Request& req, httplib::Response& res);
};

void HttpServer::Impl::routes() {
  server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body;
      try {
        body = parse_body(req);
      } catch (const json::parse_error& e) {
        throw InvalidProfile(std::string("body is not JSON: ") + e.what());
      }
      const auto id = svc.start_run(body);
      send_json(res, 202, {{"id", id}, {"status", "Running"}});
    });
  });

  server.Get("/runs", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      RunFilter f;
      if (req.has_param("profile")) f.profile = req.get_param_value("profile");
      if (req.has_param("protocol")) f.protocol = req.get_param_value("protocol");
      if (req.has_param("status")) {
        try {
          f.status = protocol::parse_run_status(req.get_param_value("status"));
        } catch (const ConfigError& e) {
          throw InvalidProfile(e.what());
        }
      }
      json runs = json::array();
      for (const auto& r : svc.list_runs(f)) runs.push_back(summary(r));
      send_json(res, 200, {{"runs", runs}});
    });
  });

  server.Get(R"(/runs/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, protocol::to_json(svc.get_run(req.matches[1]))); });
  });

  server.Get(R"(/runs/([A-Za-z0-9_-]+)/report\.csv)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(svc.report_csv(req.matches[1]), "text/csv");
    });
  });

  server.Post(R"(/runs/([A-Za-z0-9_-]+)/abort)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      svc.abort(id);
      send_json(res, 202, {{"id", id}, {"status", "Aborting"}});
    });
  });

  server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.state()); });
  });

  server.Get("/config", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      const auto c = svc.get_config();
      send_json(res, 200, {{"version", c.version}, {"config", c.document}});
    });
  });

  server.Put("/config", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body;
      try {
        body = parse_body(req);
      } catch (const json::parse_error& e) {
        throw SchemaViolation(std::string("body is not JSON: ") + e.what());
      }
      const auto c = svc.put_config(body);
      send_json(res, 200, {{"version", c.version}, {"config", c.document}});
    });
  });

  server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) { events(req, res); });
}

void HttpServer::Impl::events(const httplib::Request& req, httplib::Response& res) {
  const std::string run = req.has_param("run") ? req.get_param_value("run") : std::string{};
  std::shared_ptr<Subscription> sub;
  try {
    sub = svc.subscribe(run);
  } catch (const NotFound& e) {
    send_error(res, 404, "NotFound", e.what());
    return;
  }
  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider(
      "text/event-stream",
      [this, sub, run](std::size_t, httplib::DataSink& sink) {
        using namespace std::chrono_literals;
        while (!stopping.load()) {
          auto msg = sub->next(250ms);
          if (!msg) {
            if (sub->closed()) break;
            if (!sink.is_writable()) return false;
            continue;
          }
          const auto j = json::parse(*msg);
          std::string frame;
          if (j.contains("seq") && j.at("type") == "telemetry") frame += "id: " + std::to_string(j.at("seq").get<std::uint64_t>()) + "\n";
          frame += "event: " + j.value("type", std::string("message")) + "\n";
          frame += "data: " + *msg + "\n\n";
          if (!sink.write(frame.data(), frame.size())) return false;
          // A per-run live stream ends with the run.
          if (!run.empty() && j.value("phase", std::string{}) == "end") break;
          return true;
        }
        sink.done();
        return true;
      },
      [this, sub](bool) { svc.hub().unsubscribe(sub); });
}

HttpServer::HttpServer(RunService& svc) : impl_(std::make_unique<Impl>(svc)) { impl_->routes(); }

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace sieve::service
