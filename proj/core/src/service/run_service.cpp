#include "sieve/service/run_service.hpp"

#include <filesystem>
#include <fstream>

#include "sieve/mechanism/snapshot.hpp"

namespace sieve::service {

using nlohmann::json;
using protocol::RunRecord;

StartRequest parse_start_request(const json& body) {
  if (!body.is_object()) throw InvalidProfile("request body must be a JSON object");
  StartRequest r;
  try {
    r.input_type = protocol::parse_input_type(body.at("input_type").get<std::string>());
    if (body.contains("protocol") && !body.at("protocol").is_null()) {
      r.protocol = protocol::parse_protocol_kind(body.at("protocol").get<std::string>());
    }
    r.profile = body.value("profile", json("muscatine"));
    r.seed = body.value("seed", r.seed);
    r.speed = body.value("speed", r.speed);
  } catch (const json::exception& e) {
    throw InvalidProfile(std::string("run request: ") + e.what());
  } catch (const ConfigError& e) {
    throw InvalidProfile(e.what());
  }
  if (!(r.speed >= 0.0)) throw InvalidProfile("speed must be >= 0");
  if (r.protocol && *r.protocol == protocol::ProtocolKind::Egg && r.input_type == protocol::InputType::SoilSample) {
    throw InvalidProfile("egg extraction needs a CystSample input");
  }
  if (r.protocol && *r.protocol != protocol::ProtocolKind::Egg && r.input_type == protocol::InputType::CystSample) {
    throw InvalidProfile("a CystSample input only runs egg extraction");
  }
  return r;
}

RunService::RunService(DataDir data, std::filesystem::path store_dir)
    : data_(std::move(data)),
      store_(store_dir),
      config_(store_dir, [&] {
        std::ifstream in(data_.config());
        if (!in) throw ConfigError("cannot open " + data_.config().string());
        return json::parse(in);
      }()),
      machine_(mech::to_json(mech::cyst_layout())) {
  hub_.set_snapshot(snapshot_locked());
  thread_ = std::thread([this] { worker(); });
}

RunService::~RunService() { shutdown(); }

void RunService::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    stopping_ = true;
    if (executor_ && active_ && executor_->running()) {
      try {
        executor_->abort();
      } catch (const protocol::NotRunning&) {
      }
    }
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  hub_.close_all();
}

std::string RunService::start_run(const json& body) {
  const auto req = parse_start_request(body);
  model::SampleProfile profile;
  try {
    if (req.profile.is_string()) {
      const auto name = req.profile.get<std::string>();
      if (name.find('/') != std::string::npos) throw InvalidProfile("profile must be a shipped name or inline");
      profile = data_.profile(name);
    } else {
      profile = model::profile_from_json(req.profile);
    }
  } catch (const InvalidProfile&) {
    throw;
  } catch (const ConfigError& e) {
    throw InvalidProfile(e.what());
  }

  std::lock_guard lock(mu_);
  if (stopping_) throw EngineBusy();
  if (active_) throw EngineBusy();
  const auto cfg = config_.get().parsed;
  Job job;
  job.engine = cfg.engine;
  job.engine.params = data_.params_or_default(profile.label, cfg.soil, cfg.method);
  job.request.run_id = store_.next_id();
  job.request.kind = req.protocol.value_or(protocol::default_protocol(req.input_type));
  job.request.profile = profile;
  job.request.seed = req.seed;
  job.request.speed = req.speed;

  RunRecord pending;
  pending.id = job.request.run_id;
  pending.protocol = std::string(protocol::to_string(job.request.kind));
  pending.input_type = std::string(protocol::to_string(req.input_type));
  pending.profile = profile.label;
  pending.seed = req.seed;
  pending.speed = req.speed;
  pending.script = std::string(protocol::to_string(protocol::build_protocol(job.request.kind, cfg.engine.timing).name));
  pending.status = protocol::RunStatus::Running;
  store_.append_started(pending);

  active_ = job.request.run_id;
  executor_ = std::make_shared<protocol::Executor>(job.engine);
  last_seq_ = 0;
  pending_abort_ = false;
  queue_.push_back(std::move(job));
  cv_.notify_all();
  return *active_;
}

void RunService::worker() {
  for (;;) {
    Job job;
    std::shared_ptr<protocol::Executor> exec;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      job = std::move(queue_.front());
      queue_.pop_front();
      exec = executor_;
    }
    const auto& id = job.request.run_id;
    RunRecord rec;
    auto sink = [&](const protocol::TelemetryEvent& e, const mech::MachineState& m) {
      json snap;
      json ev = protocol::to_json(e);
      ev["type"] = "telemetry";
      ev["machine"] = mech::to_json(m);
      bool abort_now = false;
      {
        std::lock_guard lock(mu_);
        machine_ = ev["machine"];
        last_seq_ = e.seq;
        snap = snapshot_locked();
        abort_now = (pending_abort_ || stopping_) && e.phase == "start";
        pending_abort_ = false;
      }
      hub_.publish(id, ev, snap);
      if (abort_now) exec->abort();
    };
    try {
      rec = exec->run(job.request, sink);
    } catch (const std::exception& e) {
      rec = store_.get(id);
      rec.status = protocol::RunStatus::Faulted;
      rec.reason = e.what();
    }
    // The pending record carries the request metadata the executor lacks.
    const auto pending = store_.get(id);
    rec.input_type = pending.input_type;
    {
      // Anyone who sees the terminal record must also see an idle engine.
      std::lock_guard lock(mu_);
      store_.append_record(rec);
      active_.reset();
      hub_.set_snapshot(snapshot_locked());
    }
    cv_.notify_all();
  }
}

void RunService::abort(const std::string& id) {
  store_.get(id);  // NotFound
  std::lock_guard lock(mu_);
  if (!active_ || *active_ != id || !executor_ || pending_abort_) throw protocol::NotRunning();
  if (!executor_->running()) {
    // Queued but not yet picked up: abort at its first event.
    pending_abort_ = true;
    return;
  }
  executor_->abort();
}

RunRecord RunService::get_run(const std::string& id) const { return store_.get(id); }

std::vector<RunRecord> RunService::list_runs(const RunFilter& f) const { return store_.list(f); }

std::string RunService::report_csv(const std::string& id) const { return protocol::run_report_csv(store_.get(id)); }

json RunService::snapshot_locked() const {
  return {{"type", "snapshot"},
          {"engine", active_ ? "Running" : "Idle"},
          {"active_run", active_ ? json(*active_) : json(nullptr)},
          {"last_seq", last_seq_},
          {"config_version", config_.get().version},
          {"machine", machine_}};
}

json RunService::state() const {
  std::lock_guard lock(mu_);
  auto s = snapshot_locked();
  s.erase("type");
  return s;
}

VersionedConfig RunService::get_config() const { return config_.get(); }

VersionedConfig RunService::put_config(const json& doc) {
  std::lock_guard lock(mu_);
  auto v = config_.put(doc, active_.has_value());
  hub_.set_snapshot(snapshot_locked());
  return v;
}

bool RunService::run_is_terminal(const std::string& id) const {
  return protocol::is_terminal(store_.get(id).status);
}

std::shared_ptr<Subscription> RunService::subscribe(const std::string& run_id) {
  if (!run_id.empty()) {
    const auto rec = store_.get(run_id);  // NotFound
    if (protocol::is_terminal(rec.status)) {
      std::vector<std::string> msgs;
      for (const auto& e : rec.telemetry) {
        auto j = protocol::to_json(e);
        j["type"] = "telemetry";
        msgs.push_back(j.dump());
      }
      return EventHub::replay(run_id, msgs);
    }
  }
  return hub_.subscribe(run_id);
}

bool RunService::wait_idle(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return !active_.has_value(); });
}

bool RunService::busy() const {
  std::lock_guard lock(mu_);
  return active_.has_value();
}

}  // namespace sieve::service
