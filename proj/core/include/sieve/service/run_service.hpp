#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "sieve/data_paths.hpp"
#include "sieve/errors.hpp"
#include "sieve/protocol/executor.hpp"
#include "sieve/service/config_store.hpp"
#include "sieve/service/event_hub.hpp"
#include "sieve/service/run_store.hpp"

namespace sieve::service {

class EngineBusy : public std::runtime_error {
 public:
  EngineBusy() : std::runtime_error("engine is busy with another run") {}
};

class InvalidProfile : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A parsed POST /runs body.
struct StartRequest {
  protocol::InputType input_type{protocol::InputType::SoilSample};
  std::optional<protocol::ProtocolKind> protocol;  // defaults from input_type
  nlohmann::json profile;                          // name, path or inline document
  std::uint64_t seed{1};
  double speed{0.0};
};

// Throws InvalidProfile on malformed requests.
StartRequest parse_start_request(const nlohmann::json& body);

// The single instrument: one run at a time, executed on a dedicated thread
// fed through an ordered command queue. Handlers on other threads only read
// snapshots or enqueue commands.
class RunService {
 public:
  RunService(DataDir data, std::filesystem::path store_dir);
  ~RunService();
  RunService(const RunService&) = delete;
  RunService& operator=(const RunService&) = delete;

  // Returns the new run id. Throws EngineBusy or InvalidProfile.
  std::string start_run(const nlohmann::json& body);
  // Throws NotFound for unknown ids, protocol::NotRunning when the run is not
  // the active one or is already aborting.
  void abort(const std::string& id);

  protocol::RunRecord get_run(const std::string& id) const;
  std::vector<protocol::RunRecord> list_runs(const RunFilter& f = {}) const;
  std::string report_csv(const std::string& id) const;

  nlohmann::json state() const;
  VersionedConfig get_config() const;
  VersionedConfig put_config(const nlohmann::json& doc);

  // Live subscription for the active run or all runs; a finished run id gives
  // its full stored event list and then ends. Throws NotFound.
  std::shared_ptr<Subscription> subscribe(const std::string& run_id = {});
  bool run_is_terminal(const std::string& id) const;

  // Blocks until no run is active or the timeout expires; true when idle.
  bool wait_idle(std::chrono::milliseconds timeout) const;
  bool busy() const;
  void shutdown();

  EventHub& hub() { return hub_; }

 private:
  struct Job {
    protocol::RunRequest request;
    protocol::EngineConfig engine;
  };

  void worker();
  nlohmann::json snapshot_locked() const;

  DataDir data_;
  RunStore store_;
  ConfigStore config_;
  EventHub hub_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<Job> queue_;
  std::optional<std::string> active_;
  std::shared_ptr<protocol::Executor> executor_;
  nlohmann::json machine_;
  std::uint64_t last_seq_{0};
  bool pending_abort_{false};
  bool stopping_{false};
  std::thread thread_;
};

}  // namespace sieve::service
