#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>

#include "sieve/errors.hpp"
#include "sieve/hal/device_bus.hpp"
#include "sieve/mechanism/machine_state.hpp"
#include "sieve/model/sample.hpp"
#include "sieve/protocol/builders.hpp"
#include "sieve/protocol/run_record.hpp"
#include "sieve/protocol/step_plan.hpp"
#include "sieve/protocol/timing.hpp"
#include "sieve/sim/params.hpp"
#include "sieve/sim/process.hpp"

namespace sieve::protocol {

class NotRunning : public std::runtime_error {
 public:
  NotRunning() : std::runtime_error("no run in progress") {}
};

// Raised before execution when the script fails static validation.
class InvalidScript : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct EngineConfig {
  TimingConfig timing;
  hal::HalConfig hal;
  sim::ProcessParams params;
  std::int64_t tick_ms{100};
};

enum class InputType { SoilSample, CystSample };

std::string_view to_string(InputType t);
InputType parse_input_type(std::string_view s);
// Soil goes through cyst extraction, cysts through egg extraction.
ProtocolKind default_protocol(InputType t);

struct RunRequest {
  std::string run_id{"run-000001"};
  ProtocolKind kind{ProtocolKind::Cyst};
  model::SampleProfile profile;
  std::uint64_t seed{1};
  // Virtual milliseconds per wall millisecond; 0 runs as fast as possible.
  double speed{0.0};
};

// Sample synthesis for a run. Cyst samples keep only the cysts of the profile
// and start on the #60 sieve.
sim::Workspace prepare_workspace(ProtocolKind kind, const model::SampleProfile& profile, std::uint64_t seed);

// Called for every telemetry event with the machine state at that moment.
using EventSink = std::function<void(const TelemetryEvent&, const mech::MachineState&)>;

// Owns the machine, device bus and process workspace of one run at a time.
// run() blocks the calling thread; abort() may be called from any thread,
// including from inside the event sink.
class Executor {
 public:
  explicit Executor(EngineConfig cfg);

  RunRecord run(const RunRequest& req, const EventSink& sink = {}, hal::TraceLog* trace = nullptr);
  // Same, with a caller-supplied script in place of the built-in one for
  // req.kind; the kind still picks the starting layout and sample.
  RunRecord run(const ProtocolScript& script, const RunRequest& req, const EventSink& sink = {},
                hal::TraceLog* trace = nullptr);

  // Lower-level entry: any script, any starting layout and workspace.
  RunRecord execute(const ProtocolScript& script, const mech::MachineState& initial, sim::Workspace ws,
                    RunRecord meta, const EventSink& sink = {}, hal::TraceLog* trace = nullptr);

  // Throws NotRunning unless a run is in progress and not already aborting.
  void abort();
  bool running() const { return phase_.load() != kIdle; }

  mech::MachineState machine() const;
  const sim::Workspace& workspace() const { return ws_; }
  const hal::DeviceState& devices() const { return bus_.state(); }
  const EngineConfig& config() const { return cfg_; }

 private:
  enum Phase : int { kIdle, kRunning, kAborting };
  struct Aborted {};

  void emit(RunRecord& rec, int step, std::string_view action, std::string_view phase, const EventSink& sink);
  void set_machine(const mech::MachineState& m);
  void advance(std::int64_t ms, bool abortable);
  void run_hook(const op::Sim& hook, int step, RunRecord& rec);
  void safe_state();

  EngineConfig cfg_;
  hal::SimulatedBus bus_;
  mech::MachineState machine_;
  mutable std::mutex machine_mu_;
  sim::Workspace ws_;
  std::uint64_t seed_{0};
  std::atomic<int> phase_{kIdle};
  double speed_{0.0};
};

}  // namespace sieve::protocol
