// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <httplib.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "generators.hpp"
#include "sieve/errors.hpp"
#include "sieve/hal/trace.hpp"
#include "sieve/model/sieve.hpp"
#include "sieve/protocol/builders.hpp"
#include "sieve/protocol/config.hpp"
#include "sieve/protocol/executor.hpp"
#include "sieve/protocol/run_record.hpp"
#include "sieve/protocol/validate.hpp"
#include "sieve/sim/calibrate.hpp"
#include "sieve/sim/extinction.hpp"
#include "sieve/sim/process.hpp"
#include "sieve/sim/report_csv.hpp"
#include "test_support.hpp"

extern char** environ;

using namespace sieve;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool ok{true};
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(const std::string& name, const std::function<void(Verdict&)>& check) {
  Verdict v;
  const auto t0 = Clock::now();
  try {
    check(v);
  } catch (const std::exception& e) {
    v.ok = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!v.ok) ++failures;
  std::cout << (v.ok ? "PASS " : "FAIL ") << name << ":" << v.detail.str() << std::fixed << std::setprecision(1)
            << " (" << secs << " s)" << std::endl;
}

const DataDir& data() {
  static const DataDir d = fixtures::shipped_data();
  return d;
}

protocol::EngineConfig engine(const sim::ProcessParams& p) {
  auto cfg = protocol::load_config(data().config().string()).engine;
  cfg.params = p;
  return cfg;
}

protocol::RunRequest request(protocol::ProtocolKind k, const std::string& soil, std::uint64_t seed) {
  protocol::RunRequest r;
  r.run_id = "run-000001";
  r.kind = k;
  r.profile = data().profile(soil);
  r.seed = seed;
  return r;
}

void extinction_curves(Verdict& v) {
  struct Case {
    const char* soil;
    const char* method;
    double target;
  };
  const Case cases[] = {{"muscatine", "robotic", 77.8},
                        {"muscatine", "manual", 80.8},
                        {"nevada", "robotic", 66.8},
                        {"nevada", "manual", 73.0}};
  const auto t0 = Clock::now();
  for (const auto& c : cases) {
    sim::ExtinctionPlan plan;
    plan.soil = data().profile(c.soil);
    plan.method = c.method;
    plan.samples_n = 6;
    plan.iterations = 4;
    plan.replicates = 200;
    plan.seed = 1;
    plan.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto r = sim::run_extinction(plan, data().params(c.soil, c.method).params);
    const double iter1 = r.grand_iter1_mean();
    const double pass = r.cum2_pass_fraction(94.0);
    v.detail << std::fixed << std::setprecision(1) << " " << c.soil << "/" << c.method << " iter1=" << iter1
             << " (target " << c.target << ")" << " cum2>=94 in " << 100.0 * pass << "%;";
    v.require(std::abs(iter1 - c.target) <= 3.0, std::string(c.soil) + "/" + c.method + " iter1 outside +/-3 pp");
    v.require(pass >= 0.95, std::string(c.soil) + "/" + c.method + " cum2 pass fraction < 95%");
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.detail << " runtime " << std::setprecision(1) << secs << " s";
  v.require(secs < 60.0, "runtime >= 60 s");
}

void durations(Verdict& v) {
  const auto t = protocol::load_config(data().config().string()).engine.timing;
  const auto cyst = protocol::build_cyst_protocol(t);
  const auto egg = protocol::build_egg_protocol(t);
  std::int64_t grind_spray = 0;
  for (const auto& st : egg.steps) {
    if (std::holds_alternative<protocol::action::Grind>(st.action) ||
        std::holds_alternative<protocol::action::NozzleSpray>(st.action)) {
      grind_spray += st.duration_ms;
    }
  }
  // Simulated, not just declared: run both through the executor.
  protocol::Executor ex(engine({}));
  const auto rc = ex.run(request(protocol::ProtocolKind::Cyst, "muscatine", 1));
  const auto re = ex.run(request(protocol::ProtocolKind::Egg, "muscatine", 1));
  const auto cyst_ms = rc.end_ms - rc.start_ms, egg_ms = re.end_ms - re.start_ms;
  v.detail << " cyst " << cyst_ms << " ms, egg " << egg_ms << " ms, grind+spray " << grind_spray << " ms";
  v.require(cyst_ms == 140000 && cyst.expected_total_ms == 140000, "cyst != 140 s");
  v.require(egg_ms == 98000 && egg.expected_total_ms == 98000, "egg != 98 s");
  v.require(grind_spray == 3 * (10000 + 10000), "grind+spray != 60 s");
  v.require(rc.status == protocol::RunStatus::Completed && re.status == protocol::RunStatus::Completed,
            "run not completed");
}

void conservation(Verdict& v) {
  constexpr int kBatches = 10000;
  int broken = 0;
  for (int i = 0; i < kBatches; ++i) {
    auto rng = make_stream(8675309, {static_cast<std::uint64_t>(i)});
    const auto batch = fixtures::random_batch(rng);
    const auto p = fixtures::random_params(rng);
    const auto eggs = batch.egg_inventory();
    const auto s = sim::mix_and_settle(batch, p, rng.uniform(), rng);
    const auto d = sim::decant(s.suspended, model::standard_sieves(), p.decant_holdup, rng);
    std::uint64_t after_decant = d.drain.total();
    for (const auto& b : d.on_sieve) after_decant += b.total();
    auto on = batch, below = model::ParticleBatch{};
    sim::wash(on, model::Microns{250}, below, 30.0, p, rng);
    auto mesh = batch, under = model::ParticleBatch{};
    sim::RuptureLedger ledger;
    sim::grind_cycle(mesh, under, p, rng, ledger);
    const bool ok = s.suspended + s.sediment == batch && after_decant == s.suspended.total() &&
                    on.total() + below.total() == batch.total() &&
                    mesh.egg_inventory() + under.egg_inventory() + ledger.retained == eggs &&
                    mesh.total() + under.total() == batch.total() + ledger.released;
    if (!ok) ++broken;

    // Whole-iteration ledger on the same batch.
    model::SoilSample sample;
    sample.batch = batch;
    auto ws = sim::Workspace::from_sample(sample);
    sim::run_iteration(ws, p, {}, {static_cast<std::uint64_t>(i), 0, 0, 1});
    if (!ws.conserved()) ++broken;
  }
  v.detail << " " << kBatches << " random batches, " << broken << " conservation breaks;";
  v.require(broken == 0, "particle or egg ledger not conserved");

  int exact = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto* soil : {"muscatine", "nevada"}) {
      protocol::Executor ex(engine(sim::lossless_params()));
      const auto req = request(protocol::ProtocolKind::Full, soil, seed);
      const auto inventory = model::synthesize_sample(req.profile, seed).batch.egg_inventory();
      const auto rec = ex.run(req);
      if (rec.status == protocol::RunStatus::Completed && rec.output_counts.at("eggs") == inventory) ++exact;
    }
  }
  v.detail << " lossless full runs exact " << exact << "/40";
  v.require(exact == 40, "lossless run did not recover 100% of eggs");
}

bool is_motion(const hal::TraceLine& l) { return l.command == "step" || l.device == "servo"; }

void interlocks(Verdict& v) {
  constexpr std::uint64_t kCommands = 1000000;
  std::uint64_t accepted = 0, violations = 0;
  auto rng = make_stream(1618, {});
  mech::MachineState m = mech::cyst_layout();
  for (std::uint64_t i = 0; i < kCommands; ++i) {
    if (i % 200 == 0) m = (i / 200) % 2 ? mech::egg_layout() : mech::cyst_layout();
    const auto c = fixtures::random_command(rng);
    try {
      const auto next = mech::apply(m, c);
      ++accepted;
      if (!mech::check_invariants(next).empty()) ++violations;
      m = next;
    } catch (const mech::MechanismError&) {
    } catch (const DomainError&) {
    }
  }
  v.detail << " " << kCommands << " fuzzed commands, " << accepted << " accepted, " << violations
           << " invariant violations;";
  v.require(violations == 0, "fuzz broke an invariant");

  // Every validated script, shipped or mutated, runs clean.
  const auto timing = protocol::load_config(data().config().string()).engine.timing;
  int validated = 0, runtime_faults = 0;
  for (int trial = 0; trial < 600; ++trial) {
    auto r = make_stream(2718, {static_cast<std::uint64_t>(trial)});
    const auto kind = static_cast<protocol::ProtocolKind>(trial % 3);
    auto script = protocol::build_protocol(kind, timing);
    for (int e = trial < 3 ? 0 : fixtures::pick(r, 1, 3); e > 0 && script.steps.size() > 1; --e) {
      const auto i = static_cast<std::size_t>(fixtures::pick(r, 0, static_cast<int>(script.steps.size()) - 2));
      switch (r() % 3) {
        case 0: script.steps.erase(script.steps.begin() + static_cast<std::ptrdiff_t>(i)); break;
        case 1: std::swap(script.steps[i], script.steps[i + 1]); break;
        default: script.steps.insert(script.steps.begin() + static_cast<std::ptrdiff_t>(i), script.steps[i]);
      }
    }
    script.expected_total_ms = script.sum_ms();
    const auto start = protocol::initial_layout(kind);
    if (!protocol::validate_script(script, start).ok()) continue;
    ++validated;
    protocol::Executor ex(engine({}));
    protocol::RunRecord meta;
    meta.id = "fuzz";
    const auto rec = ex.execute(script, start, protocol::prepare_workspace(kind, data().profile("muscatine"), 1),
                                meta);
    if (rec.status != protocol::RunStatus::Completed) ++runtime_faults;
  }
  v.detail << " " << validated << " validated scripts, " << runtime_faults << " runtime faults;";
  v.require(validated >= 3 && runtime_faults == 0, "validated script faulted at runtime");

  // Abort at every step: on the device trace, power goes off before any motion.
  int aborts = 0, bad_order = 0, unsafe = 0;
  for (auto kind : {protocol::ProtocolKind::Cyst, protocol::ProtocolKind::Egg, protocol::ProtocolKind::Full}) {
    const auto n = static_cast<int>(protocol::build_protocol(kind, timing).steps.size());
    for (int step = 0; step < n; ++step) {
      protocol::Executor ex(engine({}));
      hal::TraceLog trace;
      std::size_t mark = 0;
      // Commands already due at the abort instant still go out; the safe
      // state starts at the "abort" event.
      auto sink = [&](const protocol::TelemetryEvent& e, const mech::MachineState&) {
        if (e.phase == "enter" && e.step == step) ex.abort();
        if (e.phase == "abort") mark = trace.size();
      };
      const auto rec = ex.run(request(kind, "muscatine", 1), sink, &trace);
      ++aborts;
      if (rec.status != protocol::RunStatus::Aborted) {
        ++unsafe;
        continue;
      }
      const auto& lines = trace.lines();
      bool motion_seen = false, drill_off = false;
      for (std::size_t i = mark; i < lines.size(); ++i) {
        if (is_motion(lines[i])) {
          if (!drill_off) ++bad_order;
          motion_seen = true;
        }
        if (lines[i].device == "relay2" && lines[i].value == "off") drill_off = true;
        if (lines[i].device.rfind("relay", 0) == 0 && motion_seen) {
          ++bad_order;
          break;
        }
      }
      if (!drill_off) ++bad_order;
      const auto ms = ex.machine();
      const auto& dev = ex.devices();
      const bool power_off = !dev.relays[0].on && !dev.relays[1].on && !dev.relays[2].on;
      if (!power_off || ms.grinder.rpm != 0.0 || !ms.grinder.raised() || ms.valves.drill || ms.valves.sprayer ||
          ms.valves.nozzle || !mech::check_invariants(ms).empty()) {
        ++unsafe;
      }
    }
  }
  v.detail << " " << aborts << " step aborts, " << bad_order << " motion-before-power-off, " << unsafe << " unsafe";
  v.require(bad_order == 0 && unsafe == 0, "abort safe-state ordering");
}

void determinism(Verdict& v) {
  int records = 0, mismatches = 0;
  for (auto kind : {protocol::ProtocolKind::Cyst, protocol::ProtocolKind::Egg, protocol::ProtocolKind::Full}) {
    for (std::uint64_t seed : {1u, 7u, 123u}) {
      std::string rec[2], tr[2];
      for (int i = 0; i < 2; ++i) {
        protocol::Executor ex(engine(data().params("muscatine", "robotic").params));
        hal::TraceLog trace;
        rec[i] = protocol::format_record(ex.run(request(kind, "nevada", seed), {}, &trace));
        for (const auto& l : trace.lines()) tr[i] += hal::format_line(l) + "\n";
      }
      ++records;
      if (rec[0] != rec[1] || tr[0] != tr[1]) ++mismatches;
    }
  }
  v.detail << " " << records << " record/trace pairs, " << mismatches << " differ;";
  v.require(mismatches == 0, "run records or traces differ");

  std::string base;
  int thread_mismatch = 0;
  for (int threads : {1, 2, 4, 8}) {
    sim::ExtinctionPlan plan;
    plan.soil = data().profile("muscatine");
    plan.replicates = 24;
    plan.seed = 11;
    plan.threads = threads;
    const auto r = sim::run_extinction(plan, data().params("muscatine", "robotic").params);
    const auto csv = sim::per_iteration_csv(r) + sim::summary_csv(r);
    if (base.empty()) base = csv;
    else if (csv != base) ++thread_mismatch;
  }
  v.detail << " extinction CSV identical across 1/2/4/8 threads: " << (thread_mismatch == 0 ? "yes" : "no");
  v.require(thread_mismatch == 0, "thread count changed the report");
}

void calibration(Verdict& v) {
  // Arithmetic oracle: (cum2 - iter1) / (100 - iter1).
  const double oracle = (0.94 - 0.668) / (1.0 - 0.668);
  const auto t = sim::load_targets(data().targets("nevada-robotic").string());
  const auto r = sim::calibrate(t, data().profile(t.soil), {},
                                static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  v.detail << std::fixed << std::setprecision(4) << " nevada bound " << r.conditional_capture_bound << " (oracle "
           << oracle << "), achieved conditional capture " << r.achieved_conditional_capture << ", iter1 "
           << std::setprecision(2) << r.achieved_iter1 << ", cum2 pass " << r.achieved_pass_fraction;
  v.require(std::abs(r.conditional_capture_bound - oracle) < 1e-9, "bound differs from oracle");
  v.require(std::abs(r.conditional_capture_bound - 0.819) < 0.0005, "bound is not 0.819");
  v.require(r.achieved_conditional_capture >= r.conditional_capture_bound, "fit below the bound");
  v.require(r.residual <= 3.0, "fit misses iter1 target");
  bool threw = false;
  try {
    const auto bad = sim::load_targets(data().targets("contradictory").string());
    sim::calibrate(bad, data().profile(bad.soil));
  } catch (const sim::CalibrationError&) {
    threw = true;
  }
  v.detail << "; contradictory targets rejected: " << (threw ? "yes" : "no");
  v.require(threw, "contradictory targets accepted");
}

// A `sievectl serve` child on a free port.
class Server {
 public:
  explicit Server(const std::string& store) {
    int fds[2];
    if (::pipe(fds) != 0) throw std::runtime_error("pipe");
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&fa, fds[0]);
    posix_spawn_file_actions_addopen(&fa, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
    std::vector<std::string> args{SIEVECTL_PATH, "--data-dir", SIEVE_TEST_DATA_DIR, "serve",
                                  "--port", "0", "--store", store};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    if (posix_spawn(&pid_, SIEVECTL_PATH, &fa, nullptr, argv.data(), environ) != 0) {
      throw std::runtime_error("spawn sievectl");
    }
    posix_spawn_file_actions_destroy(&fa);
    ::close(fds[1]);
    std::string line;
    char c;
    while (::read(fds[0], &c, 1) == 1 && c != '\n') line += c;
    ::close(fds[0]);
    port_ = json::parse(line).at("port");
  }
  ~Server() {
    if (pid_ > 0) kill9();
  }
  void kill9() {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

 private:
  pid_t pid_{-1};
  int port_{0};
};

json get_json(httplib::Client& c, const std::string& path) {
  auto r = c.Get(path);
  if (!r) throw std::runtime_error("GET " + path + " failed");
  return json::parse(r->body);
}

std::string start_run(httplib::Client& c, double speed, std::uint64_t seed) {
  const json body{{"input_type", "SoilSample"}, {"protocol", "full"}, {"profile", "muscatine"}, {"seed", seed},
                  {"speed", speed}};
  auto r = c.Post("/runs", body.dump(), "application/json");
  if (!r) throw std::runtime_error("POST /runs: " + httplib::to_string(r.error()));
  if (r->status != 202) throw std::runtime_error("POST /runs: " + std::to_string(r->status) + " " + r->body);
  return json::parse(r->body).at("id");
}

void wait_terminal(httplib::Client& c, const std::string& id) {
  for (int i = 0; i < 600; ++i) {
    const auto s = get_json(c, "/runs/" + id).at("status").get<std::string>();
    if (s != "Running" && s != "Pending") return;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  throw std::runtime_error(id + " never finished");
}

void durability(Verdict& v) {
  fixtures::TempDir store;
  std::map<std::string, json> terminal;
  int cycles = 0, lost = 0, changed = 0, in_flight_faulted = 0;
  for (int cycle = 0; cycle < 4; ++cycle) {
    Server srv(store.path().string());
    auto c = srv.client();
    // Everything recorded before the previous crash must come back unchanged.
    for (const auto& [id, rec] : terminal) {
      auto r = c.Get("/runs/" + id);
      if (!r || r->status != 200) {
        ++lost;
        continue;
      }
      if (json::parse(r->body) != rec) ++changed;
    }
    for (int k = 0; k < 3; ++k) {
      const auto id = start_run(c, 0.0, static_cast<std::uint64_t>(10 * cycle + k));
      wait_terminal(c, id);
      terminal[id] = get_json(c, "/runs/" + id);
    }
    // Leave a run in flight, then kill -9.
    const auto live = start_run(c, 1.0, 99);
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    srv.kill9();
    Server again(store.path().string());
    auto c2 = again.client();
    const auto rec = get_json(c2, "/runs/" + live);
    if (rec.at("status") == "Faulted") ++in_flight_faulted;
    terminal[live] = rec;
    again.kill9();
    ++cycles;
  }
  Server last(store.path().string());
  auto c = last.client();
  for (const auto& [id, rec] : terminal) {
    auto r = c.Get("/runs/" + id);
    if (!r || r->status != 200) ++lost;
    else if (json::parse(r->body) != rec) ++changed;
  }
  v.detail << " " << cycles << " kill -9 cycles, " << terminal.size() << " terminal records, " << lost << " lost, "
           << changed << " altered, " << in_flight_faulted << " in-flight runs closed as Faulted";
  v.require(lost == 0 && changed == 0, "terminal record lost or altered");
  v.require(in_flight_faulted == cycles, "interrupted run not closed as Faulted");
}

}  // namespace

int main() {
  std::cout << std::unitbuf;
  report("extinction-reproduction", extinction_curves);
  report("protocol-duration-law", durations);
  report("conservation", conservation);
  report("interlock-soundness", interlocks);
  report("determinism", determinism);
  report("calibration-bounds", calibration);
  report("durability", durability);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
