#include "sievectl/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sieve/data_paths.hpp"
#include "sieve/errors.hpp"
#include "sieve/hal/trace.hpp"
#include "sieve/protocol/config.hpp"
#include "sieve/protocol/executor.hpp"
#include "sieve/service/http_server.hpp"
#include "sieve/service/run_service.hpp"
#include "sieve/sim/calibrate.hpp"
#include "sieve/sim/extinction.hpp"
#include "sieve/sim/report_csv.hpp"

namespace sievectl {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sieve;

namespace {

struct RunOpts {
  std::string protocol{"cyst"};
  std::string profile{"muscatine"};
  std::string params;
  std::string config;
  std::string trace;
  std::string script;
  bool print_script{false};
  std::string run_id{"run-000001"};
  std::uint64_t seed{1};
  double speed{0.0};
};

struct ExtinctionOpts {
  std::string soil{"muscatine"};
  std::string method{"robotic"};
  std::string params;
  std::string out_dir;
  int samples{6};
  int iterations{4};
  int replicates{200};
  int threads{0};
  std::uint64_t seed{1};
};

struct CalibrateOpts {
  std::string targets;
  std::string out;
  int threads{0};
  int replicates{0};
};

struct ServeOpts {
  std::string host{"127.0.0.1"};
  int port{8080};
  std::string store{"sieve-store"};
};

struct ExportOpts {
  std::string record;
  std::string store;
  std::string id;
  std::string format{"json"};
};

int thread_count(int requested) {
  if (requested > 0) return requested;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
}

std::optional<protocol::ProtocolKind> kind_of(protocol::ScriptName n) {
  switch (n) {
    case protocol::ScriptName::CystExtraction: return protocol::ProtocolKind::Cyst;
    case protocol::ScriptName::EggExtraction: return protocol::ProtocolKind::Egg;
    case protocol::ScriptName::FullExtraction: return protocol::ProtocolKind::Full;
    case protocol::ScriptName::Custom: break;
  }
  return std::nullopt;
}

int cmd_run(const RunOpts& o, const DataDir& data, std::ostream& out, std::ostream& err) {
  auto kind = protocol::parse_protocol_kind(o.protocol);
  const auto cfg = protocol::load_config(o.config.empty() ? data.config().string() : o.config);
  auto script = protocol::build_protocol(kind, cfg.engine.timing);
  if (!o.script.empty()) {
    script = protocol::load_script(o.script);
    // A named script brings its own layout; custom ones use --protocol.
    if (const auto k = kind_of(script.name)) kind = *k;
  }
  if (o.print_script) {
    out << protocol::to_json(script).dump(2) << '\n';
    return kOk;
  }
  const auto profile = data.profile(o.profile);

  protocol::EngineConfig engine = cfg.engine;
  engine.params = o.params.empty() ? data.params_or_default(profile.label, cfg.soil, cfg.method)
                                   : sim::load_method_profile(o.params).params;

  protocol::RunRequest req;
  req.run_id = o.run_id;
  req.kind = kind;
  req.profile = profile;
  req.seed = o.seed;
  req.speed = o.speed;

  hal::TraceLog trace;
  protocol::Executor exec(engine);
  const auto rec = exec.run(script, req, {}, o.trace.empty() ? nullptr : &trace);
  if (!o.trace.empty()) write_file(o.trace, trace.str());

  out << protocol::format_record(rec) << '\n';
  err << rec.id << ": " << protocol::to_string(rec.status) << " after " << (rec.end_ms - rec.start_ms) / 1000.0
      << " s";
  for (const auto& [k, v] : rec.output_counts) err << ", " << k << "=" << v;
  if (!rec.reason.empty()) err << " (" << rec.reason << ")";
  err << '\n';
  return rec.status == protocol::RunStatus::Completed ? kOk : kFaulted;
}

int cmd_extinction(const ExtinctionOpts& o, const DataDir& data, std::ostream& out, std::ostream& err) {
  if (o.method != "robotic" && o.method != "manual") throw ConfigError("method must be robotic or manual");
  sim::ExtinctionPlan plan;
  plan.soil = data.profile(o.soil);
  plan.method = o.method;
  plan.samples_n = o.samples;
  plan.iterations = o.iterations;
  plan.replicates = o.replicates;
  plan.seed = o.seed;
  plan.threads = thread_count(o.threads);
  sim::validate(plan);

  const auto params =
      o.params.empty() ? data.params(plan.soil.label, o.method).params : sim::load_method_profile(o.params).params;
  const auto report = sim::run_extinction(plan, params);

  const auto summary = sim::summary_csv(report);
  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    const auto stem = report.soil + "-" + report.method;
    write_file(dir / (stem + "-per_iteration.csv"), sim::per_iteration_csv(report));
    write_file(dir / (stem + "-summary.csv"), summary);
  }
  out << summary;

  const auto& it1 = report.per_iteration.front();
  err << std::fixed << std::setprecision(1) << report.soil << "/" << report.method << ": iteration 1 recovery "
      << it1.mean_pct << " +/- " << it1.sd_pct << " % (n=" << report.samples.size() << ")";
  if (report.iterations >= 2) {
    err << ", cumulative through 2 = " << report.grand_cum2_mean() << " %, replicates >= 94 %: "
        << 100.0 * report.cum2_pass_fraction(94.0) << " %";
  }
  err << '\n';
  return kOk;
}

int cmd_calibrate(const CalibrateOpts& o, const DataDir& data, std::ostream& out, std::ostream& err) {
  auto targets = sim::load_targets(data.targets(o.targets).string());
  if (o.replicates > 0) targets.replicates = o.replicates;
  const auto soil = data.profile(targets.soil);
  const auto result = sim::calibrate(targets, soil, sim::ProcessParams{}, thread_count(o.threads));
  const auto doc = sim::to_json(sim::to_method_profile(targets, result)).dump(2) + "\n";
  if (o.out.empty()) {
    out << doc;
  } else {
    write_file(o.out, doc);
  }
  err << std::fixed << std::setprecision(2) << targets.label << ": f_suspend=" << result.params.f_suspend
      << " boost=" << result.params.suspend_boost << " iter1=" << result.achieved_iter1
      << " cum2=" << result.achieved_cum2 << " pass=" << result.achieved_pass_fraction
      << " residual=" << result.residual << " (" << result.evaluations << " evaluations)\n";
  return kOk;
}

int cmd_serve(const ServeOpts& o, const DataDir& data, std::ostream& out, std::ostream& err) {
  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop;
  sigemptyset(&stop);
  sigaddset(&stop, SIGINT);
  sigaddset(&stop, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop, nullptr);

  service::RunService svc(data, o.store);
  service::HttpServer http(svc);
  const int port = http.bind(o.host, o.port);
  http.start();
  out << json{{"host", o.host}, {"port", port}}.dump() << std::endl;
  err << "serving on http://" << o.host << ":" << port << " (store " << o.store << ")" << std::endl;

  int sig = 0;
  sigwait(&stop, &sig);
  err << "stopping" << std::endl;
  http.stop();
  svc.shutdown();
  return kOk;
}

int cmd_export(const ExportOpts& o, std::ostream& out) {
  protocol::RunRecord rec;
  if (!o.record.empty()) {
    std::ifstream f(o.record);
    if (!f) throw ConfigError("cannot open " + o.record);
    try {
      rec = protocol::run_record_from_json(json::parse(f));
    } catch (const json::exception& e) {
      throw ConfigError(o.record + ": " + e.what());
    }
  } else {
    if (o.store.empty() || o.id.empty()) throw ConfigError("export needs --record, or --store with --id");
    service::RunStore store(o.store);
    rec = store.get(o.id);
  }
  if (o.format == "csv") {
    out << protocol::run_report_csv(rec);
  } else {
    out << protocol::format_record(rec) << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sievectl: drive the soil-sieving instrument model"};
  app.require_subcommand(1);
  std::string data_dir;
  app.add_option("--data-dir", data_dir, "Shipped data root (profiles, params, targets, config)");

  RunOpts ro;
  auto* run_cmd = app.add_subcommand("run", "Run one protocol in virtual time and print its RunRecord");
  run_cmd->add_option("--protocol", ro.protocol, "cyst, egg or full")
      ->check(CLI::IsMember({"cyst", "egg", "full"}))
      ->capture_default_str();
  run_cmd->add_option("--profile", ro.profile, "Soil profile name or JSON file")->capture_default_str();
  run_cmd->add_option("--params", ro.params, "Process parameter file (defaults to the shipped one)");
  run_cmd->add_option("--config", ro.config, "Instrument config file");
  run_cmd->add_option("--seed", ro.seed)->capture_default_str();
  run_cmd->add_option("--speed", ro.speed, "Virtual ms per wall ms; 0 runs as fast as possible")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  run_cmd->add_option("--trace", ro.trace, "Write the device trace here");
  run_cmd->add_option("--script", ro.script, "Run this script file instead of the built-in protocol");
  run_cmd->add_flag("--print-script", ro.print_script, "Print the script JSON and exit without running");
  run_cmd->add_option("--run-id", ro.run_id)->capture_default_str();

  ExtinctionOpts eo;
  auto* ext_cmd = app.add_subcommand("extinction", "Extract repeatedly until no eggs come back; prints CSV");
  ext_cmd->add_option("--soil", eo.soil, "muscatine, nevada or a profile file")->capture_default_str();
  ext_cmd->add_option("--method", eo.method)->check(CLI::IsMember({"robotic", "manual"}))->capture_default_str();
  ext_cmd->add_option("--params", eo.params, "Override the shipped parameter file");
  ext_cmd->add_option("--samples", eo.samples)->check(CLI::PositiveNumber)->capture_default_str();
  ext_cmd->add_option("--iterations", eo.iterations)->check(CLI::PositiveNumber)->capture_default_str();
  ext_cmd->add_option("--replicates", eo.replicates)->check(CLI::PositiveNumber)->capture_default_str();
  ext_cmd->add_option("--seed", eo.seed)->capture_default_str();
  ext_cmd->add_option("--threads", eo.threads, "0 uses every core")->check(CLI::NonNegativeNumber);
  ext_cmd->add_option("--out", eo.out_dir, "Also write per-iteration and summary CSVs here");

  CalibrateOpts co;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit process parameters to recovery targets");
  cal_cmd->add_option("--targets", co.targets, "Target name or JSON file")->required();
  cal_cmd->add_option("--out", co.out, "Parameter file to write (stdout when omitted)");
  cal_cmd->add_option("--threads", co.threads, "0 uses every core")->check(CLI::NonNegativeNumber);
  cal_cmd->add_option("--replicates", co.replicates, "Override the replicate count")->check(CLI::PositiveNumber);

  ServeOpts so;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API until SIGINT or SIGTERM");
  serve_cmd->add_option("--host", so.host)->capture_default_str();
  serve_cmd->add_option("--port", so.port, "0 picks a free port")->check(CLI::Range(0, 65535))->capture_default_str();
  serve_cmd->add_option("--store", so.store, "Run log directory")->capture_default_str();

  ExportOpts xo;
  auto* exp_cmd = app.add_subcommand("export", "Print a stored RunRecord as JSON or report CSV");
  exp_cmd->add_option("--record", xo.record, "RunRecord JSON file");
  exp_cmd->add_option("--store", xo.store, "Run log directory");
  exp_cmd->add_option("--id", xo.id, "Run id inside --store");
  exp_cmd->add_option("--format", xo.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const auto data = DataDir::resolve(data_dir);
    if (*run_cmd) return cmd_run(ro, data, out, err);
    if (*ext_cmd) return cmd_extinction(eo, data, out, err);
    if (*cal_cmd) return cmd_calibrate(co, data, out, err);
    if (*serve_cmd) return cmd_serve(so, data, out, err);
    return cmd_export(xo, out);
  } catch (const sim::CalibrationError& e) {
    err << "calibration failed: " << e.what() << " (best residual " << e.best_residual() << " pp)\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const service::NotFound& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "fault: " << e.what() << '\n';
    return kFaulted;
  }
}

}  // namespace sievectl
