// tbtele: batch runs of the time-bin teleportation simulator.
//
//   tbtele full --config configs/paper.cfg --seed 42 --out out/
//   tbtele relay --config configs/relay.cfg
//   tbtele oracle-check --seed 1

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tbtele/analysis.hpp"
#include "tbtele/config.hpp"
#include "tbtele/errors.hpp"
#include "tbtele/oracle.hpp"
#include "tbtele/relay.hpp"
#include "tbtele/report.hpp"

namespace fs = std::filesystem;
using namespace tbtele;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitOracle = 4;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = "out";
  std::vector<std::string> sets;
  std::string golden;
  bool update_golden = false;
};

struct Loaded {
  ConfigFile cfg;
  OutputHeader header;
  RunOptions run;
  fs::path out;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::ParseError:
    case ErrorKind::UnknownKey:
    case ErrorKind::TypeMismatch:
      return kExitConfig;
    default:
      return kExitDomain;
  }
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "config file (key = value)");
  sub->add_option("--seed", f.seed, "RNG seed, overrides run.seed");
  sub->add_option("--workers", f.workers, "worker threads, overrides run.workers")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--set", f.sets, "key=value override, applied after the file");
}

Loaded load(const Flags& f, const std::string& command, const ConfigFile& fallback) {
  Loaded l;
  l.cfg = f.config.empty() ? fallback : load_config(f.config);
  for (const auto& s : f.sets) apply_override(l.cfg, s);
  validate(l.cfg);
  l.run.seed = f.seed.value_or(l.cfg.run.seed);
  l.run.workers = f.workers.value_or(l.cfg.run.workers);
  l.run.record_events = l.cfg.run.event_log;
  l.header = {config_hash(l.cfg), l.run.seed, l.run.workers, command};
  l.out = f.out;
  return l;
}

void emit(const Loaded& l, const std::string& name, const std::string& body) {
  write_artifact(l.out / name, l.header, body);
}

void emit_events(const Loaded& l, const std::string& name, std::vector<CoincidenceEvent> events) {
  if (!l.run.record_events) return;
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.pulse_index < b.pulse_index; });
  std::ostringstream os;
  write_event_log(os, events);
  emit(l, "events_" + name + ".tsv", os.str());
}

struct ScanRun {
  std::vector<ScanPoint> points;
  VisibilityFit fit;
};

ScanRun do_scan(const Loaded& l) {
  const ExperimentConfig& e = l.cfg.experiment;
  const auto betas = scan_betas(e.scan_points);
  std::vector<std::vector<CoincidenceEvent>> events;
  ScanRun r;
  r.points = run_phase_scan(e, betas, l.run, l.run.record_events ? &events : nullptr);
  r.fit = fit_visibility(r.points);
  emit(l, "scan.csv", scan_csv(r.points));
  for (std::size_t i = 0; i < events.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scan_%02zu", i);
    emit_events(l, name, std::move(events[i]));
  }
  return r;
}

std::pair<PoleResult, PoleResult> do_poles(const Loaded& l) {
  PoleResult res[2];
  for (Pole p : {Pole::north, Pole::south}) {
    std::vector<CoincidenceEvent> events;
    res[p == Pole::south] = run_poles(pole_config(l.cfg.experiment, p), p, l.run,
                                      l.run.record_events ? &events : nullptr);
    emit_events(l, std::string(to_string(p)), std::move(events));
  }
  emit(l, "poles.txt", pole_text(res[0], res[1]));
  return {res[0], res[1]};
}

int cmd_scan(const Loaded& l) {
  const ScanRun s = do_scan(l);
  const std::string text = scan_summary_text(s.fit);
  emit(l, "summary.txt", text);
  std::cout << text;
  return kExitOk;
}

int cmd_poles(const Loaded& l) {
  const auto [north, south] = do_poles(l);
  std::cout << pole_text(north, south);
  return kExitOk;
}

int cmd_full(const Loaded& l) {
  const ScanRun s = do_scan(l);
  const auto [north, south] = do_poles(l);
  const std::string text = summary_text(s.fit, build_report(s.fit, north, south));
  emit(l, "summary.txt", text);
  std::cout << text;
  return kExitOk;
}

int cmd_relay(const Loaded& l) {
  const RelaySettings& r = l.cfg.relay;
  std::vector<double> d;
  const auto steps = static_cast<long>(std::floor(r.max_km / r.step_km + 1e-9));
  for (long i = 0; i <= steps; ++i) d.push_back(static_cast<double>(i) * r.step_km);
  std::string ranges;
  for (int k : r.sections) {
    emit(l, "relay_sections_" + std::to_string(k) + ".csv", relay_csv(qber_curve(r.link, k, d)));
    ranges += range_text(k, max_range(r.link, k, r.qber_threshold));
  }
  emit(l, "relay_summary.txt", ranges);
  std::cout << ranges;
  return kExitOk;
}

int cmd_oracle(const Loaded& l, const Flags& f) {
  OracleOptions o;
  o.seed = l.run.seed;
  o.workers = l.run.workers;
  o.golden_dir = f.golden.empty() ? fs::path(TBTELE_SOURCE_DIR) / "configs" / "golden"
                                  : fs::path(f.golden);
  o.update_golden = f.update_golden;
  std::cout << header_text(l.header);
  bool ok = true;
  for (const auto& r : run_oracle_suite(l.cfg.experiment, o)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitOracle;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-bin qubit teleportation simulator"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Flags f;
  auto* scan = app.add_subcommand("scan", "Bob's phase scan on the equator");
  auto* poles = app.add_subcommand("poles", "north and south pole fidelities");
  auto* full = app.add_subcommand("full", "scan, poles and mean fidelity");
  auto* relay = app.add_subcommand("relay", "QBER against distance, direct and with relays");
  auto* oracle = app.add_subcommand("oracle-check", "self-validation suite");
  for (auto* s : {scan, poles, full, relay, oracle}) add_common(s, f);
  oracle->add_option("--golden", f.golden, "reference state directory");
  oracle->add_flag("--update-golden", f.update_golden, "rewrite the reference states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    ConfigFile fallback;
    if (oracle->parsed()) fallback.experiment = ExperimentConfig::ideal();
    const std::string command = app.get_subcommands().front()->get_name();
    const Loaded l = load(f, command, fallback);
    if (scan->parsed()) return cmd_scan(l);
    if (poles->parsed()) return cmd_poles(l);
    if (full->parsed()) return cmd_full(l);
    if (relay->parsed()) return cmd_relay(l);
    return cmd_oracle(l, f);
  } catch (const Error& e) {
    std::cerr << "error: " << error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: ConfigError: " << e.what() << "\n";
    return kExitConfig;
  }
}
