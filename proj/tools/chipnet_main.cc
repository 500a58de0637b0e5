// Copyright 2026 The chipnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// chipnet command-line driver.
//
//   chipnet vlopt  [--preset P | --topo F] [--profile F] [--strategy S] --out DIR
//   chipnet verify [...] [--scenario all|SPEC] [--max-faults N] [--sabotage R]
//   chipnet sim    [...] [--rate R,...] [--traffic T] [--scenario SPEC]
//   chipnet sweep  [--preset P] [--seed N] --out DIR
//
// Failures print one line `error: <category>: <message>` to stderr and exit
// with status 1. `verify` exits 2 when it finds a cycle; `sim` refuses to run
// on a cyclic dependency graph and also exits 2.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chipnet/engine.h"
#include "chipnet/experiments.h"
#include "chipnet/presets.h"
#include "chipnet/routing.h"
#include "chipnet/selection.h"
#include "chipnet/topology.h"
#include "chipnet/traffic.h"
#include "chipnet/verify.h"
#include "chipnet/vlselect.h"

namespace chipnet {
namespace {

constexpr int kExitError = 1;
constexpr int kExitCyclic = 2;

// Error with a machine-readable category.
class CliError : public std::runtime_error {
 public:
  CliError(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

std::string ReadFile(const std::string& path, const char* category) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(category, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& dir, const std::string& name,
               const std::string& contents) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CliError("io", "cannot create directory " + dir + ": " + ec.message());
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream f(path, std::ios::binary);
  if (!(f << contents)) throw CliError("io", "cannot write " + path);
}

// Options shared by the per-network subcommands.
struct NetworkOptions {
  std::string preset = "baseline4";
  std::string topo_path;
  std::string tables_path;
  std::string profile_path;
  std::string strategy = "optimal";
  double rho = kDefaultRho;
  std::uint64_t seed = 1;
  std::string out;

  void Register(CLI::App* app) {
    app->add_option("--preset", preset, "Built-in system: baseline4 or six6")
        ->check(CLI::IsMember({"baseline4", "six6"}));
    app->add_option("--topo", topo_path, "Topology JSON file (overrides --preset)");
    app->add_option("--tables", tables_path, "Selection tables to load instead of building");
    app->add_option("--profile", profile_path,
                    "Table-building traffic: uniform or a file of router,send[,recv] lines");
    app->add_option("--strategy", strategy, "Link selection: optimal, distance or random")
        ->check(CLI::IsMember({"optimal", "distance", "random"}));
    app->add_option("--rho", rho, "Distance weight in the selection cost");
    app->add_option("--seed", seed, "Seed for random tables and traffic");
    app->add_option("--out", out, "Output directory");
  }

  Topology LoadTopo() const {
    return topo_path.empty() ? PresetTopology(preset) : LoadTopologyFile(topo_path);
  }

  SelectionTable LoadTables(const Topology& topo) const {
    if (!tables_path.empty()) {
      SelectionTable t = DeserializeTable(ReadFile(tables_path, "tables"));
      ValidateTable(t, topo);
      return t;
    }
    TableOptions o;
    o.rho = rho;
    o.seed = seed;
    o.strategy = strategy == "distance" ? TableStrategy::kDistanceBased
                 : strategy == "random" ? TableStrategy::kRandom
                                        : TableStrategy::kOptimal;
    const TrafficProfile profile = profile_path.empty() || profile_path == "uniform"
                                       ? TrafficProfile::Uniform(topo)
                                       : LoadProfile(profile_path, topo);
    return BuildTables(topo, profile, o);
  }

  std::string SystemName() const { return topo_path.empty() ? preset : topo_path; }
};

RuleSet ParseRules(const std::string& name) {
  const auto r = ParseRuleSet(name);
  if (!r) throw CliError("usage", "unknown rule set '" + name + "'");
  return *r;
}

int CmdVlopt(const NetworkOptions& net) {
  const Topology topo = net.LoadTopo();
  const SelectionTable tables = net.LoadTables(topo);
  const std::string doc = SerializeTable(tables);
  if (net.out.empty()) {
    std::cout << doc;
  } else {
    WriteFile(net.out, "tables.txt", doc);
    std::cout << "tables " << tables.size() << " entries -> "
              << (std::filesystem::path(net.out) / "tables.txt").string() << "\n";
  }
  return 0;
}

int CmdVerify(const NetworkOptions& net, const std::string& scenario, int max_faults,
              const std::string& sabotage) {
  const Topology topo = net.LoadTopo();
  const SelectionTable tables = net.LoadTables(topo);
  VerifyOptions o;
  o.rules = ParseRules(sabotage);
  o.scenario = scenario;
  o.max_faults = max_faults;
  const VerifyResult r = RunVerification(topo, tables, net.SystemName(), o);
  if (!net.out.empty()) WriteFile(net.out, "verify_report.txt", r.report);
  std::cout << r.report;
  return r.all_acyclic ? 0 : kExitCyclic;
}

struct SimOptions {
  std::vector<double> rates = {0.01};
  std::string traffic = "uniform";
  std::string scenario = "none";
  std::string sabotage = "none";
  std::int64_t warmup = 10000;
  std::int64_t measure = 50000;
  std::int64_t drain = 200000;
  int vcs = 1;
  bool audit = false;
  bool allow_disconnect = false;
  std::int64_t fault_at = -1;
  std::string fault_scenario;
  int threads = 0;
};

// Refuses to simulate a network whose dependency graph has a cycle.
void Certify(const Topology& topo, const SelectionTable& tables,
             const FaultScenario& scenario, RuleSet rules) {
  const auto cycle = FindCycle(BuildCdg(topo, tables, scenario, rules));
  if (!cycle) return;
  const DependencyGraph g = BuildCdg(topo, tables, scenario, rules);
  std::ostringstream os;
  os << "cycle in channel dependency graph:";
  for (int n : *cycle) os << ' ' << g.Describe(n) << " ->";
  os << ' ' << g.Describe(cycle->front());
  throw CliError("verification", os.str());
}

int CmdSim(const NetworkOptions& net, const SimOptions& sim) {
  const Topology topo = net.LoadTopo();
  const SelectionTable tables = net.LoadTables(topo);
  const FaultScenario scenario = ParseScenario(sim.scenario, topo);
  EngineConfig config;
  config.rules = ParseRules(sim.sabotage);
  config.vcs_per_vn = sim.vcs;
  config.audit = sim.audit;
  config.allow_disconnect = sim.allow_disconnect;
  Certify(topo, tables, scenario, config.rules);
  std::optional<FaultScenario> late;
  if (!sim.fault_scenario.empty()) {
    late = ParseScenario(sim.fault_scenario, topo);
    Certify(topo, tables, *late, config.rules);
  }

  TrafficSpec spec;
  spec.seed = net.seed;
  spec.warmup_cycles = sim.warmup;
  spec.measure_cycles = sim.measure;
  spec.drain_cycles = sim.drain;
  std::vector<double> rates = sim.rates;
  if (sim.traffic.rfind("trace:", 0) == 0) {
    spec.kind = TrafficKind::kTrace;
    spec.trace = LoadTrace(sim.traffic.substr(6), topo);
    rates = {0.0};
  } else if (sim.traffic == "uniform") {
    spec.kind = TrafficKind::kUniform;
  } else if (sim.traffic == "localized") {
    spec.kind = TrafficKind::kLocalized;
  } else if (sim.traffic == "hotspot") {
    spec.kind = TrafficKind::kHotspot;
  } else {
    throw CliError("usage", "unknown traffic '" + sim.traffic + "'");
  }

  std::vector<Metrics> results(rates.size());
  ParallelFor(static_cast<int>(rates.size()), sim.threads, [&](int i) {
    TrafficSpec t = spec;
    t.rate = rates[static_cast<std::size_t>(i)];
    Simulator s(topo, tables, scenario, t, config);
    if (late) s.InjectFault(*late, sim.fault_at < 0 ? 0 : sim.fault_at);
    results[static_cast<std::size_t>(i)] = s.Run();
  });
  std::ostringstream csv;
  csv << MetricsCsvHeader() << "\n";
  for (const Metrics& m : results) csv << MetricsCsvRow(m) << "\n";
  std::cout << csv.str();
  if (!net.out.empty()) WriteFile(net.out, "sim.csv", csv.str());
  return 0;
}

int CmdSweep(const NetworkOptions& net, const SweepPlan& base, const std::string& out) {
  SweepPlan plan = base;
  plan.system_name = net.SystemName();
  if (!net.topo_path.empty()) plan.topo = net.LoadTopo();
  plan.seed = net.seed;
  plan.rho = net.rho;
  const SweepResult r = RunSweep(plan);
  WriteArtifacts(r, out);
  for (const auto& [name, contents] : r.files) {
    std::cout << (std::filesystem::path(out) / name).string() << " (" << contents.size()
              << " bytes)\n";
  }
  std::cout << "certification " << (r.verification.all_acyclic ? "ACYCLIC" : "CYCLIC")
            << ", packets delivered " << r.totals.packets_delivered << "\n";
  return r.verification.all_acyclic ? 0 : kExitCyclic;
}

int Main(int argc, char** argv) {
  CLI::App app{"chipnet: 2.5D chiplet network routing, verification and simulation"};
  app.require_subcommand(1);

  NetworkOptions vlopt_net;
  CLI::App* vlopt = app.add_subcommand("vlopt", "Build link selection tables");
  vlopt_net.Register(vlopt);

  NetworkOptions verify_net;
  std::string verify_scenario = "all";
  int verify_faults = 8;
  std::string sabotage = "none";
  CLI::App* verify = app.add_subcommand("verify", "Certify deadlock freedom and reachability");
  verify_net.Register(verify);
  verify->add_option("--scenario", verify_scenario,
                     "all, none, 4faults:fig7a, 8faults:fig7b, ids:A,B or mask:0x..");
  verify->add_option("--max-faults", verify_faults, "Largest fault count in the reachability sweep")
      ->check(CLI::Range(0, 32));
  verify->add_option("--sabotage", sabotage,
                     "Drop a routing rule: none, rule1, rule2, rule3, single-vn");

  NetworkOptions sim_net;
  SimOptions sim;
  CLI::App* simc = app.add_subcommand("sim", "Simulate one configuration at one or more rates");
  sim_net.Register(simc);
  simc->add_option("--rate", sim.rates, "Injection rates (packets/cycle/endpoint)")
      ->delimiter(',');
  simc->add_option("--traffic", sim.traffic, "uniform, localized, hotspot or trace:<path>");
  simc->add_option("--scenario", sim.scenario, "Fault scenario present from cycle 0");
  simc->add_option("--sabotage", sim.sabotage, "Drop a routing rule (certification will refuse)");
  simc->add_option("--warmup", sim.warmup, "Warm-up cycles")->check(CLI::NonNegativeNumber);
  simc->add_option("--measure", sim.measure, "Measurement cycles")->check(CLI::NonNegativeNumber);
  simc->add_option("--drain", sim.drain, "Drain cycle cap")->check(CLI::NonNegativeNumber);
  simc->add_option("--vcs", sim.vcs, "VCs per virtual network")->check(CLI::Range(1, 8));
  simc->add_flag("--audit", sim.audit, "Check flow-control invariants every cycle");
  simc->add_flag("--allow-disconnect", sim.allow_disconnect,
                 "Accept scenarios that cut a chiplet off");
  simc->add_option("--fault-scenario", sim.fault_scenario, "Scenario switched in mid-run");
  simc->add_option("--fault-at", sim.fault_at, "Cycle at which --fault-scenario applies");
  simc->add_option("--threads", sim.threads, "Worker threads (default CHIPNET_THREADS)");

  NetworkOptions sweep_net;
  SweepPlan plan;
  std::string sweep_out = "results";
  CLI::App* sweep = app.add_subcommand("sweep", "Produce every artifact for a system");
  sweep->add_option("--preset", sweep_net.preset, "Built-in system: baseline4 or six6")
      ->check(CLI::IsMember({"baseline4", "six6"}));
  sweep->add_option("--topo", sweep_net.topo_path, "Topology JSON file");
  sweep->add_option("--seed", sweep_net.seed, "Seed for traffic and random tables");
  sweep->add_option("--rho", sweep_net.rho, "Distance weight in the selection cost");
  sweep->add_option("--rate", plan.rates, "Injection rates")->delimiter(',');
  sweep->add_option("--max-faults", plan.max_faults,
                    "Largest fault count in the reachability sweep")
      ->check(CLI::Range(0, 32));
  sweep->add_option("--warmup", plan.warmup_cycles, "Warm-up cycles")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--measure", plan.measure_cycles, "Measurement cycles")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--drain", plan.drain_cycles, "Drain cycle cap")->check(CLI::NonNegativeNumber);
  sweep->add_option("--vc-rate", plan.vc_rate, "Rate of the VC-utilization runs");
  sweep->add_option("--vc-packets", plan.vc_min_packets, "Packets per VC-utilization run");
  sweep->add_flag("--audit", plan.audit, "Check flow-control invariants every cycle");
  sweep->add_option("--threads", plan.threads, "Worker threads (default CHIPNET_THREADS)");
  sweep->add_option("--out", sweep_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*vlopt) return CmdVlopt(vlopt_net);
    if (*verify) return CmdVerify(verify_net, verify_scenario, verify_faults, sabotage);
    if (*simc) return CmdSim(sim_net, sim);
    if (*sweep) return CmdSweep(sweep_net, plan, sweep_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return e.category() == "verification" ? kExitCyclic : kExitError;
  } catch (const TopologyError& e) {
    std::cerr << "error: topology: " << e.what() << "\n";
  } catch (const TableError& e) {
    std::cerr << "error: tables: " << e.what() << "\n";
  } catch (const TraceError& e) {
    std::cerr << "error: trace: " << e.what() << "\n";
  } catch (const EngineError& e) {
    std::cerr << "error: engine: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace
}  // namespace chipnet

int main(int argc, char** argv) { return chipnet::Main(argc, argv); }
