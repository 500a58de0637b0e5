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

#include "chipnet/experiments.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "chipnet/presets.h"
#include "chipnet/random.h"

namespace chipnet {

namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

const RuleSet kSabotage[] = {RuleSet::kNoRule1, RuleSet::kNoRule2,
                             RuleSet::kNoRule3};

std::string VerdictLine(const CdgVerdict& v) {
  std::ostringstream os;
  os << v.label << ": " << (v.acyclic ? "ACYCLIC" : "CYCLIC") << " edges=" << v.edges
     << " kahn=" << (v.kahn_agrees ? "agrees" : "DISAGREES");
  if (!v.acyclic) {
    os << " cycle_length=" << v.cycle.size() << " chiplets=" << v.chiplets_on_cycle
       << "\n  witness: " << v.witness;
  }
  return os.str();
}

std::string ReachabilityTable(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "faults fault_rate masks avg worst\n";
  for (const SweepRow& r : rows) {
    os << r.faults << ' ' << Fixed(r.fault_rate, 5) << ' ' << r.masks << ' '
       << Fixed(r.avg, 6) << ' ' << Fixed(r.worst, 6) << '\n';
  }
  return os.str();
}

// One simulation cell of a sweep.
struct Job {
  enum Group { kLatency, kVcUtil, kFault } group = kLatency;
  std::string system;
  const Topology* topo = nullptr;
  const SelectionTable* tables = nullptr;
  std::string scenario_name = "none";
  FaultScenario scenario;
  TableStrategy strategy = TableStrategy::kOptimal;
  TrafficSpec traffic;
  Metrics result;
};

void Accumulate(SoundnessTotals& t, const Metrics& m) {
  ++t.runs;
  t.packets_delivered += m.packets_delivered;
  t.flits_injected += m.flits_injected;
  t.flits_ejected += m.flits_ejected;
  t.hop_mismatches += m.hop_mismatches;
  t.illegal_hops += m.illegal_hops;
  t.vn_decreases += m.vn_decreases;
  t.audit_violations += m.audit_violations;
  if (!m.drained) ++t.undrained_runs;
  if (m.flits_injected != m.flits_ejected + m.flits_dropped + m.flits_in_flight) {
    ++t.conservation_failures;
  }
}

std::string SoundnessText(const SoundnessTotals& t, bool audit) {
  std::ostringstream os;
  os << "runs " << t.runs << "\n"
     << "audit " << (audit ? "on" : "off") << "\n"
     << "packets_delivered " << t.packets_delivered << "\n"
     << "flits_injected " << t.flits_injected << "\n"
     << "flits_ejected " << t.flits_ejected << "\n"
     << "hop_mismatches " << t.hop_mismatches << "\n"
     << "illegal_hops " << t.illegal_hops << "\n"
     << "vn_decreases " << t.vn_decreases << "\n"
     << "audit_violations " << t.audit_violations << "\n"
     << "undrained_runs " << t.undrained_runs << "\n"
     << "conservation_failures " << t.conservation_failures << "\n";
  return os.str();
}

}  // namespace

std::vector<double> DefaultRates() {
  std::vector<double> rates;
  for (int i = 0; i < 8; ++i) rates.push_back(0.002 + 0.004 * i);
  return rates;
}

CdgVerdict Certify(const DependencyGraph& g, std::string label) {
  CdgVerdict v;
  v.label = std::move(label);
  v.edges = g.num_edges();
  const auto cycle = FindCycle(g);
  const auto order = TopologicalOrder(g);
  v.acyclic = !cycle.has_value();
  v.kahn_agrees = cycle.has_value() != order.has_value();
  if (cycle) {
    v.cycle = *cycle;
    std::set<int> chiplets;
    std::ostringstream os;
    for (int node : v.cycle) {
      if (g.LayerOf(node) != kInterposer) chiplets.insert(g.LayerOf(node));
      os << g.Describe(node) << " -> ";
    }
    os << g.Describe(v.cycle.front());
    v.witness = os.str();
    v.chiplets_on_cycle = static_cast<int>(chiplets.size());
  }
  return v;
}

VerifyResult RunVerification(const Topology& topo, const SelectionTable& tables,
                             const std::string& system_name,
                             const VerifyOptions& options) {
  VerifyResult out;
  std::ostringstream os;
  os << "system " << system_name << "\n"
     << "rules " << RuleSetName(options.rules) << "\n";
  auto add = [&](CdgVerdict v) {
    out.all_acyclic = out.all_acyclic && v.acyclic;
    os << VerdictLine(v) << "\n";
    out.verdicts.push_back(std::move(v));
  };
  if (options.scenario == "all") {
    os << "[per-chiplet scenarios]\n";
    for (int c = 0; c < topo.num_chiplets(); ++c) {
      for (std::uint32_t mask : EnumerateScenarios(topo.VlCount(c))) {
        const FaultScenario s = FaultScenario::FromLocalMask(topo, c, mask);
        char label[64];
        std::snprintf(label, sizeof(label), "chiplet %d mask 0x%x", c, mask);
        add(Certify(BuildCdg(topo, tables, s, options.rules), label));
      }
    }
  } else {
    const FaultScenario s = ParseScenario(options.scenario, topo);
    os << "[scenario]\n";
    add(Certify(BuildCdg(topo, tables, s, options.rules),
                "scenario " + options.scenario + " faulty " + ToString(s)));
  }
  // Every possible pair of link choices at once: this union graph contains
  // the graph of any table under any fault scenario.
  os << "[all link choices]\n";
  add(Certify(BuildCdgAllLinkChoices(topo, options.rules), "any table, any scenario"));
  os << "verdict " << (out.all_acyclic ? "ACYCLIC" : "CYCLIC") << "\n";
  if (options.sweep_reachability) {
    out.reachability = SweepScenarios(topo, tables, options.max_faults);
    os << "[reachability]\n" << ReachabilityTable(out.reachability);
  }
  out.report = os.str();
  return out;
}

double MeanZeroLoadLatency(const Topology& topo, const SelectionTable& tables,
                           const FaultScenario& scenario, const EngineConfig& config) {
  const RouteContext ctx{&topo, &tables, &scenario, config.rules};
  double sum = 0.0;
  long long pairs = 0;
  for (int s : topo.Endpoints()) {
    for (int d : topo.Endpoints()) {
      if (s == d) continue;
      const auto state = MakeRouteState(ctx, topo.At(s), topo.At(d));
      if (!state) continue;
      const auto path = TracePath(ctx, *state, [](const VnOptions& o) { return o.first; });
      if (!path) continue;
      sum += static_cast<double>(
          ZeroLoadLatency(static_cast<int>(path->size()) - 1, config));
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

bool SubSaturated(const Metrics& m) {
  return !m.saturated && m.drained && m.delivered > 0;
}

SweepResult RunSweep(const SweepPlan& plan) {
  SweepResult out;
  const Topology topo = plan.topo ? *plan.topo : PresetTopology(plan.system_name);
  auto tables_for = [&](const Topology& t, TableStrategy strategy) {
    TableOptions o;
    o.rho = plan.rho;
    o.strategy = strategy;
    o.seed = plan.seed;
    return BuildTables(t, TrafficProfile::Uniform(t), o);
  };
  const SelectionTable optimal = tables_for(topo, TableStrategy::kOptimal);
  const SelectionTable distance = tables_for(topo, TableStrategy::kDistanceBased);
  const SelectionTable random = tables_for(topo, TableStrategy::kRandom);
  auto table_of = [&](TableStrategy s) -> const SelectionTable* {
    switch (s) {
      case TableStrategy::kOptimal:
        return &optimal;
      case TableStrategy::kDistanceBased:
        return &distance;
      case TableStrategy::kRandom:
        return &random;
    }
    return &optimal;
  };
  out.files["tables.txt"] = SerializeTable(optimal);

  const bool with_six6 = plan.include_six6 && plan.system_name == "baseline4";
  std::optional<Topology> six;
  std::optional<SelectionTable> six_tables;
  if (with_six6) {
    six = PresetTopology("six6");
    six_tables = tables_for(*six, TableStrategy::kOptimal);
  }

  // Certification and reachability.
  VerifyOptions vopt;
  vopt.max_faults = plan.max_faults;
  out.verification = RunVerification(topo, optimal, plan.system_name, vopt);
  std::ostringstream report;
  report << out.verification.report;
  std::vector<std::pair<std::string, std::vector<SweepRow>>> reach = {
      {plan.system_name, out.verification.reachability}};
  if (with_six6) {
    const VerifyResult v6 = RunVerification(*six, *six_tables, "six6", vopt);
    out.verification.all_acyclic = out.verification.all_acyclic && v6.all_acyclic;
    out.verification.verdicts.insert(out.verification.verdicts.end(),
                                     v6.verdicts.begin(), v6.verdicts.end());
    report << "\n" << v6.report;
    reach.emplace_back("six6", v6.reachability);
  }
  report << "\n[sabotage]\n";
  for (RuleSet r : kSabotage) {
    const std::string name(RuleSetName(r));
    const CdgVerdict tv =
        Certify(BuildCdg(topo, optimal, FaultScenario(static_cast<int>(topo.vls().size())), r),
                name + " fault-free tables");
    const CdgVerdict av = Certify(BuildCdgAllLinkChoices(topo, r), name + " any table");
    report << VerdictLine(tv) << "\n" << VerdictLine(av) << "\n";
    out.verification.verdicts.push_back(tv);
    out.verification.verdicts.push_back(av);
  }
  report << "\noverall " << (out.verification.all_acyclic ? "ACYCLIC" : "CYCLIC") << "\n";
  out.files["verify_report.txt"] = report.str();

  {
    std::ostringstream csv;
    csv << "system,faults,fault_rate,masks,avg,worst\n";
    for (const auto& [name, rows] : reach) {
      for (const SweepRow& r : rows) {
        csv << name << ',' << r.faults << ',' << Fixed(r.fault_rate, 5) << ',' << r.masks
            << ',' << Fixed(r.avg, 6) << ',' << Fixed(r.worst, 6) << '\n';
      }
    }
    out.files["fig6_reachability.csv"] = csv.str();
  }

  // Simulation cells.
  std::vector<Job> jobs;
  const FaultScenario healthy(static_cast<int>(topo.vls().size()));
  auto base_traffic = [&](TrafficKind kind, double rate) {
    TrafficSpec t;
    t.kind = kind;
    t.rate = rate;
    t.seed = MixSeed(plan.seed, static_cast<std::uint64_t>(kind));
    t.warmup_cycles = plan.warmup_cycles;
    t.measure_cycles = plan.measure_cycles;
    t.drain_cycles = plan.drain_cycles;
    return t;
  };
  const TrafficKind kinds[] = {TrafficKind::kUniform, TrafficKind::kLocalized,
                               TrafficKind::kHotspot};
  for (TrafficKind kind : kinds) {
    for (double rate : plan.rates) {
      Job j;
      j.system = plan.system_name;
      j.topo = &topo;
      j.tables = &optimal;
      j.scenario = healthy;
      j.traffic = base_traffic(kind, rate);
      jobs.push_back(std::move(j));
    }
  }
  if (with_six6) {
    for (double rate : plan.rates) {
      Job j;
      j.system = "six6";
      j.topo = &*six;
      j.tables = &*six_tables;
      j.scenario = FaultScenario(static_cast<int>(six->vls().size()));
      j.traffic = base_traffic(TrafficKind::kUniform, rate);
      jobs.push_back(std::move(j));
    }
  }
  {
    const double per_cycle = plan.vc_rate * static_cast<double>(topo.Endpoints().size());
    // 10% margin over the expected count so the measured total clears the floor.
    const auto measure = static_cast<std::int64_t>(
        std::ceil(1.1 * static_cast<double>(plan.vc_min_packets) / per_cycle));
    for (TrafficKind kind : kinds) {
      Job j;
      j.group = Job::kVcUtil;
      j.system = plan.system_name;
      j.topo = &topo;
      j.tables = &optimal;
      j.scenario = healthy;
      j.traffic = base_traffic(kind, plan.vc_rate);
      j.traffic.measure_cycles = std::max(measure, plan.measure_cycles);
      jobs.push_back(std::move(j));
    }
  }
  for (const char* name : {"4faults:fig7a", "8faults:fig7b"}) {
    const FaultScenario s = ParseScenario(name, topo);
    for (TableStrategy strategy : {TableStrategy::kOptimal, TableStrategy::kDistanceBased,
                                   TableStrategy::kRandom}) {
      for (double rate : plan.rates) {
        Job j;
        j.group = Job::kFault;
        j.system = plan.system_name;
        j.topo = &topo;
        j.tables = table_of(strategy);
        j.scenario_name = name;
        j.scenario = s;
        j.strategy = strategy;
        j.traffic = base_traffic(TrafficKind::kUniform, rate);
        jobs.push_back(std::move(j));
      }
    }
  }

  EngineConfig config;
  config.audit = plan.audit;
  ParallelFor(static_cast<int>(jobs.size()), plan.threads, [&](int i) {
    Job& j = jobs[static_cast<std::size_t>(i)];
    j.result = RunSimulation(*j.topo, *j.tables, j.scenario, j.traffic, config);
  });

  std::ostringstream latency_csv;
  std::ostringstream vc_csv;
  std::ostringstream fault_csv;
  latency_csv << "system,traffic,strategy," << MetricsCsvHeader() << "\n";
  vc_csv << "system,traffic,window,rate,vn0_util,vn1_util,vn0_flit_share,vn1_flit_share,"
          "delivered,saturated\n";
  fault_csv << "scenario,fault_rate,strategy," << MetricsCsvHeader() << "\n";
  auto vc_row = [&](const Job& j, const char* window) {
    const Metrics& m = j.result;
    vc_csv << j.system << ',' << TrafficKindName(j.traffic.kind) << ',' << window << ','
         << Fixed(m.rate, 6) << ',' << Fixed(m.vn0_util, 4) << ',' << Fixed(m.vn1_util, 4)
         << ',' << Fixed(m.vn0_flit_share(), 4) << ','
         << Fixed(100.0 - m.vn0_flit_share(), 4) << ',' << m.delivered << ','
         << (m.saturated ? 1 : 0) << '\n';
  };
  for (const Job& j : jobs) {
    Accumulate(out.totals, j.result);
    switch (j.group) {
      case Job::kLatency:
        latency_csv << j.system << ',' << TrafficKindName(j.traffic.kind) << ','
             << TableStrategyName(j.strategy) << ',' << MetricsCsvRow(j.result) << '\n';
        break;
      case Job::kVcUtil:
        out.vc_runs.push_back(j.result);
        break;
      case Job::kFault: {
        const int faults = j.scenario.num_faulty();
        const double fault_rate =
            static_cast<double>(faults) / (2.0 * static_cast<double>(topo.vls().size()));
        out.fault_latency.push_back({j.scenario_name, fault_rate, j.strategy, j.result});
        fault_csv << j.scenario_name << ',' << Fixed(fault_rate, 5) << ','
             << TableStrategyName(j.strategy) << ',' << MetricsCsvRow(j.result) << '\n';
        break;
      }
    }
  }
  // Long operating-point runs first, then the latency-sweep cells for context.
  for (const Job& j : jobs) {
    if (j.group == Job::kVcUtil) vc_row(j, "operating");
  }
  for (const Job& j : jobs) {
    if (j.group == Job::kLatency) vc_row(j, "sweep");
  }
  out.files["fig4_latency.csv"] = latency_csv.str();
  out.files["fig5_vcutil.csv"] = vc_csv.str();
  out.files["fig7_fault_latency.csv"] = fault_csv.str();
  out.files["soundness.txt"] = SoundnessText(out.totals, plan.audit);
  return out;
}

void WriteArtifacts(const SweepResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
  for (const auto& [name, contents] : result.files) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << contents;
    if (!f) throw std::runtime_error("write failed: " + path);
  }
}

}  // namespace chipnet
