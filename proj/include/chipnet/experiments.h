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

// End-to-end experiment plans: certification reports and the CSV data sets
// behind the latency, VC-utilization, reachability and fault-latency plots.

#ifndef CHIPNET_EXPERIMENTS_H_
#define CHIPNET_EXPERIMENTS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chipnet/engine.h"
#include "chipnet/routing.h"
#include "chipnet/selection.h"
#include "chipnet/topology.h"
#include "chipnet/verify.h"
#include "chipnet/vlselect.h"

namespace chipnet {

// Rates (packets/cycle/endpoint) used by latency sweeps unless overridden.
std::vector<double> DefaultRates();

// Verdict for one dependency graph.
struct CdgVerdict {
  std::string label;
  std::size_t edges = 0;
  bool acyclic = false;
  bool kahn_agrees = false;      // topological order exists iff acyclic
  std::vector<int> cycle;        // witness when cyclic
  int chiplets_on_cycle = 0;     // distinct chiplets the witness touches
  std::string witness;           // human-readable witness
};

CdgVerdict Certify(const DependencyGraph& g, std::string label);

struct VerifyOptions {
  RuleSet rules = RuleSet::kFull;
  // Per-chiplet scenarios to certify; "all" = every connected mask of every
  // chiplet, otherwise a ParseScenario spec.
  std::string scenario = "all";
  int max_faults = 8;
  bool sweep_reachability = true;
};

struct VerifyResult {
  std::vector<CdgVerdict> verdicts;
  std::vector<SweepRow> reachability;
  bool all_acyclic = true;
  std::string report;  // structured text
};

VerifyResult RunVerification(const Topology& topo, const SelectionTable& tables,
                             const std::string& system_name,
                             const VerifyOptions& options = {});

struct SweepPlan {
  std::string system_name = "baseline4";
  std::optional<Topology> topo;  // defaults to the named preset
  // Also simulate and sweep the six-chiplet preset (baseline4 only).
  bool include_six6 = true;
  std::uint64_t seed = 1;
  double rho = kDefaultRho;
  std::vector<double> rates = DefaultRates();
  std::int64_t warmup_cycles = 10000;
  std::int64_t measure_cycles = 50000;
  std::int64_t drain_cycles = 200000;
  // VC-utilization runs: this rate, long enough for this many packets.
  double vc_rate = 0.01;
  std::int64_t vc_min_packets = 100000;
  int max_faults = 8;
  int threads = 0;
  bool audit = false;
};

// Engine soundness counters summed over every simulation of a sweep.
struct SoundnessTotals {
  std::int64_t runs = 0;
  std::int64_t packets_delivered = 0;
  std::int64_t flits_injected = 0;
  std::int64_t flits_ejected = 0;
  std::int64_t hop_mismatches = 0;
  std::int64_t illegal_hops = 0;
  std::int64_t vn_decreases = 0;
  std::int64_t audit_violations = 0;
  std::int64_t undrained_runs = 0;
  // Runs where injected != ejected + dropped + still buffered.
  std::int64_t conservation_failures = 0;
};

struct FaultLatencyRow {
  std::string scenario;
  double fault_rate = 0.0;
  TableStrategy strategy = TableStrategy::kOptimal;
  Metrics metrics;
};

struct SweepResult {
  // File name -> contents, in write order.
  std::map<std::string, std::string> files;
  SoundnessTotals totals;
  VerifyResult verification;
  std::vector<Metrics> vc_runs;  // uniform, localized, hotspot at vc_rate
  std::vector<FaultLatencyRow> fault_latency;
};

SweepResult RunSweep(const SweepPlan& plan);

// Writes every artifact into `dir` (created if missing).
void WriteArtifacts(const SweepResult& result, const std::string& dir);

// Zero-load latency (cycles) averaged over every ordered endpoint pair for
// the fault-free network with `tables`.
double MeanZeroLoadLatency(const Topology& topo, const SelectionTable& tables,
                           const FaultScenario& scenario,
                           const EngineConfig& config = {});

// A run counts as below saturation when it delivered packets, drained and
// was not flagged saturated by the engine.
bool SubSaturated(const Metrics& m);

}  // namespace chipnet

#endif  // CHIPNET_EXPERIMENTS_H_
