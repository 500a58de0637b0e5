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

// Cycle-accurate wormhole simulator with credit-based flow control.
//
// Each router has a two-stage pipeline. In stage one a head flit computes
// its route and acquires an output VC of its VN class; in stage two flits win
// the switch and cross the link, landing in the downstream input buffer
// ready for the next cycle. Credits return one cycle after a flit leaves a
// buffer. The network interface writes one flit per cycle into the source
// router's local input buffer.
//
// With H router-to-router hops and P flits per packet, an uncontended packet
// takes 1 + 2 * (H + 1) + (P - 1) cycles from generation to the end of the
// cycle in which its tail is ejected; see ZeroLoadLatency.

#ifndef CHIPNET_ENGINE_H_
#define CHIPNET_ENGINE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "chipnet/routing.h"
#include "chipnet/selection.h"
#include "chipnet/topology.h"
#include "chipnet/traffic.h"

namespace chipnet {

// Internal consistency failures: watchdog expiry, audit violations when
// configured to throw, refused scenarios.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EngineConfig {
  int vcs_per_vn = 1;    // 1 to 8
  int buffer_depth = 4;  // flits per input VC
  int packet_flits = 8;
  RuleSet rules = RuleSet::kFull;
  // Checks flit conservation, credit bounds, VN isolation and turn legality
  // every cycle. Slower; violations are counted in Metrics.
  bool audit = false;
  // A buffered flit that has not moved for this many cycles aborts the run.
  std::int64_t watchdog_cycles = 20000;
  // A source queue longer than this marks the run saturated and stops it.
  std::size_t max_source_queue = 250;
  // A synthetic run whose average latency exceeds this multiple of its own
  // zero-load estimate (from the measured average hop count) is saturated.
  double saturation_latency_factor = 3.0;
  bool allow_disconnect = false;
};

struct Metrics {
  double rate = 0.0;
  std::int64_t generated = 0;    // measured packets generated
  std::int64_t delivered = 0;    // measured packets delivered
  std::int64_t unreachable = 0;  // measured packets with no route
  double avg_latency = 0.0;
  std::int64_t max_latency = 0;
  // Bucket i counts latencies in [8i, 8i+8); the last bucket is open.
  std::vector<std::int64_t> latency_histogram;
  double avg_hops = 0.0;
  std::int64_t intra_delivered = 0;  // measured, same chiplet
  // Share of network-buffer occupancy (flit-cycles during the measurement
  // window, injection buffers excluded) per VN class, in percent.
  double vn0_util = 0.0;
  double vn1_util = 0.0;
  std::int64_t vn0_occupancy = 0;
  std::int64_t vn1_occupancy = 0;
  // Flits written into network buffers per VN class during the window.
  std::int64_t vn0_flits = 0;
  std::int64_t vn1_flits = 0;
  double vn0_flit_share() const;  // percent
  // Heads crossing each vertical link (either direction), whole run.
  std::vector<std::int64_t> vl_traversals;
  std::int64_t cycles = 0;
  bool saturated = false;
  bool drained = false;
  // Whole-run soundness counters (all packets, not only measured ones).
  std::int64_t packets_delivered = 0;
  std::int64_t packets_dropped = 0;  // lost their route to a mid-run fault
  std::int64_t flits_injected = 0;
  std::int64_t flits_ejected = 0;
  std::int64_t flits_dropped = 0;    // consumed by dropped packets
  std::int64_t flits_in_flight = 0;  // still buffered when the run ended
  std::int64_t hop_mismatches = 0;
  std::int64_t illegal_hops = 0;
  std::int64_t vn_decreases = 0;
  std::int64_t audit_violations = 0;

  double reachability() const;
  double intra_fraction() const;
};

// Fixed CSV columns, in this order.
std::string MetricsCsvHeader();
std::string MetricsCsvRow(const Metrics& m);

// Latency of a lone packet over `hops` router-to-router hops.
std::int64_t ZeroLoadLatency(int hops, const EngineConfig& config = {});

class Simulator {
 public:
  // `topo` and `tables` must outlive the simulator.
  Simulator(const Topology& topo, const SelectionTable& tables,
            const FaultScenario& scenario, const TrafficSpec& traffic,
            const EngineConfig& config = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Advances one cycle. Synthetic sources generate only while `generate` is
  // set; trace entries are released when their cycle comes.
  void Step(bool generate = true);
  std::int64_t cycle() const;

  // Switches routing to `scenario` from `at_cycle` on (immediately if it is
  // not in the future). Heads that already hold a now-faulty link are
  // dropped and counted unreachable.
  void InjectFault(const FaultScenario& scenario, std::int64_t at_cycle);

  // Queues a packet at `src` as if generated this cycle. Returns false when
  // the pair is unroutable. Every packet queued this way is measured.
  bool Enqueue(int src, int dst);

  // Nothing buffered, queued or pending.
  bool Idle() const;
  std::int64_t flits_in_network() const;

  // Warm-up, measurement and drain per the traffic spec; trace traffic runs
  // until every entry is delivered or the drain budget is spent.
  Metrics Run();

  // Snapshot of the counters so far.
  Metrics metrics() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

Metrics RunSimulation(const Topology& topo, const SelectionTable& tables,
                      const FaultScenario& scenario, const TrafficSpec& traffic,
                      const EngineConfig& config = {});

// Parallelism for independent runs: CHIPNET_THREADS if set, else the
// hardware concurrency.
int DefaultThreads();

// One Run per rate, in parallel over `threads` workers; results are in rate
// order and independent of the thread count.
std::vector<Metrics> LatencySweep(const Topology& topo, const SelectionTable& tables,
                                  const FaultScenario& scenario,
                                  const TrafficSpec& traffic,
                                  const std::vector<double>& rates,
                                  const EngineConfig& config = {}, int threads = 0);

// Calls job(i) for every i in [0, count) on up to `threads` workers (0 means
// DefaultThreads). Rethrows the lowest-index failure.
void ParallelFor(int count, int threads, const std::function<void(int)>& job);

}  // namespace chipnet

#endif  // CHIPNET_ENGINE_H_
