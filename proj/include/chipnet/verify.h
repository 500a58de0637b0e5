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

// Static checks of the routing function: channel dependency graphs for
// deadlock freedom and reachability under vertical-link faults.

#ifndef CHIPNET_VERIFY_H_
#define CHIPNET_VERIFY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chipnet/routing.h"
#include "chipnet/selection.h"
#include "chipnet/topology.h"
#include "chipnet/vlselect.h"

namespace chipnet {

// A directed physical channel: the output `port` of `router`, or the local
// injection channel into it.
struct Channel {
  int router = 0;
  Port port = Port::kLocal;
  bool injection = false;
};

// Nodes are (channel, VN) pairs; VCs within a VN class are merged, which is
// sound because any cycle over VCs maps onto a cycle over classes.
class DependencyGraph {
 public:
  explicit DependencyGraph(const Topology& topo);

  int num_nodes() const { return num_nodes_; }
  static int NodeOf(int channel, Vn vn) { return channel * kNumVns + static_cast<int>(vn); }
  int LinkChannel(int router, Port out) const { return router * kNumPorts + static_cast<int>(out); }
  int InjectionChannel(int router) const { return injection_base_ + router; }

  Channel ChannelOf(int node) const;
  Vn VnOf(int node) const { return static_cast<Vn>(node % kNumVns); }
  std::string Describe(int node) const;
  // Chiplet of the router that owns the channel (kInterposer for interposer).
  int LayerOf(int node) const;

  void AddEdge(int from, int to) { pending_.push_back({from, to}); }
  // Sorts and deduplicates edges and builds adjacency. Idempotent.
  void Finalize();

  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  // Successors of `node` in ascending order (after Finalize).
  std::pair<const int*, const int*> Successors(int node) const {
    return {targets_.data() + offsets_[node], targets_.data() + offsets_[node + 1]};
  }

 private:
  const Topology* topo_;
  int injection_base_ = 0;
  int num_nodes_ = 0;
  std::vector<std::pair<int, int>> pending_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> offsets_;
  std::vector<int> targets_;
};

// Union of hold -> request edges over every endpoint pair routable under
// `scenario`, with links taken from `tables` and both outcomes of every
// round-robin VN decision.
DependencyGraph BuildCdg(const Topology& topo, const SelectionTable& tables,
                         const FaultScenario& scenario,
                         RuleSet rules = RuleSet::kFull);

// Same, but every pair is routed through every combination of links on its
// source and destination chiplets. Acyclicity here covers any table under
// any fault scenario.
DependencyGraph BuildCdgAllLinkChoices(const Topology& topo,
                                       RuleSet rules = RuleSet::kFull);

// A witness cycle (first node repeated implicitly) or nullopt. Deterministic.
std::optional<std::vector<int>> FindCycle(const DependencyGraph& g);

// Kahn ordering; nullopt iff the graph has a cycle. Independent of FindCycle.
std::optional<std::vector<int>> TopologicalOrder(const DependencyGraph& g);

struct ReachabilityReport {
  FaultScenario scenario;
  long long reachable_pairs = 0;
  long long total_pairs = 0;
  double ratio = 0.0;
};

// Ordered endpoint pairs (src != dst) whose route completes.
ReachabilityReport Reachability(const Topology& topo, const SelectionTable& tables,
                                const FaultScenario& scenario);

// Pairs weighted by send[src] * recv[dst].
double WeightedReachability(const Topology& topo, const SelectionTable& tables,
                            const FaultScenario& scenario,
                            const TrafficProfile& profile);

struct SweepRow {
  int faults = 0;
  double fault_rate = 0.0;  // faults / (2 * links): each link is two channels
  long long masks = 0;      // non-disconnecting masks evaluated
  double avg = 0.0;
  double worst = 0.0;
};

// All global fault masks with 1..max_faults faulty links, skipping masks
// that cut a chiplet off; average and worst reachability per fault count.
std::vector<SweepRow> SweepScenarios(const Topology& topo,
                                     const SelectionTable& tables, int max_faults);

}  // namespace chipnet

#endif  // CHIPNET_VERIFY_H_
