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

// Design-time vertical-link selection.
//
// For one chiplet and one fault scenario, a selection set assigns every
// chiplet router one fault-free vertical link. Its cost is
//
//   C = sum over fault-free links v of (rho * D_v + L_v)
//
// where l_v is the traffic of the routers that picked v, l_avg the mean of
// l_v over fault-free links, L_v = |l_v - l_avg| / l_avg the load imbalance,
// and D_v the summed hop distance from those routers to v. The optimizer
// finds the minimum-cost set; ties go to the lexicographically smallest
// choice vector so tables are reproducible.

#ifndef CHIPNET_VLSELECT_H_
#define CHIPNET_VLSELECT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "chipnet/selection.h"
#include "chipnet/topology.h"

namespace chipnet {

inline constexpr double kDefaultRho = 0.01;

// Inter-chiplet injection (send) and ejection (recv) rates per router, in
// packets/cycle, indexed by global router index.
struct TrafficProfile {
  std::vector<double> send;
  std::vector<double> recv;

  static TrafficProfile Uniform(const Topology& topo, double rate = 1.0);
};

// Profile files: one `router,send[,recv]` line per router, `#` comments.
// Unlisted routers default to 0; recv defaults to send.
TrafficProfile LoadProfile(const std::string& path, const Topology& topo);

// Everything the cost model needs about one chiplet under one scenario.
struct SelectionProblem {
  std::vector<double> weight;           // T per chiplet router, router-id order
  std::vector<std::vector<int>> dist;   // [router][local link] hop distance
  std::vector<bool> usable;             // per local link: fault-free
  double rho = kDefaultRho;

  int num_routers() const { return static_cast<int>(weight.size()); }
  int num_links() const { return static_cast<int>(usable.size()); }
  int num_usable() const;
};

SelectionProblem MakeProblem(const Topology& topo, int chiplet,
                             std::uint32_t fault_mask,
                             const std::vector<double>& weight_by_router,
                             double rho = kDefaultRho);

struct CostBreakdown {
  std::vector<double> load;           // l_v, 0 for faulty links
  double avg_load = 0.0;              // l_avg over fault-free links
  std::vector<double> load_cost;      // L_v
  std::vector<int> distance_cost;     // D_v
  double rho = kDefaultRho;
  double total = 0.0;                 // C_s
};

double VlLoad(const SelectionProblem& p, const SelectionSet& s, int link);
// Zero when the average load is zero.
double LoadCost(const SelectionProblem& p, const SelectionSet& s, int link);
int DistanceCost(const SelectionProblem& p, const SelectionSet& s, int link);
CostBreakdown OverallCost(const SelectionProblem& p, const SelectionSet& s);
bool IsValidSelection(const SelectionProblem& p, const SelectionSet& s);

enum class SearchStrategy : std::uint8_t { kAuto, kExhaustive, kBranchAndBound };

struct OptimizeOptions {
  SearchStrategy strategy = SearchStrategy::kAuto;
  // Routers only consider their k nearest fault-free links (0 = all). This
  // is an approximation and is off by default.
  int k_nearest = 0;
  // kAuto enumerates exhaustively up to this many selection sets.
  double exhaustive_limit = 1e6;
};

struct OptimizeResult {
  SelectionSet set;
  CostBreakdown cost;
  std::uint64_t visited = 0;  // leaves (exhaustive) or nodes (branch & bound)
};

// Throws TableError when no link is usable.
OptimizeResult OptimizeSelection(const SelectionProblem& p,
                                 const OptimizeOptions& options = {});

// Size of the search space under `options` (as a double; may be huge).
double SearchSpaceSize(const SelectionProblem& p, const OptimizeOptions& options = {});

// Connected fault masks for a chiplet with `link_count` links: fault-free
// first, then by fault count, then by mask value.
std::vector<std::uint32_t> EnumerateScenarios(int link_count);

enum class BaselineKind : std::uint8_t { kDistanceBased, kRandom };

// Nearest fault-free link per router (ties: lowest id), or a seeded uniform
// choice among fault-free links.
SelectionSet BaselineSelect(BaselineKind kind, const SelectionProblem& p,
                            std::uint64_t seed = 0);

enum class TableStrategy : std::uint8_t { kOptimal, kDistanceBased, kRandom };
std::string_view TableStrategyName(TableStrategy s);

struct TableOptions {
  double rho = kDefaultRho;
  TableStrategy strategy = TableStrategy::kOptimal;
  OptimizeOptions optimize;
  std::uint64_t seed = 1;  // kRandom only
};

// Source- and dest-role entries for every chiplet and connected scenario.
SelectionTable BuildTables(const Topology& topo, const TrafficProfile& profile,
                           const TableOptions& options = {});

}  // namespace chipnet

#endif  // CHIPNET_VLSELECT_H_
