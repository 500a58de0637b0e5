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

#include "chipnet/verify.h"

#include <algorithm>
#include <bit>
#include <set>
#include <utility>
#include <vector>

#include "chipnet/experiments.h"
#include "chipnet/presets.h"
#include "chipnet/random.h"
#include "gtest/gtest.h"

namespace chipnet {
namespace {

Topology OneByOne() {
  TopologyConfig cfg;
  cfg.chiplets = {{1, 1, 0, 0}};
  cfg.interposer_width = 1;
  cfg.interposer_height = 1;
  cfg.vls = {{0, 0, 0}};
  return Topology::Build(cfg);
}

TEST(FindCycleTest, EmptyGraph) {
  const Topology t = OneByOne();
  DependencyGraph g(t);
  g.Finalize();
  EXPECT_FALSE(FindCycle(g).has_value());
  ASSERT_TRUE(TopologicalOrder(g).has_value());
  EXPECT_EQ(TopologicalOrder(g)->size(), static_cast<std::size_t>(g.num_nodes()));
}

TEST(FindCycleTest, TwoCycle) {
  const Topology t = OneByOne();
  DependencyGraph g(t);
  g.AddEdge(3, 7);
  g.AddEdge(7, 3);
  g.AddEdge(7, 9);
  g.Finalize();
  const auto c = FindCycle(g);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(std::set<int>(c->begin(), c->end()), (std::set<int>{3, 7}));
  EXPECT_FALSE(TopologicalOrder(g).has_value());
}

// Random graphs against a transitive-closure oracle; witnesses must be real
// cycles made of graph edges.
TEST(FindCycleTest, RandomGraphsMatchClosure) {
  const Topology t = OneByOne();
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    DependencyGraph g(t);
    const int n = g.num_nodes();
    std::set<std::pair<int, int>> edges;
    const int m = static_cast<int>(rng.Below(40));
    for (int i = 0; i < m; ++i) {
      const int a = static_cast<int>(rng.Below(n));
      const int b = static_cast<int>(rng.Below(n));
      g.AddEdge(a, b);
      edges.insert({a, b});
    }
    g.Finalize();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (const auto& [a, b] : edges) reach[a][b] = true;
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        if (!reach[i][k]) continue;
        for (int j = 0; j < n; ++j) {
          if (reach[k][j]) reach[i][j] = true;
        }
      }
    }
    bool cyclic = false;
    for (int i = 0; i < n; ++i) cyclic = cyclic || reach[i][i];
    const auto c = FindCycle(g);
    EXPECT_EQ(c.has_value(), cyclic);
    EXPECT_EQ(TopologicalOrder(g).has_value(), !cyclic);
    if (c) {
      for (std::size_t i = 0; i < c->size(); ++i) {
        const int a = (*c)[i];
        const int b = (*c)[(i + 1) % c->size()];
        EXPECT_TRUE(edges.count({a, b})) << a << "->" << b;
      }
    }
    // Deterministic for a given graph.
    EXPECT_EQ(FindCycle(g), c);
  }
}

TEST(CdgTest, SingleChipletXyIsAcyclic) {
  TopologyConfig cfg;
  cfg.chiplets = {{4, 4, 0, 0}};
  cfg.interposer_width = 4;
  cfg.interposer_height = 4;
  cfg.vls = {{0, 1, 0}};
  const Topology t = Topology::Build(cfg);
  const SelectionTable tables = BuildTables(t, TrafficProfile::Uniform(t));
  const DependencyGraph g = BuildCdg(t, tables, FaultScenario(1));
  EXPECT_GT(g.num_edges(), 0u);
  EXPECT_FALSE(FindCycle(g).has_value());
}

class BaselineCdg : public ::testing::Test {
 protected:
  BaselineCdg()
      : topo_(PresetTopology("baseline4")),
        tables_(BuildTables(topo_, TrafficProfile::Uniform(topo_))) {}
  Topology topo_;
  SelectionTable tables_;
};

// Independent edge enumeration: trace every packet along every combination
// of VN outcomes and collect consecutive channel pairs.
TEST_F(BaselineCdg, EdgesMatchPathEnumeration) {
  for (const char* name : {"none", "4faults:fig7a"}) {
    const FaultScenario s = ParseScenario(name, topo_);
    const RouteContext ctx{&topo_, &tables_, &s, RuleSet::kFull};
    const DependencyGraph g = BuildCdg(topo_, tables_, s);
    std::set<std::pair<int, int>> oracle;
    for (int a : topo_.Endpoints()) {
      for (int b : topo_.Endpoints()) {
        if (a == b) continue;
        const auto base = MakeRouteState(ctx, topo_.At(a), topo_.At(b));
        ASSERT_TRUE(base.has_value());
        const VnOptions start = SourceVnOptions(topo_, *base);
        for (int first = 0; first < start.size(); ++first) {
          // Up to three two-way decisions per path; enumerate them as bits.
          for (unsigned bits = 0; bits < 8; ++bits) {
            RouteState st = *base;
            st.vn = start[first];
            int decision = 0;
            const auto path = TracePath(ctx, st, [&](const VnOptions& o) {
              if (o.size() == 1) return o.first;
              return o[(bits >> decision++) & 1u];
            });
            ASSERT_TRUE(path.has_value());
            int held = DependencyGraph::NodeOf(g.InjectionChannel(a), st.vn);
            for (const Hop& h : *path) {
              const int node = DependencyGraph::NodeOf(
                  g.LinkChannel(topo_.Index(h.at), h.out), h.next);
              oracle.insert({held, node});
              held = node;
            }
          }
        }
      }
    }
    const std::set<std::pair<int, int>> built(g.edges().begin(), g.edges().end());
    EXPECT_EQ(built, oracle) << name;
  }
}

TEST_F(BaselineCdg, EveryPerChipletScenarioIsAcyclic) {
  int certified = 0;
  for (int c = 0; c < topo_.num_chiplets(); ++c) {
    for (std::uint32_t mask : EnumerateScenarios(4)) {
      const DependencyGraph g =
          BuildCdg(topo_, tables_, FaultScenario::FromLocalMask(topo_, c, mask));
      EXPECT_FALSE(FindCycle(g).has_value()) << c << ' ' << mask;
      EXPECT_TRUE(TopologicalOrder(g).has_value());
      ++certified;
    }
  }
  EXPECT_EQ(certified, 60);
  EXPECT_FALSE(FindCycle(BuildCdgAllLinkChoices(topo_)).has_value());
}

TEST(CdgTest, SixChipletIsAcyclic) {
  const Topology t = PresetTopology("six6");
  const SelectionTable tables = BuildTables(t, TrafficProfile::Uniform(t));
  EXPECT_FALSE(FindCycle(BuildCdg(t, tables, FaultScenario(24))).has_value());
  EXPECT_FALSE(FindCycle(BuildCdgAllLinkChoices(t)).has_value());
}

// Only VN0 -> VN1 edges may cross classes.
TEST_F(BaselineCdg, CrossClassEdgesOnlyClimb) {
  const DependencyGraph g = BuildCdgAllLinkChoices(topo_);
  int cross = 0;
  for (const auto& [a, b] : g.edges()) {
    if (g.VnOf(a) != g.VnOf(b)) {
      EXPECT_EQ(g.VnOf(a), Vn::k0);
      ++cross;
    }
  }
  EXPECT_GT(cross, 0);
}

TEST_F(BaselineCdg, EachRuleIsNecessary) {
  for (RuleSet r : {RuleSet::kNoRule1, RuleSet::kNoRule2, RuleSet::kNoRule3,
                    RuleSet::kSingleVn}) {
    const DependencyGraph g = BuildCdgAllLinkChoices(topo_, r);
    const CdgVerdict v = Certify(g, std::string(RuleSetName(r)));
    EXPECT_FALSE(v.acyclic) << RuleSetName(r);
    EXPECT_TRUE(v.kahn_agrees);
    EXPECT_GE(v.chiplets_on_cycle, 2) << RuleSetName(r);
    // The fault-free table graph already has the cycle.
    EXPECT_TRUE(FindCycle(BuildCdg(topo_, tables_, FaultScenario(16), r)).has_value())
        << RuleSetName(r);
  }
}

TEST_F(BaselineCdg, FaultFreeReachabilityIsComplete) {
  const ReachabilityReport r = Reachability(topo_, tables_, FaultScenario(16));
  EXPECT_EQ(r.total_pairs, 64 * 63);
  EXPECT_EQ(r.reachable_pairs, r.total_pairs);
  EXPECT_EQ(r.ratio, 1.0);
}

// One chiplet with every link faulty loses exactly the inter-chiplet pairs
// that touch it: ratio = 1 - 2 n (E - n) / (E (E - 1)).
TEST_F(BaselineCdg, DisconnectedChipletClosedForm) {
  const double e = 64.0;
  const double n = 16.0;
  const double expected = 1.0 - 2.0 * n * (e - n) / (e * (e - 1.0));
  for (int c = 0; c < 4; ++c) {
    const ReachabilityReport r =
        Reachability(topo_, tables_, FaultScenario::FromLocalMask(topo_, c, 0xF));
    EXPECT_EQ(r.total_pairs, 64 * 63);
    EXPECT_EQ(r.reachable_pairs, 64 * 63 - 2 * 16 * 48);
    EXPECT_EQ(r.ratio, expected);
  }
}

TEST_F(BaselineCdg, WeightedReachabilityUniformMatchesPairCount) {
  const FaultScenario cut = FaultScenario::FromLocalMask(topo_, 2, 0xF);
  EXPECT_DOUBLE_EQ(WeightedReachability(topo_, tables_, cut, TrafficProfile::Uniform(topo_)),
                   Reachability(topo_, tables_, cut).ratio);
}

// Direct oracle for the memoized sweep: evaluate every global mask.
std::vector<SweepRow> DirectSweep(const Topology& t, const SelectionTable& tables,
                                  int max_faults) {
  const int n = static_cast<int>(t.vls().size());
  std::vector<SweepRow> rows;
  for (int k = 1; k <= max_faults; ++k) {
    SweepRow row;
    row.faults = k;
    row.fault_rate = k / (2.0 * n);
    row.worst = 1.0;
    double sum = 0.0;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
      if (std::popcount(m) != k) continue;
      FaultScenario s(n);
      for (int v = 0; v < n; ++v) s.SetFaulty(v, (m >> v) & 1u);
      if (!s.Connected(t)) continue;
      const double r = Reachability(t, tables, s).ratio;
      sum += r;
      row.worst = std::min(row.worst, r);
      ++row.masks;
    }
    row.avg = row.masks ? sum / row.masks : 0.0;
    if (row.masks == 0) row.worst = 0.0;
    rows.push_back(row);
  }
  return rows;
}

TEST(SweepTest, MemoizedSweepMatchesDirectEvaluation) {
  TopologyConfig cfg;
  cfg.chiplets = {{2, 2, 0, 0}, {2, 2, 2, 0}, {2, 2, 0, 2}};
  cfg.interposer_width = 4;
  cfg.interposer_height = 4;
  cfg.vls = {{0, 0, 0}, {0, 1, 1}, {1, 1, 0}, {1, 0, 1}, {1, 1, 1}, {2, 0, 0}, {2, 1, 1}};
  cfg.interposer_sources = {{3, 3}, {2, 3}};
  const Topology t = Topology::Build(cfg);
  const SelectionTable tables = BuildTables(t, TrafficProfile::Uniform(t));
  const auto direct = DirectSweep(t, tables, 7);
  const auto memo = SweepScenarios(t, tables, 7);
  ASSERT_EQ(memo.size(), direct.size());
  for (std::size_t i = 0; i < memo.size(); ++i) {
    EXPECT_EQ(memo[i].faults, direct[i].faults);
    EXPECT_EQ(memo[i].masks, direct[i].masks) << i;
    EXPECT_NEAR(memo[i].avg, direct[i].avg, 1e-12) << i;
    EXPECT_EQ(memo[i].worst, direct[i].worst) << i;
    EXPECT_EQ(memo[i].fault_rate, direct[i].fault_rate);
  }
  // Beyond four faults every mask cuts some chiplet off.
  EXPECT_GT(memo[3].masks, 0);
  EXPECT_EQ(memo[4].masks, 0);
}

TEST_F(BaselineCdg, SweepCountsAndCompleteness) {
  const auto rows = SweepScenarios(topo_, tables_, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].masks, 16);
  EXPECT_EQ(rows[0].fault_rate, 1.0 / 32.0);
  EXPECT_EQ(rows[1].masks, 120);
  for (const SweepRow& r : rows) {
    EXPECT_EQ(r.avg, 1.0);
    EXPECT_EQ(r.worst, 1.0);
  }
}

TEST(SweepTest, SixChipletSingleFault) {
  const Topology t = PresetTopology("six6");
  const SelectionTable tables = BuildTables(t, TrafficProfile::Uniform(t));
  const auto rows = SweepScenarios(t, tables, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].masks, 24);
  EXPECT_NEAR(rows[0].fault_rate, 0.021, 0.0005);
  EXPECT_EQ(rows[0].worst, 1.0);
}

}  // namespace
}  // namespace chipnet
