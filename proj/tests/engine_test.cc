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


#include "chipnet/engine.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "chipnet/experiments.h"
#include "chipnet/presets.h"
#include "chipnet/verify.h"
#include "gtest/gtest.h"

namespace chipnet {
namespace {

class BaselineEngine : public ::testing::Test {
 protected:
  BaselineEngine()
      : topo_(PresetTopology("baseline4")),
        tables_(BuildTables(topo_, TrafficProfile::Uniform(topo_))),
        healthy_(16) {}

  TrafficSpec Short(double rate, std::uint64_t seed = 1) const {
    TrafficSpec t;
    t.rate = rate;
    t.seed = seed;
    t.warmup_cycles = 1000;
    t.measure_cycles = 5000;
    t.drain_cycles = 50000;
    return t;
  }

  // Links traversed by the first-choice route.
  int Hops(int src, int dst, const FaultScenario& s) const {
    const RouteContext ctx{&topo_, &tables_, &s, RuleSet::kFull};
    const auto state = MakeRouteState(ctx, topo_.At(src), topo_.At(dst));
    const auto path = TracePath(ctx, *state, [](const VnOptions& o) { return o.first; });
    return static_cast<int>(path->size()) - 1;
  }

  Topology topo_;
  SelectionTable tables_;
  FaultScenario healthy_;
};

TEST(ZeroLoadTest, Formula) {
  EXPECT_EQ(ZeroLoadLatency(0), 10);
  EXPECT_EQ(ZeroLoadLatency(5), 2 * 5 + 2 + 8);
  EngineConfig c;
  c.packet_flits = 4;
  EXPECT_EQ(ZeroLoadLatency(3, c), 2 * 3 + 2 + 4);
}

// A lone packet sees no contention: two cycles per hop, two for injection
// and ejection, and one per flit.
TEST_F(BaselineEngine, LonePacketHasZeroLoadLatency) {
  const std::vector<std::pair<RouterId, RouterId>> pairs = {
      {{0, 0, 0}, {0, 3, 3}},  // intra-chiplet
      {{0, 1, 3}, {2, 1, 1}},
      {{3, 3, 3}, {0, 0, 0}},
      {{1, 0, 2}, {1, 0, 1}},
  };
  for (const auto& [a, b] : pairs) {
    const int src = topo_.Index(a);
    const int dst = topo_.Index(b);
    TrafficSpec t = Short(0.0);
    Simulator sim(topo_, tables_, healthy_, t);
    ASSERT_TRUE(sim.Enqueue(src, dst));
    while (!sim.Idle()) sim.Step(false);
    const Metrics m = sim.metrics();
    const int h = Hops(src, dst, healthy_);
    EXPECT_EQ(m.delivered, 1);
    EXPECT_EQ(m.avg_latency, 2.0 * h + 2 + 8) << ToString(a) << "->" << ToString(b);
    EXPECT_EQ(m.avg_hops, h);
  }
}

TEST_F(BaselineEngine, LowLoadApproachesZeroLoad) {
  TrafficSpec t = Short(0.001);
  t.measure_cycles = 40000;
  const Metrics m = RunSimulation(topo_, tables_, healthy_, t);
  const double zero = MeanZeroLoadLatency(topo_, tables_, healthy_, EngineConfig{});
  ASSERT_GT(m.delivered, 2000);
  EXPECT_GE(m.avg_latency, zero * 0.97);
  EXPECT_LE(m.avg_latency, zero * 1.05);
  EXPECT_TRUE(SubSaturated(m));
}

TEST_F(BaselineEngine, AuditedRunIsSound) {
  EngineConfig c;
  c.audit = true;
  for (TrafficKind kind : {TrafficKind::kUniform, TrafficKind::kLocalized,
                           TrafficKind::kHotspot}) {
    TrafficSpec t = Short(0.012);
    t.kind = kind;
    const Metrics m = RunSimulation(topo_, tables_, healthy_, t, c);
    EXPECT_TRUE(m.drained);
    EXPECT_GT(m.delivered, 1000);
    EXPECT_EQ(m.generated, m.delivered);
    EXPECT_EQ(m.flits_injected, m.flits_ejected);
    EXPECT_EQ(m.flits_injected, 8 * m.packets_delivered);
    EXPECT_EQ(m.flits_in_flight, 0);
    EXPECT_EQ(m.hop_mismatches, 0);
    EXPECT_EQ(m.illegal_hops, 0);
    EXPECT_EQ(m.vn_decreases, 0);
    EXPECT_EQ(m.audit_violations, 0);
    EXPECT_NEAR(m.vn0_util + m.vn1_util, 100.0, 1e-9);
  }
}

TEST_F(BaselineEngine, SeededRunsAreDeterministic) {
  const Metrics a = RunSimulation(topo_, tables_, healthy_, Short(0.01, 4));
  const Metrics b = RunSimulation(topo_, tables_, healthy_, Short(0.01, 4));
  const Metrics c = RunSimulation(topo_, tables_, healthy_, Short(0.01, 5));
  EXPECT_EQ(MetricsCsvRow(a), MetricsCsvRow(b));
  EXPECT_EQ(a.vl_traversals, b.vl_traversals);
  EXPECT_NE(MetricsCsvRow(a), MetricsCsvRow(c));
}

TEST_F(BaselineEngine, LatencySweepMatchesSerialRuns) {
  const std::vector<double> rates = {0.004, 0.01};
  const auto sweep = LatencySweep(topo_, tables_, healthy_, Short(0.0, 2), rates, {}, 2);
  ASSERT_EQ(sweep.size(), 2u);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    EXPECT_EQ(MetricsCsvRow(sweep[i]),
              MetricsCsvRow(RunSimulation(topo_, tables_, healthy_, Short(rates[i], 2))));
  }
}

TEST_F(BaselineEngine, SeveralVcsPerVn) {
  EngineConfig c;
  c.audit = true;
  c.vcs_per_vn = 2;
  const Metrics m = RunSimulation(topo_, tables_, healthy_, Short(0.02), c);
  EXPECT_TRUE(m.drained);
  EXPECT_EQ(m.flits_injected, m.flits_ejected);
  EXPECT_EQ(m.audit_violations, 0);
  EXPECT_EQ(m.hop_mismatches, 0);
  for (int bad : {0, 9}) {
    c.vcs_per_vn = bad;
    EXPECT_THROW(Simulator(topo_, tables_, healthy_, Short(0.01), c), EngineError);
  }
}

TEST_F(BaselineEngine, FaultyLinksCarryNothing) {
  const FaultScenario s = ParseScenario("4faults:fig7a", topo_);
  const Metrics m = RunSimulation(topo_, tables_, s, Short(0.01));
  EXPECT_TRUE(m.drained);
  EXPECT_EQ(m.unreachable, 0);
  for (int v : s.FaultyIds()) EXPECT_EQ(m.vl_traversals[v], 0) << v;
  for (int v = 0; v < 16; ++v) {
    if (!s.IsFaulty(v)) {
      EXPECT_GT(m.vl_traversals[v], 0) << v;
    }
  }
}

TEST_F(BaselineEngine, FaultAtCycleZeroEqualsStaticScenario) {
  const FaultScenario s = ParseScenario("4faults:fig7a", topo_);
  const TrafficSpec t = Short(0.01, 3);
  Simulator sim(topo_, tables_, healthy_, t);
  sim.InjectFault(s, 0);
  const Metrics dynamic = sim.Run();
  const Metrics fixed = RunSimulation(topo_, tables_, s, t);
  EXPECT_EQ(MetricsCsvRow(dynamic), MetricsCsvRow(fixed));
  EXPECT_EQ(dynamic.vl_traversals, fixed.vl_traversals);
}

TEST_F(BaselineEngine, HealthyFaultEventChangesNothing) {
  const TrafficSpec t = Short(0.01, 3);
  Simulator sim(topo_, tables_, healthy_, t);
  sim.InjectFault(healthy_, 3000);
  EXPECT_EQ(MetricsCsvRow(sim.Run()), MetricsCsvRow(RunSimulation(topo_, tables_, healthy_, t)));
}

TEST_F(BaselineEngine, MidRunFaultStopsTrafficOnTheLink) {
  const int victim = topo_.ChipletVls(1)[2];
  FaultScenario s(16);
  s.SetFaulty(victim, true);
  EngineConfig c;
  c.audit = true;
  Simulator sim(topo_, tables_, healthy_, Short(0.01, 6), c);
  sim.InjectFault(s, 3000);
  while (sim.cycle() < 3000) sim.Step();
  const std::int64_t before = sim.metrics().vl_traversals[victim];
  EXPECT_GT(before, 0);
  for (int i = 0; i < 3000; ++i) sim.Step();
  while (!sim.Idle()) sim.Step(false);
  const Metrics m = sim.metrics();
  EXPECT_EQ(m.vl_traversals[victim], before);
  EXPECT_EQ(m.flits_injected, m.flits_ejected + m.flits_dropped);
  EXPECT_EQ(m.audit_violations, 0);
}

TEST_F(BaselineEngine, TraceTrafficDeliversEveryEntry) {
  TrafficSpec t;
  t.kind = TrafficKind::kTrace;
  t.trace = {{5, 0, 9}, {7, 3, 2}};
  const Metrics m = RunSimulation(topo_, tables_, healthy_, t);
  EXPECT_EQ(m.generated, 2);
  EXPECT_EQ(m.delivered, 2);
  EXPECT_TRUE(m.drained);

  t.trace.clear();
  const Metrics empty = RunSimulation(topo_, tables_, healthy_, t);
  EXPECT_EQ(empty.generated, 0);
  EXPECT_EQ(empty.delivered, 0);
  EXPECT_EQ(empty.flits_injected, 0);
}

TEST_F(BaselineEngine, DisconnectingScenarioNeedsOptIn) {
  const FaultScenario cut = FaultScenario::FromLocalMask(topo_, 0, 0xF);
  EXPECT_THROW(RunSimulation(topo_, tables_, cut, Short(0.005)), EngineError);
  EngineConfig c;
  c.allow_disconnect = true;
  const Metrics m = RunSimulation(topo_, tables_, cut, Short(0.005), c);
  EXPECT_GT(m.unreachable, 0);
  EXPECT_LT(m.reachability(), 1.0);
  EXPECT_TRUE(m.drained);
  // Uniform traffic loses the same share of flows as the static count.
  const double flows = Reachability(topo_, tables_, cut).ratio;
  EXPECT_NEAR(m.reachability(), flows, 0.02);
}

TEST_F(BaselineEngine, SabotagedRulesStillRouteButAreNotCertified) {
  // The engine runs any rule set; certification is the verifier's job.
  EngineConfig c;
  c.rules = RuleSet::kNoRule1;
  const Metrics m = RunSimulation(topo_, tables_, healthy_, Short(0.002), c);
  EXPECT_GT(m.delivered, 0);
  EXPECT_TRUE(FindCycle(BuildCdgAllLinkChoices(topo_, RuleSet::kNoRule1)).has_value());
}

}  // namespace
}  // namespace chipnet
