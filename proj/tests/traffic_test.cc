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


#include "chipnet/traffic.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "chipnet/presets.h"
#include "gtest/gtest.h"

namespace chipnet {
namespace {

class BaselineTraffic : public ::testing::Test {
 protected:
  BaselineTraffic() : topo_(PresetTopology("baseline4")) {}
  Topology topo_;
};

TEST_F(BaselineTraffic, ParsesTraceWithCommentsAndBlankLines) {
  const auto t = ParseTrace("# cycle,src,dst\n\n7, 3, 2\n5,0,9  # first\n", topo_);
  const std::vector<TraceEntry> expected = {{5, 0, 9}, {7, 3, 2}};
  EXPECT_EQ(t, expected);
  EXPECT_TRUE(ParseTrace("", topo_).empty());
  EXPECT_TRUE(ParseTrace("# only a comment\n", topo_).empty());
}

TEST_F(BaselineTraffic, TraceKeepsFileOrderWithinACycle) {
  const auto t = ParseTrace("4,1,2\n4,0,3\n1,5,6\n", topo_);
  const std::vector<TraceEntry> expected = {{1, 5, 6}, {4, 1, 2}, {4, 0, 3}};
  EXPECT_EQ(t, expected);
}

TEST_F(BaselineTraffic, TraceErrorsNameTheLine) {
  const std::vector<std::pair<std::string, int>> bad = {
      {"1,2\n", 1},
      {"0,1,2\n# ok\n3,4,4\n", 3},
      {"0,1,2\n0,1,500\n", 2},
      {"0,1,70\n", 1},  // interposer router, not an endpoint by default
      {"-1,1,2\n", 1},
      {"x,1,2\n", 1},
      {"0,1,2,3\n", 1},
  };
  for (const auto& [text, line] : bad) {
    try {
      ParseTrace(text, topo_);
      ADD_FAILURE() << text;
    } catch (const TraceError& e) {
      EXPECT_EQ(e.line(), line) << text;
      EXPECT_NE(std::string(e.what()).find("line " + std::to_string(line)), std::string::npos);
    }
  }
}

TEST_F(BaselineTraffic, MissingTraceFileThrows) {
  EXPECT_ANY_THROW(LoadTrace("/nonexistent/trace.csv", topo_));
}

TEST_F(BaselineTraffic, UniformCoversEveryOtherEndpoint) {
  TrafficSpec spec;
  const DestinationSampler s(topo_, spec);
  Rng rng(3);
  std::vector<int> hits(topo_.num_routers(), 0);
  const int n = 63 * 2000;
  for (int i = 0; i < n; ++i) ++hits[s.Sample(10, rng)];
  EXPECT_EQ(hits[10], 0);
  for (int r : topo_.Endpoints()) {
    if (r == 10) continue;
    // 2000 expected per destination; 5 sigma is about 220.
    EXPECT_NEAR(hits[r], 2000, 230) << r;
  }
}

TEST_F(BaselineTraffic, LocalizedKeepsTheIntraShare) {
  TrafficSpec spec;
  spec.kind = TrafficKind::kLocalized;
  const DestinationSampler s(topo_, spec);
  Rng rng(5);
  const int n = 200000;
  int intra = 0;
  for (int i = 0; i < n; ++i) {
    const int src = topo_.Endpoints()[static_cast<std::size_t>(i % 64)];
    const int dst = s.Sample(src, rng);
    ASSERT_NE(dst, src);
    if (topo_.At(dst).chiplet == topo_.At(src).chiplet) ++intra;
  }
  EXPECT_NEAR(static_cast<double>(intra) / n, spec.intra_fraction, 0.005);
}

TEST_F(BaselineTraffic, HotspotsDrawTheirShare) {
  TrafficSpec spec;
  spec.kind = TrafficKind::kHotspot;
  const DestinationSampler s(topo_, spec);
  const auto& hot = s.hotspots();
  ASSERT_EQ(hot.size(), 3u);
  EXPECT_EQ(std::set<int>(hot.begin(), hot.end()).size(), 3u);
  for (int h : hot) EXPECT_TRUE(topo_.HasLocal(h));
  Rng rng(9);
  const int src = topo_.Index(RouterId{3, 3, 3});
  std::vector<int> hits(topo_.num_routers(), 0);
  const int n = 300000;
  for (int i = 0; i < n; ++i) ++hits[s.Sample(src, rng)];
  // Direct share plus the uniform background over 63 destinations.
  const double expected = spec.hotspot_fraction + (1.0 - 3 * spec.hotspot_fraction) / 63.0;
  for (int h : hot) EXPECT_NEAR(static_cast<double>(hits[h]) / n, expected, 0.003);
}

TEST_F(BaselineTraffic, HotspotValidation) {
  TrafficSpec spec;
  spec.kind = TrafficKind::kHotspot;
  spec.hotspots = {70};
  EXPECT_THROW(DestinationSampler(topo_, spec), std::invalid_argument);
  spec.hotspots = {1, 2, 3};
  spec.hotspot_fraction = 0.5;
  EXPECT_THROW(DestinationSampler(topo_, spec), std::invalid_argument);
}

TEST_F(BaselineTraffic, GenerationMatchesRate) {
  TrafficSpec spec;
  spec.rate = 0.02;
  const DestinationSampler s(topo_, spec);
  Rng rng(1);
  int generated = 0;
  const int n = 500000;
  for (int i = 0; i < n; ++i) generated += s.Generate(rng) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(generated) / n, 0.02, 0.001);
}

}  // namespace
}  // namespace chipnet
