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

#include "chipnet/topology.h"

#include <set>
#include <string>

#include "chipnet/presets.h"
#include "gtest/gtest.h"

namespace chipnet {
namespace {

TEST(TopologyTest, BaselineCounts) {
  const Topology t = PresetTopology("baseline4");
  EXPECT_EQ(t.num_chiplets(), 4);
  EXPECT_EQ(t.interposer_width(), 8);
  EXPECT_EQ(t.interposer_height(), 8);
  EXPECT_EQ(t.num_routers(), 64 + 64);
  EXPECT_EQ(t.vls().size(), 16u);
  for (int c = 0; c < 4; ++c) EXPECT_EQ(t.VlCount(c), 4);
  // Chiplet routers only; interposer sources are opt-in.
  EXPECT_EQ(t.Endpoints().size(), 64u);
}

TEST(TopologyTest, SixChipletPreset) {
  const Topology t = PresetTopology("six6");
  EXPECT_EQ(t.num_chiplets(), 6);
  EXPECT_EQ(t.interposer_width(), 8);
  EXPECT_EQ(t.interposer_height(), 12);
  EXPECT_EQ(t.vls().size(), 24u);
}

TEST(TopologyTest, DefaultPlacementOnChipletEdges) {
  const auto p = DefaultVlPlacement(4, 4);
  const std::vector<GridPoint> expected = {{1, 0}, {3, 1}, {2, 3}, {0, 2}};
  EXPECT_EQ(p, expected);
}

TEST(TopologyTest, MinimalSystem) {
  TopologyConfig cfg;
  cfg.chiplets = {{1, 1, 0, 0}};
  cfg.interposer_width = 1;
  cfg.interposer_height = 1;
  cfg.vls = {{0, 0, 0}};
  const Topology t = Topology::Build(cfg);
  EXPECT_EQ(t.num_routers(), 2);
  EXPECT_EQ(t.vls().size(), 1u);
  EXPECT_TRUE(t.HasPort(0, Port::kDown));
  EXPECT_TRUE(t.HasPort(1, Port::kUp));
}

TopologyConfig TwoChiplets() {
  TopologyConfig cfg;
  cfg.chiplets = {{2, 2, 0, 0}, {2, 2, 2, 0}};
  cfg.interposer_width = 4;
  cfg.interposer_height = 2;
  cfg.vls = {{0, 0, 0}, {1, 1, 1}};
  return cfg;
}

TEST(TopologyTest, RejectsInvalidConfigs) {
  TopologyConfig overlap = TwoChiplets();
  overlap.chiplets[1].origin_x = 1;
  EXPECT_THROW(Topology::Build(overlap), TopologyError);

  TopologyConfig outside = TwoChiplets();
  outside.chiplets[1].origin_y = 1;
  EXPECT_THROW(Topology::Build(outside), TopologyError);

  TopologyConfig no_link = TwoChiplets();
  no_link.vls.pop_back();
  EXPECT_THROW(Topology::Build(no_link), TopologyError);

  TopologyConfig duplicate = TwoChiplets();
  duplicate.vls.push_back({0, 0, 0});
  EXPECT_THROW(Topology::Build(duplicate), TopologyError);

  TopologyConfig bad_router = TwoChiplets();
  bad_router.vls.push_back({1, 2, 0});
  EXPECT_THROW(Topology::Build(bad_router), TopologyError);

  TopologyConfig bad_chiplet = TwoChiplets();
  bad_chiplet.vls.push_back({5, 0, 0});
  EXPECT_THROW(Topology::Build(bad_chiplet), TopologyError);
}

TEST(TopologyTest, HopDistance) {
  const RouterId a{0, 0, 0};
  EXPECT_EQ(HopDistance(a, RouterId{0, 3, 2}), 5);
  EXPECT_EQ(HopDistance(a, a), 0);
  EXPECT_EQ(HopDistance(RouterId{0, 1, 3}, RouterId{0, 2, 3}), 1);
  EXPECT_THROW(HopDistance(a, RouterId{kInterposer, 0, 0}), TopologyError);
  EXPECT_THROW(HopDistance(a, RouterId{1, 0, 0}), TopologyError);
}

TEST(TopologyTest, BoundaryAccessors) {
  const Topology t = PresetTopology("baseline4");
  const VerticalLink& v0 = t.vl(t.ChipletVls(0)[0]);
  EXPECT_EQ(t.BoundaryRouterOf(v0), (RouterId{0, 1, 0}));
  EXPECT_FALSE(t.VlUnder(RouterId{0, 1, 1}).has_value());
  const VerticalLink& v23 = t.vl(t.ChipletVls(2)[3]);
  const auto under = t.VlUnder(v23.interposer_router);
  ASSERT_TRUE(under.has_value());
  EXPECT_EQ(under->id, v23.id);
  EXPECT_EQ(under->chiplet, 2);
}

TEST(TopologyTest, LinksShareFootprint) {
  for (const char* name : {"baseline4", "six6"}) {
    const Topology t = PresetTopology(name);
    for (const VerticalLink& v : t.vls()) {
      const GridPoint a = t.GlobalPosition(v.chiplet_router);
      const GridPoint b = t.GlobalPosition(v.interposer_router);
      EXPECT_EQ(a, b) << name << " link " << v.id;
    }
  }
}

TEST(TopologyTest, VerticalPortsOnlyWhereLinksAttach) {
  const Topology t = PresetTopology("baseline4");
  for (int i = 0; i < t.num_routers(); ++i) {
    const RouterId& r = t.At(i);
    const bool has_link = t.VlUnder(r).has_value();
    EXPECT_EQ(t.HasPort(i, Port::kDown), !r.on_interposer() && has_link) << ToString(r);
    EXPECT_EQ(t.HasPort(i, Port::kUp), r.on_interposer() && has_link) << ToString(r);
  }
}

TEST(TopologyTest, NumberingChipletsFirstRowMajor) {
  const Topology t = PresetTopology("baseline4");
  EXPECT_EQ(t.At(0), (RouterId{0, 0, 0}));
  EXPECT_EQ(t.At(1), (RouterId{0, 1, 0}));
  EXPECT_EQ(t.At(4), (RouterId{0, 0, 1}));
  EXPECT_EQ(t.At(16), (RouterId{1, 0, 0}));
  EXPECT_EQ(t.At(64), (RouterId{kInterposer, 0, 0}));
  EXPECT_EQ(t.At(64 + 8), (RouterId{kInterposer, 0, 1}));
  for (int i = 0; i < t.num_routers(); ++i) EXPECT_EQ(t.Index(t.At(i)), i);
}

TEST(TopologyTest, OrientationEastGrowsXSouthGrowsY) {
  const Topology t = PresetTopology("baseline4");
  const int r = t.Index(RouterId{0, 1, 1});
  EXPECT_EQ(t.At(t.Neighbor(r, Port::kEast)), (RouterId{0, 2, 1}));
  EXPECT_EQ(t.At(t.Neighbor(r, Port::kWest)), (RouterId{0, 0, 1}));
  EXPECT_EQ(t.At(t.Neighbor(r, Port::kSouth)), (RouterId{0, 1, 2}));
  EXPECT_EQ(t.At(t.Neighbor(r, Port::kNorth)), (RouterId{0, 1, 0}));
  // Meshes do not connect horizontally across chiplet edges.
  EXPECT_EQ(t.Neighbor(t.Index(RouterId{0, 3, 0}), Port::kEast), -1);
}

TEST(TopologyTest, SerializationRoundTrip) {
  TopologyConfig cfg = Baseline4Config();
  cfg.interposer_sources = {{3, 4}, {0, 0}};
  const Topology t = Topology::Build(cfg);
  const std::string doc = SerializeTopology(t);
  const Topology back = LoadTopology(doc);
  EXPECT_EQ(back, t);
  EXPECT_EQ(SerializeTopology(back), doc);
  EXPECT_TRUE(back.HasLocal(back.Index(RouterId{kInterposer, 3, 4})));
}

TEST(TopologyTest, LoaderReportsProblems) {
  EXPECT_THROW(LoadTopology("not json"), TopologyError);
  EXPECT_THROW(LoadTopology(R"({"interposer": {"width": 1, "height": 1}})"), TopologyError);
  try {
    LoadTopologyFile("/nonexistent/chipnet.json");
    FAIL();
  } catch (const TopologyError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/chipnet.json"), std::string::npos);
  }
}

}  // namespace
}  // namespace chipnet
