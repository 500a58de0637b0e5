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

#ifndef CHIPNET_TOPOLOGY_H_
#define CHIPNET_TOPOLOGY_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chipnet {

// Raised for malformed or inconsistent system descriptions.
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kInterposer = -1;

// A router position. `chiplet` is a chiplet index or kInterposer. Chiplet
// routers use chiplet-local coordinates; interposer routers use global ones.
// x grows East, y grows South.
struct RouterId {
  int chiplet = kInterposer;
  int x = 0;
  int y = 0;

  bool on_interposer() const { return chiplet == kInterposer; }
  friend auto operator<=>(const RouterId&, const RouterId&) = default;
};

std::string ToString(const RouterId& r);

enum class Port : std::uint8_t {
  kEast = 0,
  kWest = 1,
  kSouth = 2,
  kNorth = 3,
  kLocal = 4,
  kUp = 5,    // interposer -> chiplet
  kDown = 6,  // chiplet -> interposer
};
inline constexpr int kNumPorts = 7;

constexpr bool IsHorizontal(Port p) {
  return p == Port::kEast || p == Port::kWest || p == Port::kSouth ||
         p == Port::kNorth;
}
Port Opposite(Port p);
std::string_view PortName(Port p);

struct ChipletSpec {
  int width = 0;
  int height = 0;
  int origin_x = 0;
  int origin_y = 0;
  friend bool operator==(const ChipletSpec&, const ChipletSpec&) = default;
};

struct VlSpec {
  int chiplet = 0;
  int local_x = 0;
  int local_y = 0;
  friend bool operator==(const VlSpec&, const VlSpec&) = default;
};

struct GridPoint {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

// Plain description of a system, mirroring the config file keys.
struct TopologyConfig {
  std::vector<ChipletSpec> chiplets;
  int interposer_width = 0;
  int interposer_height = 0;
  std::vector<VlSpec> vls;
  std::vector<GridPoint> interposer_sources;
  friend bool operator==(const TopologyConfig&, const TopologyConfig&) =
      default;
};

struct VerticalLink {
  int id = 0;        // global index, position in the config's vls list
  int local_id = 0;  // index among the owning chiplet's links
  int chiplet = 0;
  RouterId chiplet_router;     // boundary router
  RouterId interposer_router;  // router directly beneath it
};

// Immutable 2.5D system: chiplet meshes stacked on an interposer mesh and
// joined by bidirectional vertical links.
//
// Routers are numbered globally: chiplet 0 row-major, chiplet 1 row-major,
// ..., then the interposer row-major. The same numbering is used by trace
// files and selection tables.
class Topology {
 public:
  // Validates `config`; throws TopologyError on any violated invariant.
  static Topology Build(TopologyConfig config);

  const TopologyConfig& config() const { return config_; }
  int num_chiplets() const { return static_cast<int>(config_.chiplets.size()); }
  const ChipletSpec& chiplet(int c) const { return config_.chiplets.at(c); }
  int interposer_width() const { return config_.interposer_width; }
  int interposer_height() const { return config_.interposer_height; }

  int num_routers() const { return static_cast<int>(routers_.size()); }
  int Index(const RouterId& r) const;
  const RouterId& At(int index) const { return routers_.at(index); }
  bool Contains(const RouterId& r) const;

  // Routers of one chiplet in router-id (row-major) order.
  std::span<const int> ChipletRouters(int c) const {
    return chiplet_routers_.at(c);
  }
  int ChipletRouterCount(int c) const {
    return chiplet(c).width * chiplet(c).height;
  }

  GridPoint GlobalPosition(const RouterId& r) const;

  std::span<const VerticalLink> vls() const { return vls_; }
  const VerticalLink& vl(int id) const { return vls_.at(id); }
  // Global ids of a chiplet's links, ordered by local id.
  std::span<const int> ChipletVls(int c) const { return chiplet_vls_.at(c); }
  int VlCount(int c) const { return static_cast<int>(chiplet_vls_.at(c).size()); }

  RouterId BoundaryRouterOf(const VerticalLink& vl) const {
    return vl.chiplet_router;
  }
  // The link attached to `r` (as boundary router or as interposer router
  // beneath one), if any.
  std::optional<VerticalLink> VlUnder(const RouterId& r) const;
  bool IsBoundary(const RouterId& r) const {
    return !r.on_interposer() && VlUnder(r).has_value();
  }

  // Neighbor router index across `p`, or -1. Local has no neighbor.
  int Neighbor(int index, Port p) const {
    return neighbors_[static_cast<std::size_t>(index) * kNumPorts +
                      static_cast<int>(p)];
  }
  bool HasPort(int index, Port p) const;
  bool HasLocal(int index) const { return has_local_.at(index); }

  // Router indices with a local injection/ejection port, ascending.
  std::span<const int> Endpoints() const { return endpoints_; }

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.config_ == b.config_;
  }

 private:
  explicit Topology(TopologyConfig config) : config_(std::move(config)) {}

  TopologyConfig config_;
  std::vector<RouterId> routers_;
  std::vector<int> chiplet_base_;
  int interposer_base_ = 0;
  std::vector<std::vector<int>> chiplet_routers_;
  std::vector<VerticalLink> vls_;
  std::vector<std::vector<int>> chiplet_vls_;
  std::vector<int> vl_at_router_;  // per router index, -1 if none
  std::vector<int> neighbors_;
  std::vector<bool> has_local_;
  std::vector<int> endpoints_;
};

// Manhattan distance between two routers of the same mesh layer. Throws
// TopologyError for routers on different layers.
int HopDistance(const RouterId& a, const RouterId& b);

// Config documents are JSON with keys `chiplets[].{width,height,origin_x,
// origin_y}`, `interposer.{width,height}`, `vls[].{chiplet,local_x,local_y}`
// and `sources.interposer[].{x,y}`.
Topology LoadTopology(std::string_view document);
Topology LoadTopologyFile(const std::string& path);
std::string SerializeTopology(const Topology& topo);

}  // namespace chipnet

#endif  // CHIPNET_TOPOLOGY_H_
