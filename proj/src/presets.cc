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

#include "chipnet/presets.h"

#include <algorithm>
#include <charconv>
#include <cstdint>

namespace chipnet {

std::vector<GridPoint> DefaultVlPlacement(int width, int height) {
  const int mx = (width - 1) / 2;
  const int my = (height - 1) / 2;
  const std::vector<GridPoint> raw = {
      {mx, 0},
      {width - 1, my},
      {width - 1 - mx, height - 1},
      {0, height - 1 - my},
  };
  std::vector<GridPoint> out;
  for (const GridPoint& p : raw) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

TopologyConfig GridSystemConfig(int cols, int rows, int chiplet_size) {
  TopologyConfig cfg;
  cfg.interposer_width = cols * chiplet_size;
  cfg.interposer_height = rows * chiplet_size;
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < cols; ++col) {
      const int c = static_cast<int>(cfg.chiplets.size());
      cfg.chiplets.push_back(
          {chiplet_size, chiplet_size, col * chiplet_size, row * chiplet_size});
      for (const GridPoint& p : DefaultVlPlacement(chiplet_size, chiplet_size)) {
        cfg.vls.push_back({c, p.x, p.y});
      }
    }
  }
  return cfg;
}

TopologyConfig Baseline4Config() { return GridSystemConfig(2, 2); }

TopologyConfig Six6Config() { return GridSystemConfig(2, 3); }

Topology PresetTopology(std::string_view name) {
  if (name == "baseline4") return Topology::Build(Baseline4Config());
  if (name == "six6") return Topology::Build(Six6Config());
  throw TopologyError("unknown preset '" + std::string(name) +
                      "' (expected baseline4 or six6)");
}

namespace {

int ParseInt(std::string_view s, int base = 10) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw TableError("bad number '" + std::string(s) + "' in scenario spec");
  }
  return v;
}

}  // namespace

FaultScenario ParseScenario(std::string_view spec, const Topology& topo) {
  const int nvl = static_cast<int>(topo.vls().size());
  FaultScenario s(nvl);
  if (spec.empty() || spec == "none") return s;
  const auto local = [&](int c, int local_id) {
    const auto ids = topo.ChipletVls(c);
    s.SetFaulty(ids[local_id % ids.size()], true);
  };
  if (spec == "4faults:fig7a") {
    for (int c = 0; c < topo.num_chiplets(); ++c) local(c, c % 4);
    return s;
  }
  if (spec == "8faults:fig7b") {
    for (int c = 0; c < topo.num_chiplets(); ++c) {
      local(c, c % 4);
      local(c, (c + 1) % 4);
    }
    return s;
  }
  if (spec.starts_with("mask:")) {
    std::string_view hex = spec.substr(5);
    if (hex.starts_with("0x")) hex.remove_prefix(2);
    std::uint64_t mask = 0;
    const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), mask, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size()) {
      throw TableError("bad mask in scenario spec '" + std::string(spec) + "'");
    }
    for (int i = 0; i < 64; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        if (i >= nvl) throw TableError("scenario mask names unknown link");
        s.SetFaulty(i, true);
      }
    }
    return s;
  }
  if (spec.starts_with("ids:")) spec.remove_prefix(4);
  std::vector<int> ids;
  while (!spec.empty()) {
    const std::size_t comma = spec.find(',');
    ids.push_back(ParseInt(spec.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  return FaultScenario::FromIds(nvl, ids);
}

}  // namespace chipnet
