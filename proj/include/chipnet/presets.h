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

#ifndef CHIPNET_PRESETS_H_
#define CHIPNET_PRESETS_H_

#include <string>
#include <string_view>
#include <vector>

#include "chipnet/selection.h"
#include "chipnet/topology.h"

namespace chipnet {

// One link at the middle of each chiplet edge, in N, E, S, W order, rotated
// so the layout is a pinwheel; {(1,0),(3,1),(2,3),(0,2)} for 4x4. Positions
// that coincide on tiny chiplets are merged.
std::vector<GridPoint> DefaultVlPlacement(int width, int height);

// Chiplets laid out in a grid of `cols` x `rows` 4x4 dies, each with the
// default placement, on an interposer that exactly tiles them.
TopologyConfig GridSystemConfig(int cols, int rows, int chiplet_size = 4);

// Four 4x4 chiplets on an 8x8 interposer, 16 links.
TopologyConfig Baseline4Config();
// Six 4x4 chiplets (2 columns x 3 rows) on an 8x12 interposer, 24 links.
TopologyConfig Six6Config();

// "baseline4" or "six6"; throws TopologyError otherwise.
Topology PresetTopology(std::string_view name);

// Parses a scenario spec:
//   "none"                   fault-free
//   "4faults:fig7a"          chiplet c loses local link c % 4
//   "8faults:fig7b"          chiplet c loses local links c % 4 and (c+1) % 4
//   "3,7,9" / "ids:3,7,9"    faulty global link ids
//   "mask:0x1f"              bit i = global link i faulty
FaultScenario ParseScenario(std::string_view spec, const Topology& topo);

}  // namespace chipnet

#endif  // CHIPNET_PRESETS_H_
