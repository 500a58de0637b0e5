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

#include "chipnet/selection.h"

#include <sstream>

#include "json.hpp"

namespace chipnet {

using nlohmann::json;

FaultScenario FaultScenario::FromIds(int num_vls, std::span<const int> faulty_ids) {
  FaultScenario s(num_vls);
  for (int id : faulty_ids) {
    if (id < 0 || id >= num_vls) {
      throw TableError("faulty link id " + std::to_string(id) + " out of range");
    }
    s.faulty_[id] = true;
  }
  return s;
}

FaultScenario FaultScenario::FromLocalMask(const Topology& topo, int chiplet,
                                           std::uint32_t mask) {
  FaultScenario s(static_cast<int>(topo.vls().size()));
  const auto ids = topo.ChipletVls(chiplet);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (mask & (1u << i)) s.faulty_[ids[i]] = true;
  }
  return s;
}

int FaultScenario::num_faulty() const {
  int n = 0;
  for (bool f : faulty_) n += f ? 1 : 0;
  return n;
}

std::vector<int> FaultScenario::FaultyIds() const {
  std::vector<int> ids;
  for (int i = 0; i < num_vls(); ++i) {
    if (faulty_[i]) ids.push_back(i);
  }
  return ids;
}

std::uint32_t FaultScenario::LocalMask(const Topology& topo, int chiplet) const {
  std::uint32_t mask = 0;
  const auto ids = topo.ChipletVls(chiplet);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (faulty_.at(ids[i])) mask |= 1u << i;
  }
  return mask;
}

bool FaultScenario::ChipletConnected(const Topology& topo, int chiplet) const {
  const std::uint32_t all = (1u << topo.VlCount(chiplet)) - 1u;
  return LocalMask(topo, chiplet) != all;
}

bool FaultScenario::Connected(const Topology& topo) const {
  for (int c = 0; c < topo.num_chiplets(); ++c) {
    if (!ChipletConnected(topo, c)) return false;
  }
  return true;
}

std::string ToString(const FaultScenario& s) {
  std::ostringstream os;
  os << "[";
  bool first = true;
  for (int id : s.FaultyIds()) {
    os << (first ? "" : ",") << id;
    first = false;
  }
  os << "]";
  return os.str();
}

std::string_view RoleName(Role r) {
  return r == Role::kSource ? "source" : "dest";
}

std::vector<int> MaskToIds(std::uint32_t mask) {
  std::vector<int> ids;
  for (int i = 0; i < 32; ++i) {
    if (mask & (1u << i)) ids.push_back(i);
  }
  return ids;
}

void SelectionTable::Set(int chiplet, std::uint32_t fault_mask, Role role,
                         SelectionSet set) {
  entries_[{chiplet, fault_mask, role}] = std::move(set);
}

const SelectionSet* SelectionTable::Find(int chiplet, std::uint32_t fault_mask,
                                         Role role) const {
  auto it = entries_.find({chiplet, fault_mask, role});
  return it == entries_.end() ? nullptr : &it->second;
}

int SelectionTable::SelectVl(const Topology& topo, const FaultScenario& scenario,
                             Role role, const RouterId& router) const {
  const int c = router.chiplet;
  if (!scenario.ChipletConnected(topo, c)) return -1;
  const std::uint32_t mask = scenario.LocalMask(topo, c);
  const SelectionSet* set = Find(c, mask, role);
  if (set == nullptr) {
    throw TableError("no " + std::string(RoleName(role)) +
                     " selection for chiplet " + std::to_string(c) +
                     " scenario mask " + std::to_string(mask));
  }
  const int local_router = router.y * topo.chiplet(c).width + router.x;
  return topo.ChipletVls(c)[set->choice.at(local_router)];
}

std::string SerializeTable(const SelectionTable& table) {
  // One compact entry per line keeps diffs of table files readable.
  std::ostringstream os;
  os << "{\"entries\": [";
  bool first = true;
  for (const auto& [key, set] : table.entries()) {
    const auto& [chiplet, mask, role] = key;
    json e = {{"chiplet", chiplet},
              {"scenario", MaskToIds(mask)},
              {"role", RoleName(role)},
              {"choices", set.choice}};
    os << (first ? "\n  " : ",\n  ") << e.dump();
    first = false;
  }
  os << "\n]}\n";
  return os.str();
}

SelectionTable DeserializeTable(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw TableError(std::string("table is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw TableError("table: missing array 'entries'");
  }
  SelectionTable table;
  for (const json& e : doc["entries"]) {
    try {
      const int chiplet = e.at("chiplet").get<int>();
      std::uint32_t mask = 0;
      for (int id : e.at("scenario").get<std::vector<int>>()) {
        if (id < 0 || id >= 32) throw TableError("table: bad scenario id");
        mask |= 1u << id;
      }
      const std::string role = e.at("role").get<std::string>();
      if (role != "source" && role != "dest") {
        throw TableError("table: unknown role '" + role + "'");
      }
      SelectionSet set{e.at("choices").get<std::vector<int>>()};
      table.Set(chiplet, mask, role == "source" ? Role::kSource : Role::kDest,
                std::move(set));
    } catch (const json::exception& ex) {
      throw TableError(std::string("table: malformed entry: ") + ex.what());
    }
  }
  return table;
}

void ValidateTable(const SelectionTable& table, const Topology& topo) {
  for (const auto& [key, set] : table.entries()) {
    const auto& [chiplet, mask, role] = key;
    if (chiplet < 0 || chiplet >= topo.num_chiplets()) {
      throw TableError("table entry for unknown chiplet " + std::to_string(chiplet));
    }
    const int vcount = topo.VlCount(chiplet);
    if (mask >> vcount) throw TableError("table scenario names unknown link");
    if (static_cast<int>(set.choice.size()) != topo.ChipletRouterCount(chiplet)) {
      throw TableError("table entry for chiplet " + std::to_string(chiplet) +
                       " has wrong router count");
    }
    for (int v : set.choice) {
      if (v < 0 || v >= vcount || (mask & (1u << v))) {
        throw TableError("table entry for chiplet " + std::to_string(chiplet) +
                         " selects a faulty or unknown link");
      }
    }
  }
}

}  // namespace chipnet
