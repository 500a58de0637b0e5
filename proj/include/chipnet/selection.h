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

// Fault scenarios and the per-scenario vertical-link selection tables that
// routers consult at run time.

#ifndef CHIPNET_SELECTION_H_
#define CHIPNET_SELECTION_H_

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "chipnet/topology.h"

namespace chipnet {

class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Set of faulty vertical links, by global id.
class FaultScenario {
 public:
  FaultScenario() = default;
  explicit FaultScenario(int num_vls) : faulty_(num_vls, false) {}

  static FaultScenario FromIds(int num_vls, std::span<const int> faulty_ids);
  // Faults only on `chiplet`, encoded as a bit per local link id.
  static FaultScenario FromLocalMask(const Topology& topo, int chiplet,
                                     std::uint32_t mask);

  int num_vls() const { return static_cast<int>(faulty_.size()); }
  bool IsFaulty(int vl) const { return faulty_.at(vl); }
  void SetFaulty(int vl, bool faulty) { faulty_.at(vl) = faulty; }
  int num_faulty() const;
  std::vector<int> FaultyIds() const;

  std::uint32_t LocalMask(const Topology& topo, int chiplet) const;
  bool ChipletConnected(const Topology& topo, int chiplet) const;
  // Every chiplet keeps at least one fault-free link.
  bool Connected(const Topology& topo) const;

  friend bool operator==(const FaultScenario&, const FaultScenario&) = default;

 private:
  std::vector<bool> faulty_;
};

std::string ToString(const FaultScenario& s);

// One vertical link per chiplet router, as local link ids in router-id order.
struct SelectionSet {
  std::vector<int> choice;
  friend auto operator<=>(const SelectionSet&, const SelectionSet&) = default;
};

enum class Role : std::uint8_t { kSource, kDest };
std::string_view RoleName(Role r);

// Per chiplet, per fault mask of that chiplet's links, per role: the selection
// set routers use. Source-role entries pick the first intermediate destination
// for packets leaving the chiplet; dest-role entries pick the second one for
// packets headed into it.
class SelectionTable {
 public:
  void Set(int chiplet, std::uint32_t fault_mask, Role role, SelectionSet set);
  const SelectionSet* Find(int chiplet, std::uint32_t fault_mask,
                           Role role) const;
  std::size_t size() const { return entries_.size(); }

  // Global id of the link chosen for `router` under `scenario`, or -1 when
  // the chiplet is disconnected. Throws TableError when the entry is missing.
  int SelectVl(const Topology& topo, const FaultScenario& scenario, Role role,
               const RouterId& router) const;

  using Key = std::tuple<int, std::uint32_t, Role>;
  const std::map<Key, SelectionSet>& entries() const { return entries_; }

  friend bool operator==(const SelectionTable&, const SelectionTable&) = default;

 private:
  std::map<Key, SelectionSet> entries_;
};

// Table files are JSON: {"entries": [{"chiplet", "scenario" (sorted faulty
// local link ids), "role" ("source"|"dest"), "choices"}]}.
std::string SerializeTable(const SelectionTable& table);
SelectionTable DeserializeTable(std::string_view document);
// Checks that every entry matches the topology and avoids its faulty links.
void ValidateTable(const SelectionTable& table, const Topology& topo);

std::vector<int> MaskToIds(std::uint32_t mask);

}  // namespace chipnet

#endif  // CHIPNET_SELECTION_H_
