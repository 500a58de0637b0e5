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

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace chipnet {

using nlohmann::json;

std::string ToString(const RouterId& r) {
  std::ostringstream os;
  if (r.on_interposer()) {
    os << "I";
  } else {
    os << "C" << r.chiplet;
  }
  os << "(" << r.x << "," << r.y << ")";
  return os.str();
}

Port Opposite(Port p) {
  switch (p) {
    case Port::kEast:
      return Port::kWest;
    case Port::kWest:
      return Port::kEast;
    case Port::kSouth:
      return Port::kNorth;
    case Port::kNorth:
      return Port::kSouth;
    case Port::kUp:
      return Port::kDown;
    case Port::kDown:
      return Port::kUp;
    case Port::kLocal:
      return Port::kLocal;
  }
  return Port::kLocal;
}

std::string_view PortName(Port p) {
  switch (p) {
    case Port::kEast:
      return "E";
    case Port::kWest:
      return "W";
    case Port::kSouth:
      return "S";
    case Port::kNorth:
      return "N";
    case Port::kLocal:
      return "L";
    case Port::kUp:
      return "U";
    case Port::kDown:
      return "D";
  }
  return "?";
}

namespace {

[[noreturn]] void Fail(const std::string& what) { throw TopologyError(what); }

bool Overlaps(const ChipletSpec& a, const ChipletSpec& b) {
  return a.origin_x < b.origin_x + b.width && b.origin_x < a.origin_x + a.width &&
         a.origin_y < b.origin_y + b.height && b.origin_y < a.origin_y + a.height;
}

}  // namespace

Topology Topology::Build(TopologyConfig config) {
  const int iw = config.interposer_width;
  const int ih = config.interposer_height;
  if (iw <= 0 || ih <= 0) Fail("interposer dimensions must be positive");
  if (config.chiplets.empty()) Fail("at least one chiplet is required");

  for (std::size_t c = 0; c < config.chiplets.size(); ++c) {
    const ChipletSpec& ch = config.chiplets[c];
    if (ch.width <= 0 || ch.height <= 0) {
      Fail("chiplet " + std::to_string(c) + " has non-positive dimensions");
    }
    if (ch.origin_x < 0 || ch.origin_y < 0 || ch.origin_x + ch.width > iw ||
        ch.origin_y + ch.height > ih) {
      Fail("chiplet " + std::to_string(c) +
           " footprint lies outside the interposer");
    }
    for (std::size_t o = 0; o < c; ++o) {
      if (Overlaps(ch, config.chiplets[o])) {
        Fail("chiplets " + std::to_string(o) + " and " + std::to_string(c) +
             " have overlapping footprints");
      }
    }
  }

  Topology t(std::move(config));
  const TopologyConfig& cfg = t.config_;
  const int nc = static_cast<int>(cfg.chiplets.size());

  int next = 0;
  t.chiplet_routers_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const ChipletSpec& ch = cfg.chiplets[c];
    t.chiplet_base_.push_back(next);
    for (int y = 0; y < ch.height; ++y) {
      for (int x = 0; x < ch.width; ++x) {
        t.routers_.push_back(RouterId{c, x, y});
        t.chiplet_routers_[c].push_back(next++);
      }
    }
  }
  t.interposer_base_ = next;
  for (int y = 0; y < ih; ++y) {
    for (int x = 0; x < iw; ++x) {
      t.routers_.push_back(RouterId{kInterposer, x, y});
      ++next;
    }
  }

  t.vl_at_router_.assign(t.routers_.size(), -1);
  t.chiplet_vls_.resize(nc);
  for (std::size_t i = 0; i < cfg.vls.size(); ++i) {
    const VlSpec& s = cfg.vls[i];
    if (s.chiplet < 0 || s.chiplet >= nc) {
      Fail("vertical link " + std::to_string(i) + " names unknown chiplet " +
           std::to_string(s.chiplet));
    }
    const ChipletSpec& ch = cfg.chiplets[s.chiplet];
    if (s.local_x < 0 || s.local_y < 0 || s.local_x >= ch.width ||
        s.local_y >= ch.height) {
      Fail("vertical link " + std::to_string(i) +
           " is attached to a non-existent router");
    }
    VerticalLink vl;
    vl.id = static_cast<int>(i);
    vl.chiplet = s.chiplet;
    vl.local_id = static_cast<int>(t.chiplet_vls_[s.chiplet].size());
    vl.chiplet_router = RouterId{s.chiplet, s.local_x, s.local_y};
    vl.interposer_router =
        RouterId{kInterposer, ch.origin_x + s.local_x, ch.origin_y + s.local_y};
    const int ci = t.Index(vl.chiplet_router);
    const int ii = t.Index(vl.interposer_router);
    if (t.vl_at_router_[ci] != -1) {
      Fail("duplicate vertical link on router " + ToString(vl.chiplet_router));
    }
    t.vl_at_router_[ci] = vl.id;
    t.vl_at_router_[ii] = vl.id;
    t.chiplet_vls_[s.chiplet].push_back(vl.id);
    t.vls_.push_back(vl);
  }
  for (int c = 0; c < nc; ++c) {
    if (t.chiplet_vls_[c].empty()) {
      Fail("chiplet " + std::to_string(c) + " has no vertical link");
    }
  }

  t.has_local_.assign(t.routers_.size(), false);
  for (int c = 0; c < nc; ++c) {
    for (int idx : t.chiplet_routers_[c]) t.has_local_[idx] = true;
  }
  std::set<GridPoint> seen_sources;
  for (const GridPoint& p : cfg.interposer_sources) {
    if (p.x < 0 || p.y < 0 || p.x >= iw || p.y >= ih) {
      Fail("interposer source (" + std::to_string(p.x) + "," +
           std::to_string(p.y) + ") lies outside the interposer");
    }
    if (!seen_sources.insert(p).second) {
      Fail("duplicate interposer source (" + std::to_string(p.x) + "," +
           std::to_string(p.y) + ")");
    }
    t.has_local_[t.Index(RouterId{kInterposer, p.x, p.y})] = true;
  }
  for (int i = 0; i < t.num_routers(); ++i) {
    if (t.has_local_[i]) t.endpoints_.push_back(i);
  }

  t.neighbors_.assign(t.routers_.size() * kNumPorts, -1);
  for (int i = 0; i < t.num_routers(); ++i) {
    const RouterId r = t.routers_[i];
    const auto set = [&](Port p, RouterId n) {
      if (t.Contains(n)) t.neighbors_[i * kNumPorts + static_cast<int>(p)] = t.Index(n);
    };
    set(Port::kEast, RouterId{r.chiplet, r.x + 1, r.y});
    set(Port::kWest, RouterId{r.chiplet, r.x - 1, r.y});
    set(Port::kSouth, RouterId{r.chiplet, r.x, r.y + 1});
    set(Port::kNorth, RouterId{r.chiplet, r.x, r.y - 1});
    const int vl = t.vl_at_router_[i];
    if (vl >= 0) {
      const VerticalLink& link = t.vls_[vl];
      if (r.on_interposer()) {
        set(Port::kUp, link.chiplet_router);
      } else {
        set(Port::kDown, link.interposer_router);
      }
    }
  }
  return t;
}

bool Topology::Contains(const RouterId& r) const {
  if (r.x < 0 || r.y < 0) return false;
  if (r.on_interposer()) {
    return r.x < config_.interposer_width && r.y < config_.interposer_height;
  }
  if (r.chiplet < 0 || r.chiplet >= num_chiplets()) return false;
  const ChipletSpec& ch = config_.chiplets[r.chiplet];
  return r.x < ch.width && r.y < ch.height;
}

int Topology::Index(const RouterId& r) const {
  if (!Contains(r)) throw TopologyError("no such router " + ToString(r));
  if (r.on_interposer()) {
    return interposer_base_ + r.y * config_.interposer_width + r.x;
  }
  return chiplet_base_[r.chiplet] + r.y * config_.chiplets[r.chiplet].width + r.x;
}

GridPoint Topology::GlobalPosition(const RouterId& r) const {
  if (r.on_interposer()) return {r.x, r.y};
  const ChipletSpec& ch = chiplet(r.chiplet);
  return {ch.origin_x + r.x, ch.origin_y + r.y};
}

std::optional<VerticalLink> Topology::VlUnder(const RouterId& r) const {
  const int id = vl_at_router_.at(Index(r));
  if (id < 0) return std::nullopt;
  return vls_[id];
}

bool Topology::HasPort(int index, Port p) const {
  if (p == Port::kLocal) return has_local_.at(index);
  return Neighbor(index, p) >= 0;
}

int HopDistance(const RouterId& a, const RouterId& b) {
  if (a.chiplet != b.chiplet) {
    throw TopologyError("hop distance across layers: " + ToString(a) + " vs " +
                        ToString(b));
  }
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

namespace {

int GetInt(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_integer()) {
    throw TopologyError(where + ": missing integer key '" + key + "'");
  }
  return j.at(key).get<int>();
}

}  // namespace

Topology LoadTopology(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw TopologyError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw TopologyError("config root must be an object");

  TopologyConfig cfg;
  if (!doc.contains("chiplets") || !doc["chiplets"].is_array()) {
    throw TopologyError("config: missing array 'chiplets'");
  }
  for (std::size_t i = 0; i < doc["chiplets"].size(); ++i) {
    const json& c = doc["chiplets"][i];
    const std::string where = "chiplets[" + std::to_string(i) + "]";
    cfg.chiplets.push_back({GetInt(c, "width", where), GetInt(c, "height", where),
                            GetInt(c, "origin_x", where),
                            GetInt(c, "origin_y", where)});
  }
  if (!doc.contains("interposer")) {
    throw TopologyError("config: missing object 'interposer'");
  }
  cfg.interposer_width = GetInt(doc["interposer"], "width", "interposer");
  cfg.interposer_height = GetInt(doc["interposer"], "height", "interposer");
  if (!doc.contains("vls") || !doc["vls"].is_array()) {
    throw TopologyError("config: missing array 'vls'");
  }
  for (std::size_t i = 0; i < doc["vls"].size(); ++i) {
    const json& v = doc["vls"][i];
    const std::string where = "vls[" + std::to_string(i) + "]";
    cfg.vls.push_back({GetInt(v, "chiplet", where), GetInt(v, "local_x", where),
                       GetInt(v, "local_y", where)});
  }
  if (doc.contains("sources")) {
    const json& s = doc["sources"];
    if (s.contains("interposer")) {
      if (!s["interposer"].is_array()) {
        throw TopologyError("config: 'sources.interposer' must be an array");
      }
      for (std::size_t i = 0; i < s["interposer"].size(); ++i) {
        const json& p = s["interposer"][i];
        const std::string where = "sources.interposer[" + std::to_string(i) + "]";
        cfg.interposer_sources.push_back({GetInt(p, "x", where), GetInt(p, "y", where)});
      }
    }
  }
  return Topology::Build(std::move(cfg));
}

Topology LoadTopologyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return LoadTopology(ss.str());
}

std::string SerializeTopology(const Topology& topo) {
  const TopologyConfig& cfg = topo.config();
  json doc = json::object();
  json chiplets = json::array();
  for (const ChipletSpec& c : cfg.chiplets) {
    chiplets.push_back({{"width", c.width},
                        {"height", c.height},
                        {"origin_x", c.origin_x},
                        {"origin_y", c.origin_y}});
  }
  doc["chiplets"] = chiplets;
  doc["interposer"] = {{"width", cfg.interposer_width},
                       {"height", cfg.interposer_height}};
  json vls = json::array();
  for (const VlSpec& v : cfg.vls) {
    vls.push_back({{"chiplet", v.chiplet}, {"local_x", v.local_x}, {"local_y", v.local_y}});
  }
  doc["vls"] = vls;
  json sources = json::array();
  for (const GridPoint& p : cfg.interposer_sources) {
    sources.push_back({{"x", p.x}, {"y", p.y}});
  }
  doc["sources"] = {{"interposer", sources}};
  // nlohmann::json objects are std::map backed, so keys come out sorted.
  return doc.dump(2) + "\n";
}

}  // namespace chipnet
