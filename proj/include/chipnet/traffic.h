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

// Synthetic and trace-driven packet sources.

#ifndef CHIPNET_TRAFFIC_H_
#define CHIPNET_TRAFFIC_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chipnet/random.h"
#include "chipnet/topology.h"

namespace chipnet {

class TraceError : public std::runtime_error {
 public:
  TraceError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class TrafficKind : std::uint8_t { kUniform, kLocalized, kHotspot, kTrace };
std::string_view TrafficKindName(TrafficKind k);

struct TraceEntry {
  std::int64_t cycle = 0;
  int src = 0;  // global router index
  int dst = 0;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct TrafficSpec {
  TrafficKind kind = TrafficKind::kUniform;
  // Bernoulli packet generation probability per endpoint per cycle.
  double rate = 0.01;
  // Localized: share of packets kept on the source's own chiplet.
  double intra_fraction = 0.4;
  // Hotspot: each listed router receives this share of all packets on top
  // of the uniform background. Empty means DefaultHotspots.
  std::vector<int> hotspots;
  double hotspot_fraction = 0.10;
  std::vector<TraceEntry> trace;
  std::uint64_t seed = 1;
  std::int64_t warmup_cycles = 10000;
  std::int64_t measure_cycles = 50000;
  // Drain stops this many cycles after the measurement window.
  std::int64_t drain_cycles = 200000;
};

// One router per chiplet for the first three chiplets (fewer if the system
// is smaller): the chiplet router closest to the centre of the interposer,
// lowest index on ties.
std::vector<int> DefaultHotspots(const Topology& topo);

// `cycle,src,dst` lines; blank lines and `#` comments ignored. Entries must
// name distinct endpoints. Result is stably sorted by cycle.
std::vector<TraceEntry> ParseTrace(std::string_view text, const Topology& topo);
std::vector<TraceEntry> LoadTrace(const std::string& path, const Topology& topo);

// Picks destinations for synthetic traffic. Deterministic given the Rng.
class DestinationSampler {
 public:
  DestinationSampler(const Topology& topo, const TrafficSpec& spec);

  // Whether `src` generates a packet this cycle.
  bool Generate(Rng& rng) const { return rng.Bernoulli(rate_); }
  int Sample(int src, Rng& rng) const;

  const std::vector<int>& hotspots() const { return hotspots_; }

 private:
  int UniformOther(const std::vector<int>& pool, int src, Rng& rng) const;

  TrafficKind kind_;
  double rate_;
  double intra_fraction_;
  double hotspot_fraction_;
  std::vector<int> endpoints_;
  std::vector<int> group_of_;                 // per router: chiplet, or chiplets for interposer
  std::vector<std::vector<int>> group_members_;
  std::vector<std::vector<int>> remote_;      // per group: endpoints outside it
  std::vector<int> hotspots_;
};

}  // namespace chipnet

#endif  // CHIPNET_TRAFFIC_H_
