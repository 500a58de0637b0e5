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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace chipnet {

std::string_view TrafficKindName(TrafficKind k) {
  switch (k) {
    case TrafficKind::kUniform:
      return "uniform";
    case TrafficKind::kLocalized:
      return "localized";
    case TrafficKind::kHotspot:
      return "hotspot";
    case TrafficKind::kTrace:
      return "trace";
  }
  return "?";
}

std::vector<int> DefaultHotspots(const Topology& topo) {
  // Doubled coordinates keep the centre integral.
  const int cx = topo.interposer_width() - 1;
  const int cy = topo.interposer_height() - 1;
  std::vector<int> out;
  for (int c = 0; c < std::min(3, topo.num_chiplets()); ++c) {
    int best = -1;
    int best_d = std::numeric_limits<int>::max();
    for (int r : topo.ChipletRouters(c)) {
      const GridPoint p = topo.GlobalPosition(topo.At(r));
      const int d = std::abs(2 * p.x - cx) + std::abs(2 * p.y - cy);
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    out.push_back(best);
  }
  return out;
}

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T ParseField(std::string_view s, int line, const char* name) {
  s = Trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw TraceError(line, std::string("bad ") + name + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<TraceEntry> ParseTrace(std::string_view text, const Topology& topo) {
  std::vector<TraceEntry> out;
  int line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    while (true) {
      const std::size_t comma = line.find(',');
      fields.push_back(line.substr(0, comma));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (fields.size() != 3) {
      throw TraceError(line_no, "expected cycle,src,dst");
    }
    TraceEntry e;
    e.cycle = ParseField<std::int64_t>(fields[0], line_no, "cycle");
    e.src = ParseField<int>(fields[1], line_no, "source");
    e.dst = ParseField<int>(fields[2], line_no, "destination");
    if (e.cycle < 0) throw TraceError(line_no, "negative cycle");
    for (int r : {e.src, e.dst}) {
      if (r < 0 || r >= topo.num_routers()) {
        throw TraceError(line_no, "router " + std::to_string(r) + " out of range");
      }
      if (!topo.HasLocal(r)) {
        throw TraceError(line_no, "router " + std::to_string(r) + " is not an endpoint");
      }
    }
    if (e.src == e.dst) throw TraceError(line_no, "source equals destination");
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const TraceEntry& a, const TraceEntry& b) {
    return a.cycle < b.cycle;
  });
  return out;
}

std::vector<TraceEntry> LoadTrace(const std::string& path, const Topology& topo) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseTrace(buf.str(), topo);
}

DestinationSampler::DestinationSampler(const Topology& topo, const TrafficSpec& spec)
    : kind_(spec.kind),
      rate_(spec.rate),
      intra_fraction_(spec.intra_fraction),
      hotspot_fraction_(spec.hotspot_fraction) {
  const auto e = topo.Endpoints();
  endpoints_.assign(e.begin(), e.end());
  const int groups = topo.num_chiplets() + 1;
  group_of_.assign(topo.num_routers(), groups - 1);
  group_members_.resize(groups);
  remote_.resize(groups);
  for (int r : endpoints_) {
    const int c = topo.At(r).chiplet;
    group_of_[r] = c == kInterposer ? groups - 1 : c;
    group_members_[group_of_[r]].push_back(r);
  }
  for (int g = 0; g < groups; ++g) {
    for (int r : endpoints_) {
      if (group_of_[r] != g) remote_[g].push_back(r);
    }
  }
  if (kind_ == TrafficKind::kHotspot) {
    hotspots_ = spec.hotspots.empty() ? DefaultHotspots(topo) : spec.hotspots;
    for (int h : hotspots_) {
      if (h < 0 || h >= topo.num_routers() || !topo.HasLocal(h)) {
        throw std::invalid_argument("hotspot " + std::to_string(h) +
                                    " is not an endpoint");
      }
    }
    if (hotspot_fraction_ * static_cast<double>(hotspots_.size()) > 1.0) {
      throw std::invalid_argument("hotspot shares exceed 1");
    }
  }
}

int DestinationSampler::UniformOther(const std::vector<int>& pool, int src,
                                     Rng& rng) const {
  const auto it = std::lower_bound(pool.begin(), pool.end(), src);
  const bool contains = it != pool.end() && *it == src;
  const std::size_t n = pool.size() - (contains ? 1 : 0);
  if (n == 0) return -1;
  std::size_t i = rng.Below(n);
  if (contains && i >= static_cast<std::size_t>(it - pool.begin())) ++i;
  return pool[i];
}

int DestinationSampler::Sample(int src, Rng& rng) const {
  switch (kind_) {
    case TrafficKind::kLocalized: {
      const int g = group_of_[src];
      if (rng.Bernoulli(intra_fraction_)) {
        const int d = UniformOther(group_members_[g], src, rng);
        if (d >= 0) return d;
      }
      const int d = UniformOther(remote_[g], src, rng);
      return d >= 0 ? d : UniformOther(endpoints_, src, rng);
    }
    case TrafficKind::kHotspot: {
      const double u = rng.Uniform();
      for (std::size_t k = 0; k < hotspots_.size(); ++k) {
        if (u < hotspot_fraction_ * static_cast<double>(k + 1)) {
          if (hotspots_[k] != src) return hotspots_[k];
          break;
        }
      }
      return UniformOther(endpoints_, src, rng);
    }
    case TrafficKind::kUniform:
    case TrafficKind::kTrace:
      break;
  }
  return UniformOther(endpoints_, src, rng);
}

}  // namespace chipnet
