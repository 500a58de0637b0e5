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

#include "chipnet/verify.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace chipnet {

DependencyGraph::DependencyGraph(const Topology& topo)
    : topo_(&topo),
      injection_base_(topo.num_routers() * kNumPorts),
      num_nodes_((topo.num_routers() * kNumPorts + topo.num_routers()) * kNumVns) {}

Channel DependencyGraph::ChannelOf(int node) const {
  const int channel = node / kNumVns;
  if (channel >= injection_base_) {
    return Channel{channel - injection_base_, Port::kLocal, true};
  }
  return Channel{channel / kNumPorts, static_cast<Port>(channel % kNumPorts), false};
}

int DependencyGraph::LayerOf(int node) const {
  return topo_->At(ChannelOf(node).router).chiplet;
}

std::string DependencyGraph::Describe(int node) const {
  const Channel ch = ChannelOf(node);
  std::string out = ToString(topo_->At(ch.router));
  out += ch.injection ? ":inject" : ":" + std::string(PortName(ch.port));
  out += "/";
  out += VnName(VnOf(node));
  return out;
}

void DependencyGraph::Finalize() {
  edges_.insert(edges_.end(), pending_.begin(), pending_.end());
  pending_.clear();
  pending_.shrink_to_fit();
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  offsets_.assign(num_nodes_ + 1, 0);
  for (const auto& [from, to] : edges_) ++offsets_[from + 1];
  for (int i = 0; i < num_nodes_; ++i) offsets_[i + 1] += offsets_[i];
  targets_.resize(edges_.size());
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [from, to] : edges_) targets_[fill[from]++] = to;
}

namespace {

// Follows every VN branch of one packet and records hold -> request edges.
// A route that turns out unroutable contributes nothing past the point where
// it stops; such packets are never injected.
void WalkAll(const RouteContext& ctx, DependencyGraph& g, RouteState state,
             RouterId at, Port in, int held_node, int depth) {
  const Topology& topo = *ctx.topo;
  if (depth > 4 * topo.num_routers() + 8) {
    throw std::logic_error("route walk does not terminate");
  }
  const RouteOptions opt = ComputeRouteOptions(ctx, state, at, in);
  if (opt.unroutable) return;
  const int at_index = topo.Index(at);
  const int channel = g.LinkChannel(at_index, opt.out);
  for (int i = 0; i < opt.vns.size(); ++i) {
    const Vn vn = opt.vns[i];
    const int node = DependencyGraph::NodeOf(channel, vn);
    g.AddEdge(held_node, node);
    if (opt.out == Port::kLocal) continue;
    RouteState next = opt.next;
    next.vn = vn;
    WalkAll(ctx, g, next, Step(topo, at, opt.out), opt.out, node, depth + 1);
  }
}

void WalkFromSource(const RouteContext& ctx, DependencyGraph& g,
                    const RouteState& base) {
  const Topology& topo = *ctx.topo;
  const int inj = g.InjectionChannel(topo.Index(base.src));
  const VnOptions start = SourceVnOptions(topo, base, ctx.rules);
  for (int i = 0; i < start.size(); ++i) {
    RouteState s = base;
    s.vn = start[i];
    WalkAll(ctx, g, s, s.src, Port::kLocal, DependencyGraph::NodeOf(inj, s.vn), 0);
  }
}

}  // namespace

DependencyGraph BuildCdg(const Topology& topo, const SelectionTable& tables,
                         const FaultScenario& scenario, RuleSet rules) {
  DependencyGraph g(topo);
  const RouteContext ctx{&topo, &tables, &scenario, rules};
  for (int s : topo.Endpoints()) {
    for (int d : topo.Endpoints()) {
      if (s == d) continue;
      const std::optional<RouteState> base = MakeRouteState(ctx, topo.At(s), topo.At(d));
      if (!base) continue;
      WalkFromSource(ctx, g, *base);
    }
  }
  g.Finalize();
  return g;
}

DependencyGraph BuildCdgAllLinkChoices(const Topology& topo, RuleSet rules) {
  DependencyGraph g(topo);
  const FaultScenario healthy(static_cast<int>(topo.vls().size()));
  const SelectionTable no_tables;  // never consulted: both links are preset
  const RouteContext ctx{&topo, &no_tables, &healthy, rules};
  const std::vector<int> none = {-1};
  for (int s : topo.Endpoints()) {
    for (int d : topo.Endpoints()) {
      if (s == d) continue;
      RouteState base;
      base.src = topo.At(s);
      base.dst = topo.At(d);
      if (base.src.chiplet == base.dst.chiplet) {
        base.phase = Phase::kIntraOnly;
        WalkFromSource(ctx, g, base);
        continue;
      }
      const auto links = [&](const RouterId& r) -> std::vector<int> {
        if (r.on_interposer()) return none;
        const auto ids = topo.ChipletVls(r.chiplet);
        return {ids.begin(), ids.end()};
      };
      base.phase = base.src.on_interposer() ? Phase::kInterposer : Phase::kSourceChiplet;
      for (int first : links(base.src)) {
        for (int second : links(base.dst)) {
          RouteState st = base;
          st.first_vl = first;
          st.second_vl = second;
          WalkFromSource(ctx, g, st);
        }
      }
    }
  }
  g.Finalize();
  return g;
}

std::optional<std::vector<int>> FindCycle(const DependencyGraph& g) {
  enum : std::uint8_t { kWhite, kGray, kBlack };
  const int n = g.num_nodes();
  std::vector<std::uint8_t> color(n, kWhite);
  std::vector<int> parent(n, -1);
  // Explicit stack of (node, next successor offset).
  std::vector<std::pair<int, const int*>> stack;
  for (int root = 0; root < n; ++root) {
    if (color[root] != kWhite) continue;
    color[root] = kGray;
    stack.push_back({root, g.Successors(root).first});
    while (!stack.empty()) {
      auto& [u, it] = stack.back();
      const int* end = g.Successors(u).second;
      if (it == end) {
        color[u] = kBlack;
        stack.pop_back();
        continue;
      }
      const int v = *it++;
      if (color[v] == kGray) {
        std::vector<int> cycle;
        for (int w = u; w != v; w = parent[w]) cycle.push_back(w);
        cycle.push_back(v);
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (color[v] == kWhite) {
        color[v] = kGray;
        parent[v] = u;
        stack.push_back({v, g.Successors(v).first});
      }
    }
  }
  return std::nullopt;
}

std::optional<std::vector<int>> TopologicalOrder(const DependencyGraph& g) {
  const int n = g.num_nodes();
  std::vector<int> indegree(n, 0);
  for (const auto& [from, to] : g.edges()) ++indegree[to];
  std::vector<int> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) order.push_back(i);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    const auto [begin, end] = g.Successors(order[head]);
    for (const int* it = begin; it != end; ++it) {
      if (--indegree[*it] == 0) order.push_back(*it);
    }
  }
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

namespace {

bool Routable(const RouteContext& ctx, const RouterId& src, const RouterId& dst) {
  const std::optional<RouteState> base = MakeRouteState(ctx, src, dst);
  if (!base) return false;
  return TracePath(ctx, *base, [](const VnOptions& o) { return o.first; })
      .has_value();
}

}  // namespace

ReachabilityReport Reachability(const Topology& topo, const SelectionTable& tables,
                                const FaultScenario& scenario) {
  ReachabilityReport r;
  r.scenario = scenario;
  const RouteContext ctx{&topo, &tables, &scenario, RuleSet::kFull};
  for (int s : topo.Endpoints()) {
    for (int d : topo.Endpoints()) {
      if (s == d) continue;
      ++r.total_pairs;
      if (Routable(ctx, topo.At(s), topo.At(d))) ++r.reachable_pairs;
    }
  }
  r.ratio = r.total_pairs == 0
                ? 1.0
                : static_cast<double>(r.reachable_pairs) / static_cast<double>(r.total_pairs);
  return r;
}

double WeightedReachability(const Topology& topo, const SelectionTable& tables,
                            const FaultScenario& scenario,
                            const TrafficProfile& profile) {
  const RouteContext ctx{&topo, &tables, &scenario, RuleSet::kFull};
  double total = 0.0;
  double reached = 0.0;
  for (int s : topo.Endpoints()) {
    for (int d : topo.Endpoints()) {
      if (s == d) continue;
      const double w = profile.send.at(s) * profile.recv.at(d);
      if (w == 0.0) continue;
      total += w;
      if (Routable(ctx, topo.At(s), topo.At(d))) reached += w;
    }
  }
  return total == 0.0 ? 1.0 : reached / total;
}

namespace {

// Reachability of a pair depends only on the fault masks of the source and
// destination chiplets, so the sweep counts reachable pairs once per
// (source group, source mask, destination group, destination mask) and sums
// those counts per global mask. Group g < chiplets is a chiplet; group
// `chiplets` holds interposer endpoints, whose mask is always 0.
class PairCounts {
 public:
  PairCounts(const Topology& topo, const SelectionTable& tables)
      : groups_(topo.num_chiplets() + 1) {
    for (int c = 0; c < topo.num_chiplets(); ++c) {
      mask_count_.push_back(1 << topo.VlCount(c));
    }
    mask_count_.push_back(1);
    stride_ = 1;
    for (int m : mask_count_) stride_ = std::max(stride_, m);
    counts_.assign(static_cast<std::size_t>(groups_) * groups_ * stride_ * stride_, 0);

    std::vector<std::vector<int>> members(groups_);
    for (int e : topo.Endpoints()) {
      const int c = topo.At(e).chiplet;
      members[c == kInterposer ? groups_ - 1 : c].push_back(e);
    }
    const int nvl = static_cast<int>(topo.vls().size());
    for (int ga = 0; ga < groups_; ++ga) {
      for (int gb = 0; gb < groups_; ++gb) {
        for (int ma = 0; ma < mask_count_[ga]; ++ma) {
          for (int mb = 0; mb < mask_count_[gb]; ++mb) {
            if (ga == gb && ma != mb) continue;
            FaultScenario sc(nvl);
            Apply(topo, sc, ga, ma);
            Apply(topo, sc, gb, mb);
            const RouteContext ctx{&topo, &tables, &sc, RuleSet::kFull};
            int count = 0;
            for (int s : members[ga]) {
              for (int d : members[gb]) {
                if (s != d && Routable(ctx, topo.At(s), topo.At(d))) ++count;
              }
            }
            At(ga, ma, gb, mb) = count;
          }
        }
      }
    }
  }

  int groups() const { return groups_; }
  int Get(int ga, int ma, int gb, int mb) const {
    return counts_[Offset(ga, ma, gb, mb)];
  }

 private:
  void Apply(const Topology& topo, FaultScenario& sc, int group, int mask) const {
    if (group >= topo.num_chiplets()) return;
    const auto ids = topo.ChipletVls(group);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (mask & (1 << i)) sc.SetFaulty(ids[i], true);
    }
  }
  std::size_t Offset(int ga, int ma, int gb, int mb) const {
    return ((static_cast<std::size_t>(ga) * groups_ + gb) * stride_ + ma) * stride_ + mb;
  }
  int& At(int ga, int ma, int gb, int mb) { return counts_[Offset(ga, ma, gb, mb)]; }

  int groups_;
  int stride_ = 1;
  std::vector<int> mask_count_;
  std::vector<int> counts_;
};

}  // namespace

std::vector<SweepRow> SweepScenarios(const Topology& topo, const SelectionTable& tables,
                                     int max_faults) {
  const int nvl = static_cast<int>(topo.vls().size());
  if (nvl > 63) throw std::invalid_argument("sweep supports at most 63 links");
  max_faults = std::min(max_faults, nvl);
  const PairCounts counts(topo, tables);
  const int chiplets = topo.num_chiplets();
  const int groups = counts.groups();

  const long long endpoints = static_cast<long long>(topo.Endpoints().size());
  const long long total_pairs = endpoints * (endpoints - 1);

  // Local mask of chiplet c, gathered from the global mask.
  std::vector<std::vector<int>> ids(chiplets);
  for (int c = 0; c < chiplets; ++c) {
    const auto s = topo.ChipletVls(c);
    ids[c].assign(s.begin(), s.end());
  }
  const auto local_mask = [&](std::uint64_t global, int c) {
    int m = 0;
    for (std::size_t i = 0; i < ids[c].size(); ++i) {
      if (global >> ids[c][i] & 1) m |= 1 << i;
    }
    return m;
  };

  std::vector<SweepRow> rows;
  std::vector<int> masks(groups, 0);
  for (int k = 1; k <= max_faults; ++k) {
    SweepRow row;
    row.faults = k;
    row.fault_rate = static_cast<double>(k) / (2.0 * nvl);
    row.worst = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    // Gosper's hack over all k-subsets of nvl bits.
    std::uint64_t m = (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << nvl;
    while (m < limit) {
      bool connected = true;
      for (int c = 0; c < chiplets && connected; ++c) {
        masks[c] = local_mask(m, c);
        connected = masks[c] != (1 << ids[c].size()) - 1;
      }
      if (connected) {
        masks[groups - 1] = 0;
        long long reached = 0;
        for (int ga = 0; ga < groups; ++ga) {
          for (int gb = 0; gb < groups; ++gb) {
            reached += counts.Get(ga, masks[ga], gb, masks[gb]);
          }
        }
        const double ratio =
            total_pairs == 0 ? 1.0 : static_cast<double>(reached) / total_pairs;
        sum += ratio;
        row.worst = std::min(row.worst, ratio);
        ++row.masks;
      }
      const std::uint64_t low = m & (~m + 1);
      const std::uint64_t ripple = m + low;
      m = (((ripple ^ m) >> 2) / low) | ripple;
    }
    if (row.masks == 0) row.worst = 0.0;
    row.avg = row.masks == 0 ? 0.0 : sum / static_cast<double>(row.masks);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace chipnet
