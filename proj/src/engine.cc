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

#include "chipnet/engine.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <deque>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "chipnet/random.h"

namespace chipnet {

double Metrics::reachability() const {
  const std::int64_t total = delivered + unreachable;
  return total == 0 ? 1.0 : static_cast<double>(delivered) / static_cast<double>(total);
}

double Metrics::intra_fraction() const {
  return delivered == 0 ? 0.0
                        : static_cast<double>(intra_delivered) / static_cast<double>(delivered);
}

double Metrics::vn0_flit_share() const {
  const std::int64_t total = vn0_flits + vn1_flits;
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(vn0_flits) / static_cast<double>(total);
}

std::string MetricsCsvHeader() {
  return "rate,avg_latency,delivered,vn0_util,vn1_util,generated,unreachable,"
         "max_latency,avg_hops,intra_fraction,cycles,saturated";
}

std::string MetricsCsvRow(const Metrics& m) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << m.rate << ',';
  out.precision(4);
  out << m.avg_latency << ',' << m.delivered << ',' << m.vn0_util << ','
      << m.vn1_util << ',' << m.generated << ',' << m.unreachable << ','
      << m.max_latency << ',' << m.avg_hops << ',' << m.intra_fraction() << ','
      << m.cycles << ',' << (m.saturated ? 1 : 0);
  return out.str();
}

std::int64_t ZeroLoadLatency(int hops, const EngineConfig& config) {
  return 1 + 2 * (static_cast<std::int64_t>(hops) + 1) + (config.packet_flits - 1);
}

namespace {

constexpr std::uint8_t kHeadFlit = 1;
constexpr std::uint8_t kTailFlit = 2;
constexpr int kHistogramBuckets = 64;
constexpr int kWatchdogPeriod = 1024;
constexpr int kMaxVcsPerVn = 8;

struct Flit {
  std::int32_t packet = -1;
  std::uint8_t kind = 0;
  std::int64_t ready = 0;
};

struct Packet {
  RouteState route;
  int src = 0;
  int dst = 0;
  std::int64_t generated = 0;
  int hops = 0;
  bool measured = false;
  bool intra = false;
};

enum class VcState : std::uint8_t { kIdle, kWaitVa, kActive, kDrop };

struct InputVc {
  int head = 0;
  int count = 0;
  VcState state = VcState::kIdle;
  Port out = Port::kLocal;
  Vn vn = Vn::k0;
  int out_vc = -1;
  std::int64_t sa_ready = 0;
  std::int64_t last_move = 0;
};

struct OutputVc {
  int credits = 0;
  int owner = -1;
};

struct Source {
  std::deque<int> queue;
  int current = -1;
  int sent = 0;
  int vc = -1;
};

}  // namespace

class Simulator::Impl {
 public:
  Impl(const Topology& topo, const SelectionTable& tables, const FaultScenario& scenario,
       const TrafficSpec& traffic, const EngineConfig& config)
      : topo_(topo),
        tables_(tables),
        scenario_(scenario),
        traffic_(traffic),
        config_(config),
        sampler_(topo, traffic),
        rng_(traffic.seed),
        n_(topo.num_routers()),
        vcs_(2 * config.vcs_per_vn) {
    if (config.vcs_per_vn < 1 || config.vcs_per_vn > kMaxVcsPerVn ||
        config.buffer_depth < 1 || config.packet_flits < 1) {
      throw EngineError("need 1-8 VCs per VN and positive buffer depth and packet size");
    }
    CheckScenario(scenario_);
    ctx_ = RouteContext{&topo_, &tables_, &scenario_, config_.rules};
    const std::size_t slots = static_cast<std::size_t>(n_) * kNumPorts * vcs_;
    in_.resize(slots);
    out_.resize(slots);
    flits_.resize(slots * config_.buffer_depth);
    neighbor_.assign(static_cast<std::size_t>(n_) * kNumPorts, -1);
    for (int r = 0; r < n_; ++r) {
      for (int p = 0; p < kNumPorts; ++p) {
        if (p == static_cast<int>(Port::kLocal)) continue;
        neighbor_[r * kNumPorts + p] = topo_.Neighbor(r, static_cast<Port>(p));
      }
    }
    for (std::size_t i = 0; i < slots; ++i) out_[i].credits = config_.buffer_depth;
    vl_at_.assign(n_, -1);
    for (const VerticalLink& vl : topo_.vls()) {
      vl_at_[topo_.Index(vl.chiplet_router)] = vl.id;
      vl_at_[topo_.Index(vl.interposer_router)] = vl.id;
    }
    rr_.resize(n_);
    buffered_.assign(n_, 0);
    in_ptr_.assign(static_cast<std::size_t>(n_) * kNumPorts, 0);
    out_ptr_.assign(static_cast<std::size_t>(n_) * kNumPorts, 0);
    va_ptr_.assign(slots, 0);
    sources_.resize(n_);
    vl_traversals_.assign(topo_.vls().size(), 0);
    histogram_.assign(kHistogramBuckets, 0);
    const auto e = topo_.Endpoints();
    endpoints_.assign(e.begin(), e.end());
    if (traffic_.kind == TrafficKind::kTrace) {
      for (const TraceEntry& t : traffic_.trace) {
        if (t.src < 0 || t.src >= n_ || t.dst < 0 || t.dst >= n_ || t.src == t.dst ||
            !topo_.HasLocal(t.src) || !topo_.HasLocal(t.dst)) {
          throw EngineError("invalid trace entry " + std::to_string(t.src) + "->" +
                            std::to_string(t.dst));
        }
      }
    }
  }

  std::int64_t cycle() const { return cycle_; }

  void InjectFault(const FaultScenario& scenario, std::int64_t at_cycle) {
    CheckScenario(scenario);
    pending_fault_ = scenario;
    fault_at_ = at_cycle;
    has_pending_fault_ = true;
    if (at_cycle <= cycle_) ApplyPendingFault();
  }

  bool Enqueue(int src, int dst) { return CreatePacket(src, dst, cycle_, true); }

  bool Idle() const {
    if (total_buffered_ != 0) return false;
    for (int s : endpoints_) {
      if (sources_[s].current >= 0 || !sources_[s].queue.empty()) return false;
    }
    if (traffic_.kind == TrafficKind::kTrace && trace_next_ < traffic_.trace.size()) {
      return false;
    }
    return true;
  }

  std::int64_t flits_in_network() const { return total_buffered_; }

  void Step(bool generate) {
    const std::int64_t t = cycle_;
    if (has_pending_fault_ && t >= fault_at_) ApplyPendingFault();
    for (int ov : credits_next_) ++out_[ov].credits;
    credits_next_.clear();

    for (int r = 0; r < n_; ++r) {
      if (buffered_[r] != 0) SwitchStage(r, t);
    }
    for (int r = 0; r < n_; ++r) {
      if (buffered_[r] != 0) RouteStage(r, t);
    }
    SourceStage(t, generate);

    if (InMeasurement(t)) {
      occupancy_[0] += net_buffered_[0];
      occupancy_[1] += net_buffered_[1];
    }
    if (config_.audit) Audit();
    if (t % kWatchdogPeriod == 0) Watchdog(t);
    ++cycle_;
  }

  Metrics Run() {
    if (traffic_.kind == TrafficKind::kTrace) {
      const std::int64_t last = traffic_.trace.empty() ? 0 : traffic_.trace.back().cycle;
      const std::int64_t cap = last + std::max<std::int64_t>(traffic_.drain_cycles, 1);
      while (!Idle() && cycle_ <= cap && !saturated_) Step(true);
      drained_ = Idle();
      return metrics();
    }
    const std::int64_t end = traffic_.warmup_cycles + traffic_.measure_cycles;
    while (cycle_ < end && !saturated_) Step(true);
    const std::int64_t cap = end + traffic_.drain_cycles;
    while (!saturated_ && !Idle() && cycle_ < cap) Step(false);
    drained_ = Idle();
    if (!drained_) saturated_ = true;
    if (delivered_ > 0) {
      const double avg = static_cast<double>(latency_sum_) / static_cast<double>(delivered_);
      const double hops = static_cast<double>(hop_sum_) / static_cast<double>(delivered_);
      const double zero_load = 2.0 * hops + 2.0 + config_.packet_flits;
      if (avg > config_.saturation_latency_factor * zero_load) saturated_ = true;
    }
    return metrics();
  }

  Metrics metrics() const {
    Metrics m;
    m.rate = traffic_.rate;
    m.generated = generated_;
    m.delivered = delivered_;
    m.unreachable = unreachable_;
    m.avg_latency = delivered_ == 0 ? 0.0
                                    : static_cast<double>(latency_sum_) /
                                          static_cast<double>(delivered_);
    m.max_latency = max_latency_;
    m.latency_histogram = histogram_;
    m.avg_hops = delivered_ == 0 ? 0.0
                                 : static_cast<double>(hop_sum_) /
                                       static_cast<double>(delivered_);
    m.intra_delivered = intra_delivered_;
    m.vn0_occupancy = occupancy_[0];
    m.vn1_occupancy = occupancy_[1];
    const std::int64_t occ = occupancy_[0] + occupancy_[1];
    if (occ > 0) {
      m.vn0_util = 100.0 * static_cast<double>(occupancy_[0]) / static_cast<double>(occ);
      m.vn1_util = 100.0 * static_cast<double>(occupancy_[1]) / static_cast<double>(occ);
    }
    m.vn0_flits = net_writes_[0];
    m.vn1_flits = net_writes_[1];
    m.vl_traversals = vl_traversals_;
    m.cycles = cycle_;
    m.saturated = saturated_;
    m.drained = drained_;
    m.packets_delivered = packets_delivered_;
    m.packets_dropped = packets_dropped_;
    m.flits_injected = flits_injected_;
    m.flits_ejected = flits_ejected_;
    m.flits_dropped = flits_dropped_;
    m.flits_in_flight = total_buffered_;
    m.hop_mismatches = hop_mismatches_;
    m.illegal_hops = illegal_hops_;
    m.vn_decreases = vn_decreases_;
    m.audit_violations = audit_violations_;
    return m;
  }

 private:
  int InIndex(int r, Port p, int v) const {
    return (r * kNumPorts + static_cast<int>(p)) * vcs_ + v;
  }
  int InIndex(int r, int p, int v) const { return (r * kNumPorts + p) * vcs_ + v; }
  Vn ClassOf(int v) const { return v < config_.vcs_per_vn ? Vn::k0 : Vn::k1; }
  bool InMeasurement(std::int64_t t) const {
    if (traffic_.kind == TrafficKind::kTrace) return true;
    return t >= traffic_.warmup_cycles &&
           t < traffic_.warmup_cycles + traffic_.measure_cycles;
  }

  void CheckScenario(const FaultScenario& s) const {
    if (s.num_vls() != static_cast<int>(topo_.vls().size())) {
      throw EngineError("fault scenario does not match the topology");
    }
    if (!config_.allow_disconnect && !s.Connected(topo_)) {
      throw EngineError("fault scenario " + ToString(s) +
                        " disconnects a chiplet (allow_disconnect is off)");
    }
  }

  void ApplyPendingFault() {
    scenario_ = pending_fault_;
    has_pending_fault_ = false;
  }

  Flit& Front(int iv) {
    return flits_[static_cast<std::size_t>(iv) * config_.buffer_depth + in_[iv].head];
  }

  void Push(int iv, int router, Port port, const Flit& f, std::int64_t t) {
    InputVc& b = in_[iv];
    if (b.count >= config_.buffer_depth) {
      ++audit_violations_;
      throw EngineError("buffer overflow at " + ToString(topo_.At(router)));
    }
    const int slot = (b.head + b.count) % config_.buffer_depth;
    flits_[static_cast<std::size_t>(iv) * config_.buffer_depth + slot] = f;
    if (b.count == 0) b.last_move = t;
    ++b.count;
    ++buffered_[router];
    ++total_buffered_;
    if (port != Port::kLocal) {
      const int cls = static_cast<int>(ClassOf(iv % vcs_));
      ++net_buffered_[cls];
      if (InMeasurement(t)) ++net_writes_[cls];
    }
  }

  // Removes the front flit of `iv` at router `r`, returning its credit to
  // the upstream router.
  Flit Pop(int iv, int r, int p, std::int64_t t) {
    InputVc& b = in_[iv];
    const Flit f = Front(iv);
    b.head = (b.head + 1) % config_.buffer_depth;
    --b.count;
    b.last_move = t;
    --buffered_[r];
    --total_buffered_;
    if (p != static_cast<int>(Port::kLocal)) {
      --net_buffered_[static_cast<int>(ClassOf(iv % vcs_))];
      const int up = neighbor_[r * kNumPorts + static_cast<int>(Opposite(static_cast<Port>(p)))];
      credits_next_.push_back(InIndex(up, p, iv % vcs_));
    }
    return f;
  }

  void SwitchStage(int r, std::int64_t t) {
    // Input arbitration: one ready VC per input port.
    int want[kNumPorts];
    for (int p = 0; p < kNumPorts; ++p) {
      want[p] = -1;
      const int base = InIndex(r, p, 0);
      int& ptr = in_ptr_[r * kNumPorts + p];
      for (int k = 0; k < vcs_; ++k) {
        const int v = (ptr + k) % vcs_;
        InputVc& b = in_[base + v];
        if (b.count == 0 || Front(base + v).ready > t) continue;
        if (b.state == VcState::kDrop) {
          DropFlit(base + v, r, p, t);
          continue;
        }
        if (b.state != VcState::kActive || b.sa_ready > t) continue;
        if (b.out != Port::kLocal && out_[b.out_vc].credits <= 0) continue;
        if (want[p] < 0) want[p] = v;
      }
    }
    // Output arbitration: one input port per output port.
    for (int o = 0; o < kNumPorts; ++o) {
      int& ptr = out_ptr_[r * kNumPorts + o];
      for (int k = 0; k < kNumPorts; ++k) {
        const int p = (ptr + k) % kNumPorts;
        if (want[p] < 0) continue;
        const int iv = InIndex(r, p, want[p]);
        if (static_cast<int>(in_[iv].out) != o) continue;
        Traverse(iv, r, p, t);
        in_ptr_[r * kNumPorts + p] = (want[p] + 1) % vcs_;
        ptr = (p + 1) % kNumPorts;
        want[p] = -1;
        break;
      }
    }
  }

  void DropFlit(int iv, int r, int p, std::int64_t t) {
    const Flit f = Pop(iv, r, p, t);
    ++flits_dropped_;
    if (f.kind & kTailFlit) {
      in_[iv].state = VcState::kIdle;
      ++packets_dropped_;
      const Packet& pk = packets_[f.packet];
      if (pk.measured) ++unreachable_;
    }
  }

  void Traverse(int iv, int r, int p, std::int64_t t) {
    InputVc& b = in_[iv];
    const Flit f = Pop(iv, r, p, t);
    const bool tail = (f.kind & kTailFlit) != 0;
    if (b.out == Port::kLocal) {
      ++flits_ejected_;
      if (tail) Deliver(f.packet, t + 1);
    } else {
      OutputVc& o = out_[b.out_vc];
      if (o.credits <= 0) ++audit_violations_;
      --o.credits;
      const int down = neighbor_[r * kNumPorts + static_cast<int>(b.out)];
      Flit moved = f;
      moved.ready = t + 1;
      Push(InIndex(down, b.out, b.out_vc % vcs_), down, b.out, moved, t);
    }
    if (tail) {
      out_[b.out_vc].owner = -1;
      b.state = VcState::kIdle;
      b.out_vc = -1;
    }
  }

  void Deliver(int id, std::int64_t done) {
    const Packet& pk = packets_[id];
    ++packets_delivered_;
    if (pk.hops != HopBound(pk.route, topo_)) ++hop_mismatches_;
    if (!pk.measured) return;
    const std::int64_t latency = done - pk.generated;
    ++delivered_;
    latency_sum_ += latency;
    hop_sum_ += pk.hops;
    max_latency_ = std::max(max_latency_, latency);
    ++histogram_[std::min<std::int64_t>(latency / 8, kHistogramBuckets - 1)];
    if (pk.intra) ++intra_delivered_;
  }

  void RouteStage(int r, std::int64_t t) {
    const int total = kNumPorts * vcs_;
    const int base = InIndex(r, 0, 0);
    int waiting[kNumPorts * 2 * kMaxVcsPerVn];
    int num_waiting = 0;
    for (int local = 0; local < total; ++local) {
      const int iv = base + local;
      InputVc& b = in_[iv];
      if (b.count == 0) continue;
      if (b.state == VcState::kIdle) {
        const Flit& f = Front(iv);
        if (!(f.kind & kHeadFlit) || f.ready > t) continue;
        ComputeHop(iv, r, local / vcs_, f.packet);
      }
      if (b.state == VcState::kWaitVa) waiting[num_waiting++] = local;
    }
    // Each free output VC goes to the next waiting input after the one it
    // served last, so no requester starves.
    for (int i = 0; i < num_waiting; ++i) {
      InputVc& b = in_[base + waiting[i]];
      if (b.state != VcState::kWaitVa) continue;
      const int first = static_cast<int>(b.vn) * config_.vcs_per_vn;
      for (int v = first; v < first + config_.vcs_per_vn; ++v) {
        const int ov = InIndex(r, b.out, v);
        if (out_[ov].owner >= 0) continue;
        int best = -1;
        int best_rank = total;
        for (int j = 0; j < num_waiting; ++j) {
          const InputVc& c = in_[base + waiting[j]];
          if (c.state != VcState::kWaitVa || c.out != b.out || c.vn != b.vn) continue;
          const int rank = (waiting[j] - va_ptr_[ov] + total) % total;
          if (rank < best_rank) {
            best_rank = rank;
            best = waiting[j];
          }
        }
        InputVc& w = in_[base + best];
        out_[ov].owner = base + best;
        w.out_vc = ov;
        w.state = VcState::kActive;
        w.sa_ready = t + 1;
        va_ptr_[ov] = (best + 1) % total;
        if (best == waiting[i]) break;
      }
    }
  }

  void ComputeHop(int iv, int r, int p, int id) {
    InputVc& b = in_[iv];
    Packet& pk = packets_[id];
    const Vn held = ClassOf(iv % vcs_);
    if (held != pk.route.vn) ++audit_violations_;
    const Port in = static_cast<Port>(p);
    const RouteOptions opt = ComputeRouteOptions(ctx_, pk.route, topo_.At(r), in);
    if (opt.unroutable) {
      b.state = VcState::kDrop;
      return;
    }
    Vn next = opt.vns.first;
    if (opt.vns.size() == 2) {
      bool& bit = rr_[r].down;
      next = bit ? opt.vns[1] : opt.vns[0];
      bit = !bit;
    }
    if (!LegalHop(held, next, in, opt.out)) ++illegal_hops_;
    if (held == Vn::k1 && next == Vn::k0) ++vn_decreases_;
    pk.route = opt.next;
    pk.route.vn = next;
    if (opt.out == Port::kUp || opt.out == Port::kDown) ++vl_traversals_[vl_at_[r]];
    if (opt.out != Port::kLocal) ++pk.hops;
    b.out = opt.out;
    b.vn = next;
    b.state = VcState::kWaitVa;
  }

  bool CreatePacket(int src, int dst, std::int64_t when, bool measured) {
    if (src == dst) throw EngineError("packet source equals destination");
    if (measured) ++generated_;
    const std::optional<RouteState> route =
        MakeRouteState(ctx_, topo_.At(src), topo_.At(dst));
    if (!route) {
      if (measured) ++unreachable_;
      return false;
    }
    Packet pk;
    pk.route = *route;
    pk.src = src;
    pk.dst = dst;
    pk.generated = when;
    pk.measured = measured;
    pk.intra = topo_.At(src).chiplet == topo_.At(dst).chiplet;
    packets_.push_back(pk);
    Source& s = sources_[src];
    s.queue.push_back(static_cast<int>(packets_.size()) - 1);
    if (s.queue.size() > config_.max_source_queue) saturated_ = true;
    return true;
  }

  void SourceStage(std::int64_t t, bool generate) {
    if (traffic_.kind == TrafficKind::kTrace) {
      const auto& trace = traffic_.trace;
      while (trace_next_ < trace.size() && trace[trace_next_].cycle <= t) {
        CreatePacket(trace[trace_next_].src, trace[trace_next_].dst,
                     trace[trace_next_].cycle, true);
        ++trace_next_;
      }
    } else if (generate && traffic_.rate > 0.0) {
      const bool measured = InMeasurement(t);
      for (int s : endpoints_) {
        if (!sampler_.Generate(rng_)) continue;
        CreatePacket(s, sampler_.Sample(s, rng_), t, measured);
      }
    }
    for (int s : endpoints_) Inject(s, t);
  }

  void Inject(int s, std::int64_t t) {
    Source& src = sources_[s];
    if (src.current < 0) {
      if (src.queue.empty()) return;
      Packet& pk = packets_[src.queue.front()];
      const VnOptions opts = SourceVnOptions(topo_, pk.route, config_.rules);
      bool& bit = rr_[s].injection;
      const Vn vn = opts.size() == 2 ? (bit ? opts[1] : opts[0]) : opts.first;
      const int first = static_cast<int>(vn) * config_.vcs_per_vn;
      int chosen = -1;
      for (int v = first; v < first + config_.vcs_per_vn; ++v) {
        if (in_[InIndex(s, Port::kLocal, v)].count < config_.buffer_depth) {
          chosen = InIndex(s, Port::kLocal, v);
          break;
        }
      }
      if (chosen < 0) return;
      if (opts.size() == 2) bit = !bit;
      pk.route.vn = vn;
      src.current = src.queue.front();
      src.queue.pop_front();
      src.sent = 0;
      src.vc = chosen;
    }
    if (in_[src.vc].count >= config_.buffer_depth) return;
    Flit f;
    f.packet = src.current;
    f.ready = t + 1;
    if (src.sent == 0) f.kind |= kHeadFlit;
    if (src.sent == config_.packet_flits - 1) f.kind |= kTailFlit;
    Push(src.vc, s, Port::kLocal, f, t);
    ++flits_injected_;
    if (++src.sent == config_.packet_flits) src.current = -1;
  }

  void Audit() {
    // Conservation: every injected flit is buffered, ejected or dropped.
    if (flits_injected_ != flits_ejected_ + flits_dropped_ + total_buffered_) {
      ++audit_violations_;
    }
    // Credits: for every network output VC, credits + credits in flight +
    // occupancy of the downstream buffer equals the buffer depth.
    std::vector<int> in_flight(out_.size(), 0);
    for (int ov : credits_next_) ++in_flight[ov];
    for (int r = 0; r < n_; ++r) {
      for (int o = 0; o < kNumPorts; ++o) {
        const int down = neighbor_[r * kNumPorts + o];
        if (down < 0) continue;
        for (int v = 0; v < vcs_; ++v) {
          const int ov = InIndex(r, o, v);
          const int occupied = in_[InIndex(down, o, v)].count;
          if (out_[ov].credits < 0 || out_[ov].credits > config_.buffer_depth ||
              out_[ov].credits + in_flight[ov] + occupied != config_.buffer_depth) {
            ++audit_violations_;
          }
        }
      }
    }
    // VN isolation: an allocated output VC has the class its packet chose.
    // Heads are also checked against their input VC class in ComputeHop.
    for (std::size_t iv = 0; iv < in_.size(); ++iv) {
      const InputVc& b = in_[iv];
      if (b.state == VcState::kActive && ClassOf(b.out_vc % vcs_) != b.vn) {
        ++audit_violations_;
      }
    }
  }

  void Watchdog(std::int64_t t) {
    for (std::size_t iv = 0; iv < in_.size(); ++iv) {
      const InputVc& b = in_[iv];
      if (b.count == 0 || t - b.last_move <= config_.watchdog_cycles) continue;
      const int r = static_cast<int>(iv / (kNumPorts * vcs_));
      const int p = static_cast<int>(iv / vcs_ % kNumPorts);
      const Packet& pk = packets_[Front(static_cast<int>(iv)).packet];
      throw EngineError(
          "watchdog: flit stalled " + std::to_string(t - b.last_move) + " cycles at " +
          ToString(topo_.At(r)) + " input " + std::string(PortName(static_cast<Port>(p))) +
          " VC " + std::to_string(iv % vcs_) + " (packet " + ToString(pk.route.src) +
          " -> " + ToString(pk.route.dst) + ", cycle " + std::to_string(t) + ")");
    }
  }

  const Topology& topo_;
  const SelectionTable& tables_;
  FaultScenario scenario_;
  TrafficSpec traffic_;
  EngineConfig config_;
  DestinationSampler sampler_;
  Rng rng_;
  RouteContext ctx_;
  int n_;
  int vcs_;

  std::vector<InputVc> in_;
  std::vector<OutputVc> out_;
  std::vector<Flit> flits_;
  std::vector<int> neighbor_;
  std::vector<int> vl_at_;
  std::vector<RoundRobinState> rr_;
  std::vector<int> buffered_;
  std::vector<int> in_ptr_;
  std::vector<int> out_ptr_;
  std::vector<int> va_ptr_;
  std::vector<int> credits_next_;
  std::vector<Source> sources_;
  std::vector<int> endpoints_;
  std::vector<Packet> packets_;
  std::size_t trace_next_ = 0;

  FaultScenario pending_fault_;
  std::int64_t fault_at_ = 0;
  bool has_pending_fault_ = false;

  std::int64_t cycle_ = 0;
  std::int64_t total_buffered_ = 0;
  std::int64_t net_buffered_[2] = {0, 0};
  std::int64_t occupancy_[2] = {0, 0};
  std::int64_t net_writes_[2] = {0, 0};
  std::int64_t generated_ = 0;
  std::int64_t delivered_ = 0;
  std::int64_t unreachable_ = 0;
  std::int64_t latency_sum_ = 0;
  std::int64_t hop_sum_ = 0;
  std::int64_t max_latency_ = 0;
  std::int64_t intra_delivered_ = 0;
  std::vector<std::int64_t> histogram_;
  std::vector<std::int64_t> vl_traversals_;
  std::int64_t packets_delivered_ = 0;
  std::int64_t packets_dropped_ = 0;
  std::int64_t flits_injected_ = 0;
  std::int64_t flits_ejected_ = 0;
  std::int64_t flits_dropped_ = 0;
  std::int64_t hop_mismatches_ = 0;
  std::int64_t illegal_hops_ = 0;
  std::int64_t vn_decreases_ = 0;
  std::int64_t audit_violations_ = 0;
  bool saturated_ = false;
  bool drained_ = false;
};

Simulator::Simulator(const Topology& topo, const SelectionTable& tables,
                     const FaultScenario& scenario, const TrafficSpec& traffic,
                     const EngineConfig& config)
    : impl_(std::make_unique<Impl>(topo, tables, scenario, traffic, config)) {}

Simulator::~Simulator() = default;

void Simulator::Step(bool generate) { impl_->Step(generate); }
std::int64_t Simulator::cycle() const { return impl_->cycle(); }
void Simulator::InjectFault(const FaultScenario& scenario, std::int64_t at_cycle) {
  impl_->InjectFault(scenario, at_cycle);
}
bool Simulator::Enqueue(int src, int dst) { return impl_->Enqueue(src, dst); }
bool Simulator::Idle() const { return impl_->Idle(); }
std::int64_t Simulator::flits_in_network() const { return impl_->flits_in_network(); }
Metrics Simulator::Run() { return impl_->Run(); }
Metrics Simulator::metrics() const { return impl_->metrics(); }

Metrics RunSimulation(const Topology& topo, const SelectionTable& tables,
                      const FaultScenario& scenario, const TrafficSpec& traffic,
                      const EngineConfig& config) {
  Simulator sim(topo, tables, scenario, traffic, config);
  return sim.Run();
}

int DefaultThreads() {
  if (const char* env = std::getenv("CHIPNET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(int count, int threads, const std::function<void(int)>& job) {
  if (threads <= 0) threads = DefaultThreads();
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<Metrics> LatencySweep(const Topology& topo, const SelectionTable& tables,
                                  const FaultScenario& scenario,
                                  const TrafficSpec& traffic,
                                  const std::vector<double>& rates,
                                  const EngineConfig& config, int threads) {
  std::vector<Metrics> out(rates.size());
  ParallelFor(static_cast<int>(rates.size()), threads, [&](int i) {
    TrafficSpec spec = traffic;
    spec.rate = rates[i];
    out[i] = RunSimulation(topo, tables, scenario, spec, config);
  });
  return out;
}

}  // namespace chipnet
