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

// Two-virtual-network chiplet routing.
//
// Every inter-chiplet route is source chiplet -> vertical link -> interposer
// -> vertical link -> destination chiplet, with XY dimension-order routing on
// each layer. Deadlock freedom comes from three constraints on virtual
// networks (VNs):
//   1. a packet may move VN0 -> VN1 but never VN1 -> VN0;
//   2. in VN0 a packet arriving over an Up link may not turn Horizontal;
//   3. in VN1 a packet arriving Horizontally may not take a Down link.
// Packets choose VNs round-robin wherever both are safe: at injection for
// intra-chiplet, interposer and boundary-router sources, and again at a
// boundary router when a packet injected elsewhere leaves for the interposer.
// A router makes at most one VN decision per packet.

#ifndef CHIPNET_ROUTING_H_
#define CHIPNET_ROUTING_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "chipnet/selection.h"
#include "chipnet/topology.h"

namespace chipnet {

enum class Vn : std::uint8_t { k0 = 0, k1 = 1 };
inline constexpr int kNumVns = 2;
std::string_view VnName(Vn vn);

// Which turn/VN constraints the routing function honors. Everything except
// kFull exists to show that each constraint is load-bearing.
enum class RuleSet : std::uint8_t {
  kFull,
  kNoRule1,   // packets may fall back VN1 -> VN0 at the Down link
  kNoRule2,   // packets keep their VN when arriving from the interposer
  kNoRule3,   // inter-chiplet packets may start in VN1 on the source chiplet
  kSingleVn,  // everything in VN0; Rules 2 and 3 ignored
};
std::string_view RuleSetName(RuleSet r);
std::optional<RuleSet> ParseRuleSet(std::string_view name);

// Same-VN turn check. False exactly for VN0 Up->Horizontal and VN1
// Horizontal->Down. `in` is the direction the packet arrived by (Local for
// injection).
bool AllowedTurn(Vn vn, Port in, Port out);

// Legality of a hop that holds a channel in `held` and requests one in
// `next`: VN may only rise, and same-VN hops must pass AllowedTurn. A
// VN0 -> VN1 hop is a class change and cannot close a cycle, so any turn is
// fine there.
bool LegalHop(Vn held, Vn next, Port in, Port out);

enum class VnEvent : std::uint8_t {
  kGoingToInterposer,
  kComingFromInterposer,
  kTransit
};

// One bit per decision point. A bit value of true means the next round-robin
// assignment yields VN1.
struct RoundRobinState {
  bool injection = false;
  bool down = false;
};

// VN reassignment at a router. Only consumes (toggles) `rr.down` when the
// round robin actually decided.
Vn VnTransition(Vn current, VnEvent event, RoundRobinState& rr,
                RuleSet rules = RuleSet::kFull);

enum class Phase : std::uint8_t {
  kSourceChiplet,
  kInterposer,
  kDestChiplet,
  kIntraOnly
};
std::string_view PhaseName(Phase p);

// Routing header carried by a packet. Intermediate links are global ids, -1
// until chosen.
struct RouteState {
  Vn vn = Vn::k0;
  RouterId src;
  RouterId dst;
  int first_vl = -1;   // on the source chiplet
  int second_vl = -1;  // on the destination chiplet
  Phase phase = Phase::kIntraOnly;
  friend bool operator==(const RouteState&, const RouteState&) = default;
};

// Candidate VNs for one decision; size 1 or 2. Round robin picks among them,
// verification explores all of them.
struct VnOptions {
  Vn first = Vn::k0;
  std::optional<Vn> second;
  int size() const { return second ? 2 : 1; }
  Vn operator[](int i) const { return i == 0 ? first : *second; }
};
// Injection-time VN candidates for a freshly built header. Round robin is
// allowed for interposer sources, intra-chiplet packets and boundary routers
// that leave through their own link; other inter-chiplet packets start in
// VN0.
VnOptions SourceVnOptions(const Topology& topo, const RouteState& state,
                          RuleSet rules = RuleSet::kFull);
VnOptions TransitionVnOptions(Vn current, VnEvent event,
                              RuleSet rules = RuleSet::kFull);

Vn VnAssignAtSource(const Topology& topo, const RouteState& state,
                    RoundRobinState& rr, RuleSet rules = RuleSet::kFull);

struct RouteContext {
  const Topology* topo = nullptr;
  const SelectionTable* tables = nullptr;
  const FaultScenario* scenario = nullptr;
  RuleSet rules = RuleSet::kFull;
};

// Builds the header for a new packet (vn left at VN0), choosing the
// source-side link from the source-role table. Returns nullopt when the pair
// is unroutable under the context's scenario (source or destination chiplet
// has no fault-free link).
std::optional<RouteState> MakeRouteState(const RouteContext& ctx,
                                         const RouterId& src,
                                         const RouterId& dst);

struct RouteOptions {
  bool unroutable = false;
  Port out = Port::kLocal;
  VnOptions vns;
  RouteState next;  // header after this hop (phase, intermediates); vn unset
};

// Route computation at `at` for a packet that arrived by `in` (Local for
// injection). Returns the output port and the admissible next VNs.
RouteOptions ComputeRouteOptions(const RouteContext& ctx, const RouteState& state,
                                 const RouterId& at, Port in);

struct RouteDecision {
  bool unroutable = false;
  Port out = Port::kLocal;
  Vn vn = Vn::k0;
  RouteState next;
};

// Route computation with round-robin resolution of VN choices; rr.down is
// toggled when consumed.
RouteDecision ComputeRoute(const RouteContext& ctx, const RouteState& state,
                           const RouterId& at, Port in, RoundRobinState& rr);

// Next hop of XY routing from `at` toward `target` on the same layer; Local
// when they coincide.
Port XyStep(const RouterId& at, const RouterId& target);

// Exact hop count of the deterministic path; both intermediates must be set
// for routes that use them.
int HopBound(const RouteState& state, const Topology& topo);

// Router reached from `at` across `p` (not Local).
RouterId Step(const Topology& topo, const RouterId& at, Port p);

struct Hop {
  RouterId at;  // router making the decision
  Port in = Port::kLocal;
  Port out = Port::kLocal;
  Vn held = Vn::k0;  // VN of the channel the packet arrived on
  Vn next = Vn::k0;  // VN of the channel it requests
};

// Walks a packet from injection to ejection, resolving every VN choice with
// `pick(options)`. Returns nullopt if unroutable. The walk is capped at
// 4 * routers hops.
template <typename Pick>
std::optional<std::vector<Hop>> TracePath(const RouteContext& ctx,
                                          RouteState state, Pick&& pick) {
  std::vector<Hop> hops;
  RouterId at = state.src;
  Port in = Port::kLocal;
  Vn held = state.vn;
  const int cap = 4 * ctx.topo->num_routers() + 8;
  for (int i = 0; i < cap; ++i) {
    RouteOptions opt = ComputeRouteOptions(ctx, state, at, in);
    if (opt.unroutable) return std::nullopt;
    const Vn next = pick(opt.vns);
    hops.push_back(Hop{at, in, opt.out, held, next});
    state = opt.next;
    state.vn = next;
    held = next;
    if (opt.out == Port::kLocal) return hops;
    at = Step(*ctx.topo, at, opt.out);
    in = opt.out;
  }
  return std::nullopt;
}

}  // namespace chipnet

#endif  // CHIPNET_ROUTING_H_
