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

#include "chipnet/routing.h"

#include <stdexcept>
#include <string>

namespace chipnet {

std::string_view VnName(Vn vn) { return vn == Vn::k0 ? "VN0" : "VN1"; }

std::string_view RuleSetName(RuleSet r) {
  switch (r) {
    case RuleSet::kFull:
      return "none";
    case RuleSet::kNoRule1:
      return "rule1";
    case RuleSet::kNoRule2:
      return "rule2";
    case RuleSet::kNoRule3:
      return "rule3";
    case RuleSet::kSingleVn:
      return "single-vn";
  }
  return "?";
}

std::optional<RuleSet> ParseRuleSet(std::string_view name) {
  for (RuleSet r : {RuleSet::kFull, RuleSet::kNoRule1, RuleSet::kNoRule2,
                    RuleSet::kNoRule3, RuleSet::kSingleVn}) {
    if (RuleSetName(r) == name) return r;
  }
  return std::nullopt;
}

std::string_view PhaseName(Phase p) {
  switch (p) {
    case Phase::kSourceChiplet:
      return "source-chiplet";
    case Phase::kInterposer:
      return "interposer";
    case Phase::kDestChiplet:
      return "dest-chiplet";
    case Phase::kIntraOnly:
      return "intra";
  }
  return "?";
}

bool AllowedTurn(Vn vn, Port in, Port out) {
  if (vn == Vn::k0 && in == Port::kUp && IsHorizontal(out)) return false;
  if (vn == Vn::k1 && IsHorizontal(in) && out == Port::kDown) return false;
  return true;
}

bool LegalHop(Vn held, Vn next, Port in, Port out) {
  if (held == Vn::k1 && next == Vn::k0) return false;
  if (held != next) return true;
  return AllowedTurn(held, in, out);
}

namespace {

constexpr VnOptions kBoth{Vn::k0, Vn::k1};

VnOptions Only(Vn vn) { return VnOptions{vn, std::nullopt}; }

}  // namespace

VnOptions SourceVnOptions(const Topology& topo, const RouteState& state,
                          RuleSet rules) {
  if (rules == RuleSet::kSingleVn) return Only(Vn::k0);
  const RouterId& src = state.src;
  const bool inter_chiplet =
      !src.on_interposer() && (state.dst.chiplet != src.chiplet);
  if (!inter_chiplet) return kBoth;
  if (rules == RuleSet::kNoRule1 || rules == RuleSet::kNoRule3) return kBoth;
  // A boundary router may only start in VN1 when it goes straight Down:
  // anything else would take a Horizontal -> Down turn in VN1.
  const std::optional<VerticalLink> own = topo.VlUnder(src);
  if (own && (state.first_vl < 0 || state.first_vl == own->id)) return kBoth;
  return Only(Vn::k0);
}

VnOptions TransitionVnOptions(Vn current, VnEvent event, RuleSet rules) {
  if (rules == RuleSet::kSingleVn) return Only(Vn::k0);
  switch (event) {
    case VnEvent::kTransit:
      return Only(current);
    case VnEvent::kGoingToInterposer:
      if (current == Vn::k0) return kBoth;
      return Only(rules == RuleSet::kNoRule1 ? Vn::k0 : Vn::k1);
    case VnEvent::kComingFromInterposer:
      return Only(rules == RuleSet::kNoRule2 ? current : Vn::k1);
  }
  return Only(current);
}

namespace {

Vn Resolve(const VnOptions& options, bool& bit) {
  if (options.size() == 1) return options.first;
  const Vn picked = bit ? options[1] : options[0];
  bit = !bit;
  return picked;
}

}  // namespace

Vn VnTransition(Vn current, VnEvent event, RoundRobinState& rr, RuleSet rules) {
  return Resolve(TransitionVnOptions(current, event, rules), rr.down);
}

Vn VnAssignAtSource(const Topology& topo, const RouteState& state,
                    RoundRobinState& rr, RuleSet rules) {
  return Resolve(SourceVnOptions(topo, state, rules), rr.injection);
}

std::optional<RouteState> MakeRouteState(const RouteContext& ctx,
                                         const RouterId& src,
                                         const RouterId& dst) {
  if (src == dst) throw std::invalid_argument("packet source equals destination");
  const Topology& topo = *ctx.topo;
  RouteState s;
  s.src = src;
  s.dst = dst;
  if (src.chiplet == dst.chiplet) {
    s.phase = Phase::kIntraOnly;
    return s;
  }
  if (!dst.on_interposer() && !ctx.scenario->ChipletConnected(topo, dst.chiplet)) {
    return std::nullopt;
  }
  if (src.on_interposer()) {
    s.phase = Phase::kInterposer;
    return s;
  }
  s.first_vl = ctx.tables->SelectVl(topo, *ctx.scenario, Role::kSource, src);
  if (s.first_vl < 0) return std::nullopt;
  s.phase = Phase::kSourceChiplet;
  return s;
}

Port XyStep(const RouterId& at, const RouterId& target) {
  if (target.x > at.x) return Port::kEast;
  if (target.x < at.x) return Port::kWest;
  if (target.y > at.y) return Port::kSouth;
  if (target.y < at.y) return Port::kNorth;
  return Port::kLocal;
}

RouteOptions ComputeRouteOptions(const RouteContext& ctx, const RouteState& state,
                                 const RouterId& at, Port in) {
  const Topology& topo = *ctx.topo;
  RouteOptions r;
  r.next = state;
  const VnEvent arrival =
      in == Port::kUp ? VnEvent::kComingFromInterposer : VnEvent::kTransit;

  if (at == state.dst) {
    r.out = Port::kLocal;
    r.vns = TransitionVnOptions(state.vn, arrival, ctx.rules);
    return r;
  }

  switch (state.phase) {
    case Phase::kIntraOnly:
      r.out = XyStep(at, state.dst);
      r.vns = TransitionVnOptions(state.vn, VnEvent::kTransit, ctx.rules);
      return r;

    case Phase::kSourceChiplet: {
      if (state.first_vl < 0 || ctx.scenario->IsFaulty(state.first_vl)) {
        r.unroutable = true;
        return r;
      }
      const RouterId target = topo.vl(state.first_vl).chiplet_router;
      if (at == target) {
        r.out = Port::kDown;
        // The source router already made its one VN decision at injection.
        const VnEvent event = in == Port::kLocal ? VnEvent::kTransit
                                                 : VnEvent::kGoingToInterposer;
        r.vns = TransitionVnOptions(state.vn, event, ctx.rules);
        r.next.phase = Phase::kInterposer;
      } else {
        r.out = XyStep(at, target);
        r.vns = TransitionVnOptions(state.vn, VnEvent::kTransit, ctx.rules);
      }
      return r;
    }

    case Phase::kInterposer: {
      r.vns = TransitionVnOptions(state.vn, VnEvent::kTransit, ctx.rules);
      if (state.dst.on_interposer()) {
        r.out = XyStep(at, state.dst);
        return r;
      }
      int second = state.second_vl;
      if (second < 0) {
        second = ctx.tables->SelectVl(topo, *ctx.scenario, Role::kDest, state.dst);
        if (second < 0) {
          r.unroutable = true;
          return r;
        }
        r.next.second_vl = second;
      }
      if (ctx.scenario->IsFaulty(second)) {
        r.unroutable = true;
        return r;
      }
      const RouterId target = topo.vl(second).interposer_router;
      if (at == target) {
        r.out = Port::kUp;
        r.next.phase = Phase::kDestChiplet;
      } else {
        r.out = XyStep(at, target);
      }
      return r;
    }

    case Phase::kDestChiplet:
      r.out = XyStep(at, state.dst);
      r.vns = TransitionVnOptions(state.vn, arrival, ctx.rules);
      return r;
  }
  r.unroutable = true;
  return r;
}

RouteDecision ComputeRoute(const RouteContext& ctx, const RouteState& state,
                           const RouterId& at, Port in, RoundRobinState& rr) {
  RouteOptions opt = ComputeRouteOptions(ctx, state, at, in);
  RouteDecision d;
  d.unroutable = opt.unroutable;
  if (opt.unroutable) return d;
  d.out = opt.out;
  d.vn = Resolve(opt.vns, rr.down);
  d.next = opt.next;
  d.next.vn = d.vn;
  return d;
}

int HopBound(const RouteState& state, const Topology& topo) {
  const RouterId& src = state.src;
  const RouterId& dst = state.dst;
  if (src == dst) return 0;
  if (src.chiplet == dst.chiplet) return HopDistance(src, dst);
  const auto need = [](int vl) {
    if (vl < 0) throw std::invalid_argument("hop bound needs both intermediates");
    return vl;
  };
  int hops = 0;
  RouterId entry = src;  // interposer router where the interposer leg starts
  if (!src.on_interposer()) {
    const VerticalLink& first = topo.vl(need(state.first_vl));
    hops += HopDistance(src, first.chiplet_router) + 1;
    entry = first.interposer_router;
  }
  if (dst.on_interposer()) return hops + HopDistance(entry, dst);
  const VerticalLink& second = topo.vl(need(state.second_vl));
  hops += HopDistance(entry, second.interposer_router) + 1;
  return hops + HopDistance(second.chiplet_router, dst);
}

RouterId Step(const Topology& topo, const RouterId& at, Port p) {
  const int n = topo.Neighbor(topo.Index(at), p);
  if (n < 0) {
    throw std::logic_error("no " + std::string(PortName(p)) + " neighbor at " +
                           ToString(at));
  }
  return topo.At(n);
}

}  // namespace chipnet
