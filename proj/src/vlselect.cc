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

#include "chipnet/vlselect.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "chipnet/random.h"

namespace chipnet {

TrafficProfile TrafficProfile::Uniform(const Topology& topo, double rate) {
  TrafficProfile p;
  p.send.assign(topo.num_routers(), 0.0);
  for (int r : topo.Endpoints()) p.send[r] = rate;
  p.recv = p.send;
  return p;
}

TrafficProfile LoadProfile(const std::string& path, const Topology& topo) {
  std::ifstream in(path);
  if (!in) throw TableError("cannot open profile file: " + path);
  TrafficProfile p;
  p.send.assign(topo.num_routers(), 0.0);
  p.recv.assign(topo.num_routers(), 0.0);
  std::vector<bool> recv_given(topo.num_routers(), false);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    long router = -1;
    double send = 0.0, recv = 0.0;
    if (!(ls >> router >> send) || router < 0 || router >= topo.num_routers() ||
        !std::isfinite(send) || send < 0.0) {
      throw TableError(path + ":" + std::to_string(line_no) +
                       ": expected `router,send[,recv]` with a valid router and "
                       "a finite non-negative rate");
    }
    p.send[router] = send;
    if (ls >> recv) {
      if (!std::isfinite(recv) || recv < 0.0) {
        throw TableError(path + ":" + std::to_string(line_no) + ": bad recv rate");
      }
      p.recv[router] = recv;
      recv_given[router] = true;
    }
  }
  for (int r = 0; r < topo.num_routers(); ++r) {
    if (!recv_given[r]) p.recv[r] = p.send[r];
  }
  return p;
}

int SelectionProblem::num_usable() const {
  return static_cast<int>(std::count(usable.begin(), usable.end(), true));
}

SelectionProblem MakeProblem(const Topology& topo, int chiplet,
                             std::uint32_t fault_mask,
                             const std::vector<double>& weight_by_router,
                             double rho) {
  SelectionProblem p;
  p.rho = rho;
  const auto links = topo.ChipletVls(chiplet);
  for (std::size_t v = 0; v < links.size(); ++v) {
    p.usable.push_back((fault_mask & (1u << v)) == 0);
  }
  for (int r : topo.ChipletRouters(chiplet)) {
    p.weight.push_back(weight_by_router.at(r));
    std::vector<int> row;
    for (int id : links) {
      row.push_back(HopDistance(topo.At(r), topo.vl(id).chiplet_router));
    }
    p.dist.push_back(std::move(row));
  }
  return p;
}

namespace {

// Shared by every code path that reports a cost, so that equal sets always
// produce bit-identical totals.
double EvalCost(const SelectionProblem& p, const std::vector<int>& choice,
                std::vector<double>& load, std::vector<int>& dist) {
  const int nl = p.num_links();
  load.assign(nl, 0.0);
  dist.assign(nl, 0);
  for (int r = 0; r < p.num_routers(); ++r) {
    load[choice[r]] += p.weight[r];
    dist[choice[r]] += p.dist[r][choice[r]];
  }
  double sum = 0.0;
  int usable = 0;
  for (int v = 0; v < nl; ++v) {
    if (!p.usable[v]) continue;
    sum += load[v];
    ++usable;
  }
  const double avg = usable > 0 ? sum / usable : 0.0;
  double total = 0.0;
  for (int v = 0; v < nl; ++v) {
    if (!p.usable[v]) continue;
    const double lc = avg > 0.0 ? std::abs((load[v] - avg) / avg) : 0.0;
    total += p.rho * dist[v] + lc;
  }
  return total;
}

double EvalCost(const SelectionProblem& p, const std::vector<int>& choice) {
  thread_local std::vector<double> load;
  thread_local std::vector<int> dist;
  return EvalCost(p, choice, load, dist);
}

}  // namespace

bool IsValidSelection(const SelectionProblem& p, const SelectionSet& s) {
  if (static_cast<int>(s.choice.size()) != p.num_routers()) return false;
  for (int v : s.choice) {
    if (v < 0 || v >= p.num_links() || !p.usable[v]) return false;
  }
  return true;
}

double VlLoad(const SelectionProblem& p, const SelectionSet& s, int link) {
  double l = 0.0;
  for (int r = 0; r < p.num_routers(); ++r) {
    if (s.choice[r] == link) l += p.weight[r];
  }
  return l;
}

double LoadCost(const SelectionProblem& p, const SelectionSet& s, int link) {
  return OverallCost(p, s).load_cost.at(link);
}

int DistanceCost(const SelectionProblem& p, const SelectionSet& s, int link) {
  int d = 0;
  for (int r = 0; r < p.num_routers(); ++r) {
    if (s.choice[r] == link) d += p.dist[r][link];
  }
  return d;
}

CostBreakdown OverallCost(const SelectionProblem& p, const SelectionSet& s) {
  if (!IsValidSelection(p, s)) throw TableError("invalid selection set");
  CostBreakdown c;
  c.rho = p.rho;
  c.total = EvalCost(p, s.choice, c.load, c.distance_cost);
  double sum = 0.0;
  for (int v = 0; v < p.num_links(); ++v) {
    if (p.usable[v]) sum += c.load[v];
  }
  const int usable = p.num_usable();
  c.avg_load = usable > 0 ? sum / usable : 0.0;
  c.load_cost.assign(p.num_links(), 0.0);
  for (int v = 0; v < p.num_links(); ++v) {
    if (p.usable[v] && c.avg_load > 0.0) {
      c.load_cost[v] = std::abs((c.load[v] - c.avg_load) / c.avg_load);
    }
  }
  return c;
}

namespace {

constexpr double kTieTolerance = 1e-9;

std::vector<std::vector<int>> Candidates(const SelectionProblem& p, int k_nearest) {
  std::vector<std::vector<int>> cand(p.num_routers());
  for (int r = 0; r < p.num_routers(); ++r) {
    for (int v = 0; v < p.num_links(); ++v) {
      if (p.usable[v]) cand[r].push_back(v);
    }
    if (k_nearest > 0 && static_cast<int>(cand[r].size()) > k_nearest) {
      std::vector<int> by_dist = cand[r];
      std::stable_sort(by_dist.begin(), by_dist.end(), [&](int a, int b) {
        return p.dist[r][a] < p.dist[r][b];
      });
      by_dist.resize(k_nearest);
      std::sort(by_dist.begin(), by_dist.end());
      cand[r] = std::move(by_dist);
    }
  }
  return cand;
}

class BranchAndBound {
 public:
  BranchAndBound(const SelectionProblem& p, std::vector<std::vector<int>> cand)
      : p_(p), cand_(std::move(cand)), n_(p.num_routers()) {
    total_weight_ = std::accumulate(p.weight.begin(), p.weight.end(), 0.0);
    avg_ = total_weight_ / p.num_usable();
    suffix_min_dist_.assign(n_ + 1, 0);
    suffix_uniform_.assign(n_ + 1, true);
    for (int r = n_ - 1; r >= 0; --r) {
      int best = std::numeric_limits<int>::max();
      for (int v : cand_[r]) best = std::min(best, p.dist[r][v]);
      suffix_min_dist_[r] = suffix_min_dist_[r + 1] + best;
      suffix_uniform_[r] =
          suffix_uniform_[r + 1] && (r == n_ - 1 || p.weight[r] == p.weight[r + 1]);
    }
    for (int v = 0; v < p.num_links(); ++v) {
      if (p.usable[v]) usable_.push_back(v);
    }
    load_.assign(p.num_links(), 0.0);
    choice_.assign(n_, -1);
  }

  void Seed(const std::vector<int>& choice) {
    best_ = choice;
    best_cost_ = EvalCost(p_, choice);
    best_from_search_ = false;
  }

  void Run() { Descend(0, 0); }

  const std::vector<int>& best() const { return best_; }
  std::uint64_t visited() const { return visited_; }

 private:
  // Lower bound on the final sum of |l_v - l_avg| / l_avg given the loads
  // so far and routers [next, n) still to place.
  double LoadBound(int next) const {
    if (avg_ <= 0.0) return 0.0;
    double over = 0.0;
    for (int v : usable_) over += std::max(0.0, load_[v] - avg_);
    // Deviations sum to zero, so the total is twice the overshoot.
    const double continuous = 2.0 * over / avg_;
    if (next >= n_ || !suffix_uniform_[next]) return continuous;
    // Equal remaining weights: the best integer spread is found greedily
    // because each link's deviation is convex in the number of routers added.
    const double w = p_.weight[next];
    if (w <= 0.0) return continuous;
    double cur[32];
    const int nu = static_cast<int>(usable_.size());
    for (int i = 0; i < nu; ++i) cur[i] = load_[usable_[i]];
    for (int k = next; k < n_; ++k) {
      int arg = 0;
      double best_delta = std::numeric_limits<double>::infinity();
      for (int i = 0; i < nu; ++i) {
        const double delta = std::abs(cur[i] + w - avg_) - std::abs(cur[i] - avg_);
        if (delta < best_delta) {
          best_delta = delta;
          arg = i;
        }
      }
      cur[arg] += w;
    }
    double dev = 0.0;
    for (int i = 0; i < nu; ++i) dev += std::abs(cur[i] - avg_);
    return std::max(continuous, dev / avg_);
  }

  bool Prune(double bound) const {
    if (best_from_search_) return bound >= best_cost_ - kTieTolerance;
    return bound > best_cost_ + kTieTolerance;
  }

  void Descend(int r, int dist_sum) {
    ++visited_;
    if (r == n_) {
      const double cost = EvalCost(p_, choice_);
      const bool better = cost < best_cost_ - kTieTolerance;
      const bool tie_but_earlier = !best_from_search_ &&
                                   std::abs(cost - best_cost_) <= kTieTolerance &&
                                   choice_ < best_;
      if (better || tie_but_earlier) {
        best_ = choice_;
        best_cost_ = cost;
        best_from_search_ = true;
      }
      return;
    }
    for (int v : cand_[r]) {
      const int d = dist_sum + p_.dist[r][v];
      load_[v] += p_.weight[r];
      choice_[r] = v;
      const double bound = p_.rho * (d + suffix_min_dist_[r + 1]) + LoadBound(r + 1);
      if (!Prune(bound)) Descend(r + 1, d);
      load_[v] -= p_.weight[r];
    }
    choice_[r] = -1;
  }

  const SelectionProblem& p_;
  std::vector<std::vector<int>> cand_;
  int n_;
  double total_weight_ = 0.0;
  double avg_ = 0.0;
  std::vector<int> suffix_min_dist_;
  std::vector<bool> suffix_uniform_;
  std::vector<int> usable_;
  std::vector<double> load_;
  std::vector<int> choice_;
  std::vector<int> best_;
  double best_cost_ = std::numeric_limits<double>::infinity();
  bool best_from_search_ = false;
  std::uint64_t visited_ = 0;
};

// Single-router moves until no move lowers the cost. Only used to seed the
// branch and bound with a good incumbent.
std::vector<int> LocalSearch(const SelectionProblem& p,
                             const std::vector<std::vector<int>>& cand,
                             std::vector<int> choice) {
  double cost = EvalCost(p, choice);
  for (bool improved = true; improved;) {
    improved = false;
    for (int r = 0; r < p.num_routers(); ++r) {
      const int keep = choice[r];
      for (int v : cand[r]) {
        if (v == keep) continue;
        choice[r] = v;
        const double c = EvalCost(p, choice);
        if (c < cost - kTieTolerance) {
          cost = c;
          improved = true;
          break;
        }
        choice[r] = keep;
      }
    }
  }
  return choice;
}

}  // namespace

double SearchSpaceSize(const SelectionProblem& p, const OptimizeOptions& options) {
  double size = 1.0;
  for (const auto& c : Candidates(p, options.k_nearest)) size *= c.size();
  return size;
}

OptimizeResult OptimizeSelection(const SelectionProblem& p,
                                 const OptimizeOptions& options) {
  if (p.num_usable() == 0) {
    throw TableError("disconnected scenario: no fault-free vertical link");
  }
  if (p.num_links() > 32) throw TableError("too many links on one chiplet");
  const auto cand = Candidates(p, options.k_nearest);
  SearchStrategy strategy = options.strategy;
  if (strategy == SearchStrategy::kAuto) {
    strategy = SearchSpaceSize(p, options) <= options.exhaustive_limit
                   ? SearchStrategy::kExhaustive
                   : SearchStrategy::kBranchAndBound;
  }

  OptimizeResult result;
  const int n = p.num_routers();
  if (strategy == SearchStrategy::kExhaustive) {
    std::vector<int> digit(n, 0);
    std::vector<int> choice(n);
    for (int r = 0; r < n; ++r) choice[r] = cand[r][0];
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> best;
    while (true) {
      ++result.visited;
      const double c = EvalCost(p, choice);
      if (c < best_cost - kTieTolerance) {
        best_cost = c;
        best = choice;
      }
      // Odometer with router 0 as the most significant digit, so sets come
      // out in lexicographic order.
      int r = n - 1;
      while (r >= 0 && ++digit[r] == static_cast<int>(cand[r].size())) {
        digit[r] = 0;
        choice[r] = cand[r][0];
        --r;
      }
      if (r < 0) break;
      choice[r] = cand[r][digit[r]];
    }
    result.set.choice = std::move(best);
  } else {
    // Seed with nearest-link selection refined by local moves.
    std::vector<int> seed(n);
    for (int r = 0; r < n; ++r) {
      seed[r] = *std::min_element(cand[r].begin(), cand[r].end(), [&](int a, int b) {
        return p.dist[r][a] < p.dist[r][b] || (p.dist[r][a] == p.dist[r][b] && a < b);
      });
    }
    BranchAndBound bnb(p, cand);
    bnb.Seed(LocalSearch(p, cand, seed));
    bnb.Run();
    result.set.choice = bnb.best();
    result.visited = bnb.visited();
  }
  result.cost = OverallCost(p, result.set);
  return result;
}

std::vector<std::uint32_t> EnumerateScenarios(int link_count) {
  if (link_count <= 0 || link_count > 31) {
    throw TableError("link count out of range: " + std::to_string(link_count));
  }
  const std::uint32_t all = (1u << link_count) - 1u;
  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = 0; m < all; ++m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    return std::popcount(a) < std::popcount(b);
  });
  return masks;
}

SelectionSet BaselineSelect(BaselineKind kind, const SelectionProblem& p,
                            std::uint64_t seed) {
  if (p.num_usable() == 0) {
    throw TableError("disconnected scenario: no fault-free vertical link");
  }
  std::vector<int> usable;
  for (int v = 0; v < p.num_links(); ++v) {
    if (p.usable[v]) usable.push_back(v);
  }
  SelectionSet s;
  s.choice.resize(p.num_routers());
  Rng rng(seed);
  for (int r = 0; r < p.num_routers(); ++r) {
    if (kind == BaselineKind::kRandom) {
      s.choice[r] = usable[rng.Below(usable.size())];
      continue;
    }
    int best = usable[0];
    for (int v : usable) {
      if (p.dist[r][v] < p.dist[r][best]) best = v;
    }
    s.choice[r] = best;
  }
  return s;
}

std::string_view TableStrategyName(TableStrategy s) {
  switch (s) {
    case TableStrategy::kOptimal:
      return "optimal";
    case TableStrategy::kDistanceBased:
      return "distance";
    case TableStrategy::kRandom:
      return "random";
  }
  return "?";
}

SelectionTable BuildTables(const Topology& topo, const TrafficProfile& profile,
                           const TableOptions& options) {
  SelectionTable table;
  // Chiplets of equal geometry and traffic share their optimization runs.
  std::map<std::vector<double>, SelectionSet> memo;
  for (int c = 0; c < topo.num_chiplets(); ++c) {
    for (std::uint32_t mask : EnumerateScenarios(topo.VlCount(c))) {
      for (Role role : {Role::kSource, Role::kDest}) {
        const auto& weights = role == Role::kSource ? profile.send : profile.recv;
        const SelectionProblem p = MakeProblem(topo, c, mask, weights, options.rho);
        SelectionSet set;
        switch (options.strategy) {
          case TableStrategy::kOptimal: {
            std::vector<double> key{p.rho, static_cast<double>(options.optimize.k_nearest)};
            key.insert(key.end(), p.weight.begin(), p.weight.end());
            for (const auto& row : p.dist) key.insert(key.end(), row.begin(), row.end());
            for (bool u : p.usable) key.push_back(u ? 1.0 : 0.0);
            auto it = memo.find(key);
            if (it == memo.end()) {
              it = memo.emplace(key, OptimizeSelection(p, options.optimize).set).first;
            }
            set = it->second;
            break;
          }
          case TableStrategy::kDistanceBased:
            set = BaselineSelect(BaselineKind::kDistanceBased, p);
            break;
          case TableStrategy::kRandom:
            set = BaselineSelect(
                BaselineKind::kRandom, p,
                MixSeed(MixSeed(options.seed, static_cast<std::uint64_t>(c)),
                        (static_cast<std::uint64_t>(mask) << 1) |
                            (role == Role::kDest ? 1u : 0u)));
            break;
        }
        table.Set(c, mask, role, std::move(set));
      }
    }
  }
  return table;
}

}  // namespace chipnet
