#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "meandim/common.hpp"
#include "meandim/metric.hpp"

namespace meandim {

enum class SolveMode { exact, greedy, sampled };

enum class BoundDirection { exact, lower, upper };

inline const char* to_string(BoundDirection d) {
  switch (d) {
    case BoundDirection::exact: return "exact";
    case BoundDirection::lower: return "lower";
    case BoundDirection::upper: return "upper";
  }
  return "?";
}

inline const char* to_string(SolveMode m) {
  switch (m) {
    case SolveMode::exact: return "exact";
    case SolveMode::greedy: return "greedy";
    case SolveMode::sampled: return "sampled";
  }
  return "?";
}

struct CountQuery {
  SolveMode mode = SolveMode::exact;
  Budgets budgets;
  // Exact solves that blow the node budget fall back to the greedy value with
  // a degraded bound direction; set false to get a ResourceError instead.
  bool degrade_on_budget = true;
  // Points known to lie on a line in index order (alphabet grids): greedy
  // sweeps are provably optimal, so exact mode can skip branch-and-bound.
  bool line_order = false;
};

struct CountReport {
  std::uint64_t count = 0;
  BoundDirection direction = BoundDirection::exact;
  bool budget_exhausted = false;
  std::uint64_t nodes = 0;
};

namespace detail {

// Small dynamic bitset; plenty for desk-scale solver instances.
class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}
  void set(std::size_t i) { w_[i >> 6] |= 1ull << (i & 63); }
  void reset(std::size_t i) { w_[i >> 6] &= ~(1ull << (i & 63)); }
  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  std::size_t size() const { return n_; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : w_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  bool any() const {
    for (auto w : w_) {
      if (w) return true;
    }
    return false;
  }
  int lowest() const {
    for (std::size_t k = 0; k < w_.size(); ++k) {
      if (w_[k]) return static_cast<int>(k * 64 + static_cast<std::size_t>(__builtin_ctzll(w_[k])));
    }
    return -1;
  }
  Bits& operator&=(const Bits& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
    return *this;
  }
  Bits& operator|=(const Bits& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] |= o.w_[k];
    return *this;
  }
  Bits& and_not(const Bits& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= ~o.w_[k];
    return *this;
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t k = 0; k < w_.size(); ++k) {
      if (w_[k] & ~o.w_[k]) return false;
    }
    return true;
  }
  std::size_t count_and(const Bits& o) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) {
      c += static_cast<std::size_t>(__builtin_popcountll(w_[k] & o.w_[k]));
    }
    return c;
  }
  bool operator==(const Bits& o) const { return n_ == o.n_ && w_ == o.w_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

// Adjacency rows for "conflict" relations (d <= eps or d < eps).
inline std::vector<Bits> adjacency(const DistMatrix& d, double eps, bool strict) {
  const std::size_t n = d.size();
  std::vector<Bits> adj(n, Bits(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double v = d.at(i, j);
      const bool edge = strict ? (v < eps) : (v <= eps);
      if (edge) {
        adj[i].set(j);
        adj[j].set(i);
      }
    }
  }
  return adj;
}

struct NodeBudget {
  std::uint64_t used = 0;
  std::uint64_t cap = 0;
  bool spend() {
    if (used >= cap) return false;
    ++used;
    return true;
  }
};

// Maximum independent set via branch-and-bound with a greedy clique-cover
// bound. Isolated vertices are peeled first so sparse instances stay shallow.
class MisSolver {
 public:
  MisSolver(const std::vector<Bits>& adj, NodeBudget& budget) : adj_(adj), budget_(budget) {}

  // Returns false if the budget ran out (best_ then holds a lower bound).
  bool solve(std::size_t greedy_start, std::size_t& best) {
    const std::size_t n = adj_.size();
    Bits cand(n);
    std::size_t forced = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (adj_[i].any()) {
        cand.set(i);
      } else {
        ++forced;
      }
    }
    best_ = greedy_start;
    ok_ = true;
    expand(cand, forced);
    best = best_;
    return ok_;
  }

 private:
  void expand(Bits cand, std::size_t size) {
    if (!ok_) return;
    if (!budget_.spend()) {
      ok_ = false;
      return;
    }
    if (!cand.any()) {
      best_ = std::max(best_, size);
      return;
    }
    if (size + clique_cover_bound(cand) <= best_) return;
    // Branch on the candidate with most conflicts inside cand.
    int v = -1;
    std::size_t vdeg = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (!cand.test(i)) continue;
      const std::size_t deg = adj_[i].count_and(cand);
      if (v == -1 || deg > vdeg) {
        v = static_cast<int>(i);
        vdeg = deg;
      }
    }
    Bits with = cand;
    with.reset(static_cast<std::size_t>(v));
    with.and_not(adj_[static_cast<std::size_t>(v)]);
    expand(with, size + 1);
    Bits without = cand;
    without.reset(static_cast<std::size_t>(v));
    expand(without, size);
  }

  // Greedy clique cover of the candidates; its size bounds the independent set.
  std::size_t clique_cover_bound(const Bits& cand) const {
    std::vector<Bits> cliques;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (!cand.test(i)) continue;
      bool placed = false;
      for (auto& q : cliques) {
        if (q.subset_of(adj_[i])) {  // i adjacent to every member
          q.set(i);
          placed = true;
          break;
        }
      }
      if (!placed) {
        Bits q(cand.size());
        q.set(i);
        cliques.push_back(std::move(q));
      }
    }
    return cliques.size();
  }

  const std::vector<Bits>& adj_;
  NodeBudget& budget_;
  std::size_t best_ = 0;
  bool ok_ = true;
};

// Minimum set cover by branch-and-bound: branch on the uncovered element with
// fewest covering sets, try its covering sets by descending fresh coverage.
class SetCoverSolver {
 public:
  SetCoverSolver(const std::vector<Bits>& sets, std::size_t universe, NodeBudget& budget)
      : sets_(sets), universe_(universe), budget_(budget) {}

  bool solve(std::size_t greedy_start, std::size_t& best) {
    best_ = greedy_start;
    ok_ = true;
    Bits uncovered(universe_);
    for (std::size_t i = 0; i < universe_; ++i) uncovered.set(i);
    std::size_t max_size = 1;
    for (const auto& s : sets_) max_size = std::max(max_size, s.count());
    max_size_ = max_size;
    expand(uncovered, 0);
    best = best_;
    return ok_;
  }

 private:
  void expand(const Bits& uncovered, std::size_t used) {
    if (!ok_) return;
    if (!budget_.spend()) {
      ok_ = false;
      return;
    }
    const std::size_t left = uncovered.count();
    if (left == 0) {
      best_ = std::min(best_, used);
      return;
    }
    const std::size_t lb = (left + max_size_ - 1) / max_size_;
    if (used + lb >= best_) return;
    // Element with fewest covering sets.
    int elem = -1;
    std::size_t fewest = sets_.size() + 1;
    for (std::size_t e = 0; e < universe_; ++e) {
      if (!uncovered.test(e)) continue;
      std::size_t c = 0;
      for (const auto& s : sets_) {
        if (s.test(e)) ++c;
      }
      if (c < fewest) {
        fewest = c;
        elem = static_cast<int>(e);
      }
      if (fewest <= 1) break;
    }
    if (fewest == 0) {
      // Uncoverable element: no solution down this path (cannot happen when
      // every point covers itself, but stay defensive for ball families).
      return;
    }
    std::vector<std::pair<std::size_t, std::size_t>> order;  // (-coverage, index)
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      if (sets_[s].test(static_cast<std::size_t>(elem))) {
        order.emplace_back(sets_[s].count_and(uncovered), s);
      }
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (const auto& [cov, s] : order) {
      Bits next = uncovered;
      next.and_not(sets_[s]);
      expand(next, used + 1);
      if (!ok_) return;
    }
  }

  const std::vector<Bits>& sets_;
  std::size_t universe_;
  NodeBudget& budget_;
  std::size_t best_ = 0;
  std::size_t max_size_ = 1;
  bool ok_ = true;
};

// All maximal cliques of the strict-proximity graph (Bron-Kerbosch with
// pivoting), capped by budget.
inline bool maximal_cliques(const std::vector<Bits>& adj, std::uint64_t cap,
                            std::vector<Bits>& out) {
  const std::size_t n = adj.size();
  Bits p(n), x(n);
  for (std::size_t i = 0; i < n; ++i) p.set(i);
  std::uint64_t visited = 0;
  bool ok = true;
  std::function<void(Bits, Bits, Bits)> rec = [&](Bits r, Bits pp, Bits xx) {
    if (!ok) return;
    if (++visited > cap) {
      ok = false;
      return;
    }
    if (!pp.any() && !xx.any()) {
      out.push_back(r);
      return;
    }
    // pivot: vertex of P|X with most neighbours in P
    Bits both = pp;
    both |= xx;
    int pivot = -1;
    std::size_t best = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (!both.test(v)) continue;
      const std::size_t c = adj[v].count_and(pp);
      if (pivot == -1 || c > best) {
        pivot = static_cast<int>(v);
        best = c;
      }
    }
    Bits ext = pp;
    if (pivot != -1) ext.and_not(adj[static_cast<std::size_t>(pivot)]);
    for (std::size_t v = 0; v < n && ok; ++v) {
      if (!ext.test(v)) continue;
      Bits r2 = r;
      r2.set(v);
      Bits p2 = pp;
      p2 &= adj[v];
      Bits x2 = xx;
      x2 &= adj[v];
      rec(std::move(r2), std::move(p2), std::move(x2));
      pp.reset(v);
      xx.set(v);
    }
  };
  rec(Bits(n), p, x);
  return ok;
}

}  // namespace detail

// Greedy separated set: lowest index first, keep a point iff it is strictly
// more than eps from everything kept so far. Lower bound of the maximum; on
// line-ordered points it is the exact optimum.
inline std::vector<std::size_t> greedy_separated_points(const DistMatrix& d, double eps) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < d.size(); ++i) {
    bool ok = true;
    for (std::size_t j : kept) {
      if (d.at(i, j) <= eps) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(i);
  }
  return kept;
}

// Largest (F,eps)-separated subset: pairwise distances strictly above eps.
inline CountReport max_separated(const DistMatrix& d, double eps, const CountQuery& q) {
  CountReport rep;
  const std::size_t greedy = greedy_separated_points(d, eps).size();
  if (q.mode != SolveMode::exact) {
    rep.count = greedy;
    rep.direction = BoundDirection::lower;
    return rep;
  }
  if (q.line_order) {
    // Lowest-index sweep is the exact optimum for points in line order.
    rep.count = greedy;
    return rep;
  }
  if (d.size() > q.budgets.exact_points) {
    throw ResourceError("max_separated: instance above exact point cap");
  }
  const auto adj = detail::adjacency(d, eps, /*strict=*/false);
  detail::NodeBudget budget{0, q.budgets.solver_nodes};
  detail::MisSolver solver(adj, budget);
  std::size_t best = 0;
  const bool ok = solver.solve(greedy, best);
  rep.count = best;
  rep.nodes = budget.used;
  if (!ok) {
    if (!q.degrade_on_budget) throw ResourceError("max_separated: node budget exhausted");
    rep.direction = BoundDirection::lower;
    rep.budget_exhausted = true;
  }
  return rep;
}

// Greedy spanning set: repeatedly take the point covering the most uncovered
// points (ties to the lowest index). Upper bound of the minimum. Gains are
// maintained incrementally so the total cost is the adjacency size plus one
// linear scan per center.
inline std::vector<std::size_t> greedy_spanning_points(const DistMatrix& d, double eps) {
  const std::size_t n = d.size();
  std::vector<std::vector<std::uint32_t>> ball(n);
  for (std::size_t i = 0; i < n; ++i) ball[i].push_back(static_cast<std::uint32_t>(i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (d.at(i, j) <= eps) {
        ball[i].push_back(static_cast<std::uint32_t>(j));
        ball[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  std::vector<std::size_t> gain(n);
  for (std::size_t i = 0; i < n; ++i) gain[i] = ball[i].size();
  std::vector<bool> covered(n, false);
  std::size_t remaining = n;
  std::vector<std::size_t> centers;
  while (remaining > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (gain[c] > best_gain) {
        best_gain = gain[c];
        best = c;
      }
    }
    if (best_gain == 0) throw DomainError("greedy_spanning: point failed to cover itself");
    centers.push_back(best);
    for (std::uint32_t u : ball[best]) {
      if (covered[u]) continue;
      covered[u] = true;
      --remaining;
      for (std::uint32_t w : ball[u]) --gain[w];
    }
  }
  return centers;
}

// Exact sweep for line-ordered points: cover the leftmost uncovered point with
// the farthest-right center still within eps of it.
inline std::size_t line_spanning_count(const DistMatrix& d, double eps) {
  const std::size_t n = d.size();
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t c = i;
    while (c + 1 < n && d.at(i, c + 1) <= eps) ++c;
    ++count;
    std::size_t j = c;
    while (j + 1 < n && d.at(c, j + 1) <= eps) ++j;
    i = j + 1;
  }
  return count;
}

// Smallest (F,eps)-spanning subset: centers drawn from the point set, every
// point within eps (non-strict) of some center.
inline CountReport min_spanning(const DistMatrix& d, double eps, const CountQuery& q) {
  CountReport rep;
  if (q.mode != SolveMode::exact) {
    rep.count = q.line_order ? line_spanning_count(d, eps) : greedy_spanning_points(d, eps).size();
    rep.direction = BoundDirection::upper;
    return rep;
  }
  if (q.line_order) {
    rep.count = line_spanning_count(d, eps);
    return rep;
  }
  const std::size_t greedy = greedy_spanning_points(d, eps).size();
  if (d.size() > q.budgets.exact_points) {
    throw ResourceError("min_spanning: instance above exact point cap");
  }
  const std::size_t n = d.size();
  std::vector<detail::Bits> balls(n, detail::Bits(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (d.at(i, j) <= eps) balls[i].set(j);
    }
  }
  detail::NodeBudget budget{0, q.budgets.solver_nodes};
  detail::SetCoverSolver solver(balls, n, budget);
  std::size_t best = 0;
  const bool ok = solver.solve(greedy, best);
  rep.count = best;
  rep.nodes = budget.used;
  if (!ok) {
    if (!q.degrade_on_budget) throw ResourceError("min_spanning: node budget exhausted");
    rep.direction = BoundDirection::upper;
    rep.budget_exhausted = true;
  }
  return rep;
}

// Greedy cover: sweep-partition into groups of diameter strictly below eps,
// seeding each group at the lowest unassigned index. Upper bound.
inline std::size_t greedy_cover_count(const DistMatrix& d, double eps) {
  const std::size_t n = d.size();
  std::vector<bool> assigned(n, false);
  std::size_t groups = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (assigned[seed]) continue;
    ++groups;
    std::vector<std::size_t> part{seed};
    assigned[seed] = true;
    for (std::size_t j = seed + 1; j < n; ++j) {
      if (assigned[j]) continue;
      bool fits = true;
      for (std::size_t p : part) {
        if (d.at(j, p) >= eps) {
          fits = false;
          break;
        }
      }
      if (fits) {
        part.push_back(j);
        assigned[j] = true;
      }
    }
  }
  return groups;
}

namespace detail {

// Exact minimum cover by sets of diameter < eps. On finite sets the infimum
// over arbitrary covers is attained by a partition, so a subset DP over the
// lowest uncovered point is exact. Used for both the count and the weighted
// Hausdorff sums.
template <typename Weight>
double partition_cover_dp(const DistMatrix& d, double eps, Weight&& part_weight,
                          std::uint64_t budget) {
  const std::size_t n = d.size();
  if (n > 20) throw ResourceError("partition cover DP: too many points");
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<double> dp(full + 1, std::numeric_limits<double>::infinity());
  dp[0] = 0.0;
  std::uint64_t work = 0;
  for (std::size_t covered = 0; covered <= full; ++covered) {
    if (!std::isfinite(dp[covered]) || covered == full) continue;
    std::size_t p = 0;
    while (covered & (std::size_t{1} << p)) ++p;
    const std::size_t rest = (~covered & full) & ~((std::size_t{1} << (p + 1)) - 1);
    // Enumerate subsets S of rest; part = {p} union S with diam < eps.
    // Recursive growth with pruning: adding a point keeps diam < eps only if
    // it is < eps from every member.
    std::vector<std::size_t> cand;
    for (std::size_t j = p + 1; j < n; ++j) {
      if ((rest >> j) & 1 && d.at(p, j) < eps) cand.push_back(j);
    }
    std::vector<std::size_t> members{p};
    std::function<void(std::size_t, std::size_t, double)> grow =
        [&](std::size_t idx, std::size_t mask, double diam) {
          if (++work > budget) throw ResourceError("partition cover DP: budget exhausted");
          const double w = part_weight(diam, members.size());
          const std::size_t next_cov = covered | mask | (std::size_t{1} << p);
          dp[next_cov] = std::min(dp[next_cov], dp[covered] + w);
          for (std::size_t k = idx; k < cand.size(); ++k) {
            const std::size_t j = cand[k];
            double nd = diam;
            bool fits = true;
            for (std::size_t m : members) {
              const double v = d.at(m, j);
              if (v >= eps) {
                fits = false;
                break;
              }
              nd = std::max(nd, v);
            }
            if (!fits) continue;
            members.push_back(j);
            grow(k + 1, mask | (std::size_t{1} << j), nd);
            members.pop_back();
          }
        };
    grow(0, 0, 0.0);
  }
  return dp[full];
}

}  // namespace detail

// Smallest cover by sets of diameter strictly below eps.
inline CountReport min_cover(const DistMatrix& d, double eps, const CountQuery& q) {
  CountReport rep;
  const std::size_t greedy = greedy_cover_count(d, eps);
  if (q.mode != SolveMode::exact) {
    rep.count = greedy;
    rep.direction = BoundDirection::upper;
    return rep;
  }
  if (q.line_order) {
    // Sweep partition is optimal in line order.
    rep.count = greedy;
    return rep;
  }
  if (d.size() > q.budgets.exact_points) {
    throw ResourceError("min_cover: instance above exact point cap");
  }
  if (d.size() <= 20) {
    const double v = detail::partition_cover_dp(
        d, eps, [](double, std::size_t) { return 1.0; }, q.budgets.solver_nodes);
    rep.count = static_cast<std::uint64_t>(std::llround(v));
    return rep;
  }
  // Larger instances: minimum clique cover as set cover over maximal cliques
  // of the strict-proximity graph.
  const auto adj = detail::adjacency(d, eps, /*strict=*/true);
  std::vector<detail::Bits> cliques;
  if (!detail::maximal_cliques(adj, q.budgets.solver_nodes, cliques)) {
    if (!q.degrade_on_budget) throw ResourceError("min_cover: clique enumeration over budget");
    rep.count = greedy;
    rep.direction = BoundDirection::upper;
    rep.budget_exhausted = true;
    return rep;
  }
  detail::NodeBudget budget{0, q.budgets.solver_nodes};
  detail::SetCoverSolver solver(cliques, d.size(), budget);
  std::size_t best = 0;
  const bool ok = solver.solve(greedy, best);
  rep.count = best;
  rep.nodes = budget.used;
  if (!ok) {
    if (!q.degrade_on_budget) throw ResourceError("min_cover: node budget exhausted");
    rep.direction = BoundDirection::upper;
    rep.budget_exhausted = true;
  }
  return rep;
}

// Masses over the point set for measure-weighted covering numbers.
struct WeightedPointSet {
  std::vector<double> mass;  // nonnegative, sums to 1 within 1e-12

  void validate() const {
    double total = 0.0;
    for (double m : mass) {
      if (m < 0.0) throw DomainError("point mass must be nonnegative");
      total += m;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("point masses must sum to 1");
  }
};

// Smallest number of centers (from the point set) whose eps-balls carry mass
// strictly above 1 - delta.
inline CountReport katok_spanning(const DistMatrix& d, const WeightedPointSet& mu, double eps,
                                  double delta, const CountQuery& q) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("katok_spanning: delta must be in (0,1)");
  if (mu.mass.size() != d.size()) throw DomainError("katok_spanning: mass size mismatch");
  mu.validate();
  const std::size_t n = d.size();
  const double target = 1.0 - delta;

  auto greedy_count = [&]() {
    std::vector<bool> covered(n, false);
    double mass = 0.0;
    std::size_t picks = 0;
    while (!(mass > target)) {
      std::size_t best = n;
      double best_gain = -1.0;
      for (std::size_t c = 0; c < n; ++c) {
        double gain = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
          if (!covered[u] && d.at(c, u) <= eps) gain += mu.mass[u];
        }
        if (gain > best_gain + 1e-18) {
          best_gain = gain;
          best = c;
        }
      }
      if (best == n || best_gain <= 0.0) {
        throw DomainError("katok_spanning: cannot reach mass target");
      }
      ++picks;
      for (std::size_t u = 0; u < n; ++u) {
        if (!covered[u] && d.at(best, u) <= eps) {
          covered[u] = true;
          mass += mu.mass[u];
        }
      }
    }
    return picks;
  };

  CountReport rep;
  const std::size_t greedy = greedy_count();
  if (q.mode != SolveMode::exact) {
    rep.count = greedy;
    rep.direction = BoundDirection::upper;
    return rep;
  }
  if (n > q.budgets.exact_points) throw ResourceError("katok_spanning: above exact point cap");

  // Branch-and-bound over center subsets: cover mass > target with fewest
  // balls; bound by remaining mass over the largest single-ball mass.
  std::vector<detail::Bits> balls(n, detail::Bits(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (d.at(i, j) <= eps) balls[i].set(j);
    }
  }
  std::size_t best = greedy;
  detail::NodeBudget budget{0, q.budgets.solver_nodes};
  bool ok = true;
  std::function<void(detail::Bits, double, std::size_t, std::size_t)> rec =
      [&](detail::Bits covered, double mass, std::size_t used, std::size_t next) {
        if (!ok) return;
        if (!budget.spend()) {
          ok = false;
          return;
        }
        if (mass > target) {
          best = std::min(best, used);
          return;
        }
        double max_gain = 0.0;
        for (std::size_t c = next; c < n; ++c) {
          double gain = 0.0;
          for (std::size_t u = 0; u < n; ++u) {
            if (!covered.test(u) && balls[c].test(u)) gain += mu.mass[u];
          }
          max_gain = std::max(max_gain, gain);
        }
        if (max_gain <= 0.0) return;
        const double need = target - mass;
        const std::size_t lb = static_cast<std::size_t>(std::floor(need / max_gain)) + 1;
        if (used + lb >= best) return;
        for (std::size_t c = next; c < n && ok; ++c) {
          detail::Bits cov2 = covered;
          double m2 = mass;
          for (std::size_t u = 0; u < n; ++u) {
            if (!cov2.test(u) && balls[c].test(u)) {
              cov2.set(u);
              m2 += mu.mass[u];
            }
          }
          if (m2 > mass) rec(std::move(cov2), m2, used + 1, c + 1);
        }
      };
  rec(detail::Bits(n), 0.0, 0, 0);
  rep.count = best;
  rep.nodes = budget.used;
  if (!ok) {
    if (!q.degrade_on_budget) throw ResourceError("katok_spanning: node budget exhausted");
    rep.direction = BoundDirection::upper;
    rep.budget_exhausted = true;
  }
  return rep;
}

// Nudges eps down by 1e-9 relative until no pairwise distance ties any of the
// given multiples of it. Ties would make ball-membership conventions (strict
// vs non-strict) observable, so counts are always taken at a tie-free scale.
inline double clear_ties(const DistMatrix& d, double eps, std::initializer_list<double> multiples,
                         bool* jittered = nullptr) {
  if (!(eps > 0.0)) throw DomainError("clear_ties: eps must be positive");
  double e = eps;
  for (int attempt = 0; attempt < 16; ++attempt) {
    bool tie = false;
    const double tol = 1e-12 * std::max(1.0, e);
    for (std::size_t i = 0; i < d.size() && !tie; ++i) {
      for (std::size_t j = 0; j < i && !tie; ++j) {
        const double v = d.at(i, j);
        for (double m : multiples) {
          if (std::abs(v - m * e) <= tol) {
            tie = true;
            break;
          }
        }
      }
    }
    if (!tie) return e;
    e *= (1.0 - 1e-9);
    if (jittered) *jittered = true;
  }
  throw DomainError("clear_ties: could not clear distance ties");
}

// The four counts of the sandwich cov(2e) <= r(e) <= s(e) <= cov(e), computed
// at a common (possibly jittered) scale.
struct ChainReport {
  double epsilon_used = 0.0;
  bool jittered = false;
  CountReport cov_2eps;
  CountReport spanning;
  CountReport separated;
  CountReport cov_eps;
};

inline ChainReport count_chain(const DistMatrix& d, double eps, const CountQuery& q) {
  ChainReport rep;
  const double e = clear_ties(d, eps, {1.0, 2.0}, &rep.jittered);
  rep.epsilon_used = e;
  rep.cov_2eps = min_cover(d, 2.0 * e, q);
  rep.spanning = min_spanning(d, e, q);
  rep.separated = max_separated(d, e, q);
  rep.cov_eps = min_cover(d, e, q);
  if (q.mode == SolveMode::exact && !rep.cov_2eps.budget_exhausted &&
      !rep.spanning.budget_exhausted && !rep.separated.budget_exhausted &&
      !rep.cov_eps.budget_exhausted) {
    const bool ok = rep.cov_2eps.count <= rep.spanning.count &&
                    rep.spanning.count <= rep.separated.count &&
                    rep.separated.count <= rep.cov_eps.count;
    if (!ok) {
      throw Error("count_chain: sandwich violated at eps=" + fmt17(e) + " (" +
                  std::to_string(rep.cov_2eps.count) + "," + std::to_string(rep.spanning.count) +
                  "," + std::to_string(rep.separated.count) + "," +
                  std::to_string(rep.cov_eps.count) + ")");
    }
  }
  return rep;
}

}  // namespace meandim
