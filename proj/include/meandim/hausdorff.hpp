#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "meandim/common.hpp"
#include "meandim/metric.hpp"
#include "meandim/packing.hpp"

namespace meandim {

// Scale-limited Hausdorff data on a finite surrogate. Covers may use
// arbitrary subsets of diameter strictly below eps; on a finite set the
// infimum is attained by a partition. Each part is charged
// max(diam, floor)^s, with 0^0 = 1, so a positive floor keeps finite
// surrogates from collapsing to dimension zero.
struct HausdorffQuery {
  double epsilon = 0.0;
  double floor = 0.0;      // cell floor delta_f, 0 = faithful mode
  double phi = 1.0;        // mass threshold for the dimension sup
  SolveMode mode = SolveMode::exact;
  Budgets budgets;
  double s_cap = 64.0;
  double bisection_width = 1e-6;
};

struct MeasureValue {
  double value = 0.0;
  BoundDirection direction = BoundDirection::exact;
};

inline double effective_weight(double diam, double floor, double s) {
  return std::pow(std::max(diam, floor), s);
}

// H^s_eps(E): minimal total weight of a cover by sets of diameter < eps.
inline MeasureValue hausdorff_measure_at_scale(const DistMatrix& d, double s,
                                               const HausdorffQuery& q) {
  if (!(q.epsilon > 0.0)) throw DomainError("hausdorff measure: eps must be positive");
  if (s < 0.0) throw DomainError("hausdorff measure: s must be nonnegative");
  if (q.floor < 0.0) throw DomainError("hausdorff measure: floor must be nonnegative");
  MeasureValue out;
  if (q.mode == SolveMode::exact && d.size() <= 20) {
    out.value = detail::partition_cover_dp(
        d, q.epsilon,
        [&](double diam, std::size_t) { return effective_weight(diam, q.floor, s); },
        q.budgets.solver_nodes);
    return out;
  }
  // Greedy sweep partition: upper bound on the infimum.
  const std::size_t n = d.size();
  std::vector<bool> assigned(n, false);
  double total = 0.0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (assigned[seed]) continue;
    std::vector<std::size_t> part{seed};
    assigned[seed] = true;
    double diam = 0.0;
    for (std::size_t j = seed + 1; j < n; ++j) {
      if (assigned[j]) continue;
      bool fits = true;
      double nd = diam;
      for (std::size_t p : part) {
        const double v = d.at(j, p);
        if (v >= q.epsilon) {
          fits = false;
          break;
        }
        nd = std::max(nd, v);
      }
      if (fits) {
        part.push_back(j);
        assigned[j] = true;
        diam = nd;
      }
    }
    total += effective_weight(diam, q.floor, s);
  }
  out.value = total;
  out.direction = BoundDirection::upper;
  return out;
}

struct DimAtScale {
  double s = 0.0;
  double bisection_width = 0.0;
  bool capped = false;     // hit the s cap: measure never fell below phi
  bool empty_sup = false;  // no s >= 0 reaches phi
  BoundDirection direction = BoundDirection::exact;
};

namespace detail {

template <typename MeasureFn>
DimAtScale dim_by_bisection(MeasureFn&& measure, double phi, double s_cap, double width) {
  DimAtScale out;
  out.bisection_width = width;
  if (!(measure(0.0) >= phi)) {
    out.empty_sup = true;
    return out;
  }
  if (measure(s_cap) >= phi) {
    out.s = s_cap;
    out.capped = true;
    return out;
  }
  double lo = 0.0, hi = s_cap;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (measure(mid) >= phi) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.s = lo;
  return out;
}

}  // namespace detail

// dim_H(E, d, eps, phi) = sup{s >= 0 : H^s_eps >= phi} by bisection; the
// measure is continuous and nonincreasing in s, so the crossing is unique.
inline DimAtScale dim_at_scale(const DistMatrix& d, const HausdorffQuery& q) {
  BoundDirection dir = BoundDirection::exact;
  auto measure = [&](double s) {
    const MeasureValue v = hausdorff_measure_at_scale(d, s, q);
    if (v.direction != BoundDirection::exact) dir = v.direction;
    return v.value;
  };
  DimAtScale out = detail::dim_by_bisection(measure, q.phi, q.s_cap, q.bisection_width);
  out.direction = dir;
  return out;
}

// Ball-cover variant: covers by balls centered at points of E with set
// diameter at most eps (non-strict). Fewer covers are available than with
// arbitrary subsets, so the dimension can only grow.
inline MeasureValue ball_measure_at_scale(const DistMatrix& d, double s, const HausdorffQuery& q) {
  if (!(q.epsilon > 0.0)) throw DomainError("ball measure: eps must be positive");
  const std::size_t n = d.size();
  if (n > 16) throw ResourceError("ball measure: exact variant capped at 16 points");
  // Candidate sets: for each center, the nested balls over its sorted
  // distance values, kept while the member diameter stays <= eps.
  std::map<std::vector<std::uint32_t>, double> candidates;  // member list -> diam
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::pair<double, std::size_t>> by_dist;
    for (std::size_t j = 0; j < n; ++j) by_dist.emplace_back(d.at(c, j), j);
    std::sort(by_dist.begin(), by_dist.end());
    std::vector<std::size_t> members;
    for (const auto& [dist, j] : by_dist) {
      members.push_back(j);
      double diam = 0.0;
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) diam = std::max(diam, d.at(members[a], members[b]));
      }
      if (diam > q.epsilon) break;
      std::vector<std::uint32_t> key;
      for (std::size_t m : members) key.push_back(static_cast<std::uint32_t>(m));
      std::sort(key.begin(), key.end());
      candidates.emplace(std::move(key), diam);
    }
  }
  std::vector<std::uint32_t> masks;
  std::vector<double> diams;
  for (const auto& [key, diam] : candidates) {
    std::uint32_t mask = 0;
    for (auto m : key) mask |= 1u << m;
    masks.push_back(mask);
    diams.push_back(diam);
  }
  const std::uint32_t full = (1u << n) - 1;
  std::vector<double> cost(static_cast<std::size_t>(full) + 1,
                           std::numeric_limits<double>::infinity());
  cost[0] = 0.0;
  for (std::uint32_t covered = 0; covered < full; ++covered) {
    if (!std::isfinite(cost[covered])) continue;
    std::uint32_t p = 0;
    while ((covered >> p) & 1u) ++p;
    for (std::size_t k = 0; k < masks.size(); ++k) {
      if (!((masks[k] >> p) & 1u)) continue;
      const std::uint32_t next = covered | masks[k];
      const double w = effective_weight(diams[k], q.floor, s);
      cost[next] = std::min(cost[next], cost[covered] + w);
    }
  }
  MeasureValue out;
  out.value = cost[full];
  if (!std::isfinite(out.value)) throw DomainError("ball measure: set not coverable");
  return out;
}

inline DimAtScale ball_dim_at_scale(const DistMatrix& d, const HausdorffQuery& q) {
  auto measure = [&](double s) { return ball_measure_at_scale(d, s, q).value; };
  return detail::dim_by_bisection(measure, q.phi, q.s_cap, q.bisection_width);
}

}  // namespace meandim
