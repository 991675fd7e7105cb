#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "doctest.h"

#include "meandim/common.hpp"
#include "meandim/group.hpp"
#include "meandim/hausdorff.hpp"
#include "meandim/metric.hpp"
#include "meandim/packing.hpp"

using namespace meandim;

namespace {

DistMatrix line_matrix(const std::vector<double>& xs) {
  return DistMatrix::from(xs.size(),
                          [&](std::size_t i, std::size_t j) { return std::abs(xs[i] - xs[j]); });
}

// Random metric: random symmetric entries closed under shortest paths.
DistMatrix random_metric(std::size_t n, Rng& rng) {
  DistMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) d.set(i, j, 0.05 + 0.95 * rng.uniform01());
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (i == k || j == k) continue;
        const double via = d.at(i, k) + d.at(k, j);
        if (via < d.at(i, j)) d.set(i, j, via);
      }
    }
  }
  return d;
}

// Scale clear of both eps and 2*eps ties so conventions are unobservable.
double clear_scale(const DistMatrix& d, Rng& rng, double lo, double hi) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double eps = rng.uniform(lo, hi);
    bool tie = false;
    for (std::size_t i = 0; i < d.size() && !tie; ++i) {
      for (std::size_t j = 0; j < i && !tie; ++j) {
        const double v = d.at(i, j);
        if (std::abs(v - eps) < 1e-9 || std::abs(v - 2.0 * eps) < 1e-9) tie = true;
      }
    }
    if (!tie) return eps;
  }
  throw DomainError("clear_scale: no tie-free scale found");
}

std::uint64_t brute_max_separated(const DistMatrix& d, double eps) {
  const std::size_t n = d.size();
  std::uint64_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!((mask >> i) & 1)) continue;
      for (std::size_t j = 0; j < i && ok; ++j) {
        if (((mask >> j) & 1) && d.at(i, j) <= eps) ok = false;
      }
    }
    if (ok) best = std::max<std::uint64_t>(best, __builtin_popcountll(mask));
  }
  return best;
}

std::uint64_t brute_min_spanning(const DistMatrix& d, double eps) {
  const std::size_t n = d.size();
  std::uint64_t best = n;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    bool covers = true;
    for (std::size_t u = 0; u < n && covers; ++u) {
      bool hit = false;
      for (std::size_t c = 0; c < n && !hit; ++c) {
        if (((mask >> c) & 1) && d.at(c, u) <= eps) hit = true;
      }
      if (!hit) covers = false;
    }
    if (covers) best = std::min<std::uint64_t>(best, __builtin_popcountll(mask));
  }
  return best;
}

// Minimum cover by parts of diameter < eps: DP over subsets, valid part masks
// precomputed. Independent of the library's lowest-point recursion.
std::uint64_t brute_min_cover(const DistMatrix& d, double eps) {
  const std::size_t n = d.size();
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<bool> valid(full + 1, false);
  for (std::size_t mask = 1; mask <= full; ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!((mask >> i) & 1)) continue;
      for (std::size_t j = 0; j < i && ok; ++j) {
        if (((mask >> j) & 1) && d.at(i, j) >= eps) ok = false;
      }
    }
    valid[mask] = ok;
  }
  std::vector<std::uint64_t> dp(full + 1, UINT64_MAX);
  dp[0] = 0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    const std::size_t low = mask & (~mask + 1);
    for (std::size_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
      if (!(sub & low) || !valid[sub]) continue;
      if (dp[mask ^ sub] != UINT64_MAX) dp[mask] = std::min(dp[mask], dp[mask ^ sub] + 1);
    }
  }
  return dp[full];
}

std::uint64_t brute_katok(const DistMatrix& d, const std::vector<double>& mass, double eps,
                          double delta) {
  const std::size_t n = d.size();
  std::uint64_t best = UINT64_MAX;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double covered = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t c = 0; c < n; ++c) {
        if (((mask >> c) & 1) && d.at(c, u) <= eps) {
          covered += mass[u];
          break;
        }
      }
    }
    if (covered > 1.0 - delta) best = std::min<std::uint64_t>(best, __builtin_popcountll(mask));
  }
  return best;
}

// Minimum of sum max(diam, floor)^s over partitions into parts of diameter
// < eps, by direct partition enumeration (first point joins a part or opens
// a new one).
double brute_hausdorff(const DistMatrix& d, double eps, double floor, double s) {
  const std::size_t n = d.size();
  std::vector<std::vector<std::size_t>> parts;
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t)> rec = [&](std::size_t p) {
    if (p == n) {
      double total = 0.0;
      for (const auto& part : parts) {
        double diam = 0.0;
        for (std::size_t a = 0; a < part.size(); ++a) {
          for (std::size_t b = 0; b < a; ++b) diam = std::max(diam, d.at(part[a], part[b]));
        }
        total += std::pow(std::max(diam, floor), s);
      }
      best = std::min(best, total);
      return;
    }
    // Index loop: the recursive calls push and pop deeper parts, which would
    // invalidate range-for iterators over the same vector.
    const std::size_t existing = parts.size();
    for (std::size_t pi = 0; pi < existing; ++pi) {
      bool fits = true;
      for (std::size_t m : parts[pi]) {
        if (d.at(m, p) >= eps) {
          fits = false;
          break;
        }
      }
      if (fits) {
        parts[pi].push_back(p);
        rec(p + 1);
        parts[pi].pop_back();
      }
    }
    parts.push_back({p});
    rec(p + 1);
    parts.pop_back();
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("box windows and window algebra") {
  CHECK(FiniteWindow::box(1, 3).size() == 3);
  CHECK(FiniteWindow::box(2, 2).size() == 4);
  CHECK(FiniteWindow::box(3, 2).size() == 8);

  const FiniteWindow f = FiniteWindow::box(1, 2);
  const FiniteWindow p = window_product(f, f);
  CHECK(p.size() == 3);
  CHECK(p.contains({2}));
  CHECK_FALSE(p.contains({3}));

  const FiniteWindow t = translate({-1}, f);
  CHECK(t.contains({-1}));
  CHECK(t.contains({0}));
  const FiniteWindow inv = inverse(t);
  CHECK(inv.contains({1}));
  CHECK(inv.contains({0}));

  CHECK(boundary_ratio(FiniteWindow::box(1, 3), {1}) == doctest::Approx(1.0 / 3.0));
  CHECK(boundary_ratio(FiniteWindow::box(2, 2), {1, 0}) == doctest::Approx(0.5));
  CHECK(boundary_ratio(FiniteWindow::box(1, 4), {0}) == 0.0);

  CHECK_THROWS_AS(FiniteWindow(std::vector<GroupElement>{}), DomainError);
  CHECK_THROWS_AS(window_product(FiniteWindow::box(1, 2), FiniteWindow::box(2, 2)), DomainError);
}

TEST_CASE("window sequences and the tempered witness") {
  const FolnerSequence boxes = FolnerSequence::boxes(1, 5);
  CHECK(boxes.window(3).size() == 3);
  CHECK_THROWS_AS(boxes.window(6), DomainError);
  CHECK_THROWS_AS(boxes.window(0), DomainError);

  const FolnerSequence ex = FolnerSequence::explicit_list(
      {FiniteWindow::box(1, 1), FiniteWindow::box(1, 3)});
  CHECK(ex.n_max() == 2);
  CHECK(ex.window(2).size() == 3);

  CHECK(check_tempered(FolnerSequence::boxes(1, 3), 3) == doctest::Approx(4.0 / 3.0));
  CHECK(check_tempered(FolnerSequence::boxes(2, 2), 2) == doctest::Approx(1.0));
}

TEST_CASE("scale transforms: values, validation, exponents") {
  const MetricTransform h = MetricTransform::hybrid(0.5, 0.1);
  CHECK(h(0.04) == doctest::Approx(0.063245553203367587).epsilon(1e-14));
  CHECK(h(0.2) == 0.2);
  CHECK(h(0.1) == doctest::Approx(0.1));
  CHECK_THROWS_AS(MetricTransform::hybrid(1.2, 0.1), TransformError);
  CHECK_THROWS_AS(MetricTransform::hybrid(0.5, 0.0), TransformError);

  CHECK_NOTHROW(validate_transform(MetricTransform::power(0.5), 1.0));
  CHECK_NOTHROW(validate_transform(MetricTransform::power(1.0), 1.0));
  CHECK_THROWS_AS(validate_transform(MetricTransform::power(1.3), 1.0), TransformError);
  CHECK_NOTHROW(validate_transform(h, 0.9));
  CHECK_NOTHROW(validate_transform(MetricTransform::log_power(0.4), 0.9));

  const MetricTransform tab =
      MetricTransform::table({{0.0, 0.0}, {0.5, 0.25}, {1.0, 0.5}});
  CHECK(tab(0.25) == doctest::Approx(0.125));
  CHECK(tab(2.0) == 0.5);
  CHECK_NOTHROW(validate_transform(tab, 1.0));
  CHECK_THROWS_AS(MetricTransform::table({{0.1, 0.1}, {1.0, 0.5}}), TransformError);
  CHECK_THROWS_AS(MetricTransform::table({{0.0, 0.0}}), TransformError);

  double k = 0.0;
  CHECK(MetricTransform::power(0.7).closed_form_exponent(k));
  CHECK(k == 0.7);
  CHECK_FALSE(tab.closed_form_exponent(k));

  const ExponentEstimate ep = exponent_range(MetricTransform::power(0.7));
  CHECK(ep.k_min == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(ep.k_max == doctest::Approx(0.7).epsilon(1e-9));
  CHECK_FALSE(ep.clamped);

  const ExponentEstimate el = exponent_range(MetricTransform::log_power(0.4));
  CHECK(el.k_min == doctest::Approx(0.4).epsilon(0.05));
  CHECK(el.k_max == doctest::Approx(0.4).epsilon(0.05));
  CHECK(std::abs(el.k_max - 0.4) <= 0.02);

  const ExponentEstimate eh = exponent_range(MetricTransform::hybrid(0.5, 0.1));
  CHECK(eh.k_min >= 0.5);
  CHECK(eh.k_max <= 1.0);

  CHECK(rescale_factor_for_transforms(3.0) == doctest::Approx(1.0 / (3.0 + 1e-9)));
  CHECK(rescale_factor_for_transforms(0.5) == 1.0);
}

TEST_CASE("metric validation and uniform distance") {
  Rng rng(11);
  const DistMatrix d = random_metric(9, rng);
  MetricSpec spec;
  spec.eval = [&](std::size_t i, std::size_t j) { return d.at(i, j); };
  spec.diameter_bound = d.max_value();
  Rng check_rng(12);
  CHECK_NOTHROW(validate_metric(spec, 9, check_rng));

  MetricSpec bad = spec;
  bad.eval = [&](std::size_t i, std::size_t j) {
    return d.at(i, j) + (i > j ? 0.01 : 0.0);
  };
  Rng bad_rng(13);
  CHECK_THROWS_AS(validate_metric(bad, 9, bad_rng), DomainError);

  const DistMatrix dz = d.map([](double v) { return std::sqrt(v); });
  double manual = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      manual = std::max(manual, std::abs(d.at(i, j) - dz.at(i, j)));
    }
  }
  CHECK(uniform_distance_lower_bound(d, dz) == doctest::Approx(manual));
}

TEST_CASE("counts on a hand-checked line") {
  const DistMatrix d = line_matrix({0.0, 1.0, 2.0, 3.0});
  CountQuery q;
  const double eps = 1.4;
  CHECK(max_separated(d, eps, q).count == 2);
  CHECK(min_spanning(d, eps, q).count == 2);
  CHECK(min_cover(d, eps, q).count == 2);
  CHECK(min_cover(d, 2.0 * eps, q).count == 2);

  const ChainReport chain = count_chain(d, eps, q);
  CHECK(chain.cov_2eps.count == 2);
  CHECK(chain.spanning.count == 2);
  CHECK(chain.separated.count == 2);
  CHECK(chain.cov_eps.count == 2);
  CHECK_FALSE(chain.jittered);

  WeightedPointSet mu;
  mu.mass = {0.25, 0.25, 0.25, 0.25};
  CHECK(katok_spanning(d, mu, eps, 0.3, q).count == 1);
  CHECK(katok_spanning(d, mu, eps, 0.2, q).count == 2);
}

TEST_CASE("exact solvers match subset brute force") {
  CountQuery q;
  for (std::uint64_t t = 0; t < 25; ++t) {
    Rng rng = Rng::derive(99, t);
    const std::size_t n = 4 + rng.below(9);
    const DistMatrix d = random_metric(n, rng);
    for (int k = 0; k < 3; ++k) {
      const double eps = clear_scale(d, rng, 0.05, 1.05 * d.max_value());
      CAPTURE(t);
      CAPTURE(n);
      CAPTURE(eps);
      const CountReport s = max_separated(d, eps, q);
      const CountReport r = min_spanning(d, eps, q);
      const CountReport cov = min_cover(d, eps, q);
      CHECK(s.direction == BoundDirection::exact);
      CHECK(s.count == brute_max_separated(d, eps));
      CHECK(r.count == brute_min_spanning(d, eps));
      CHECK(cov.count == brute_min_cover(d, eps));

      std::vector<double> mass(n);
      double total = 0.0;
      for (auto& m : mass) {
        m = 0.1 + rng.uniform01();
        total += m;
      }
      for (auto& m : mass) m /= total;
      double fix = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) fix += mass[i];
      mass[n - 1] = 1.0 - fix;
      const double delta = rng.uniform(0.15, 0.7);
      WeightedPointSet mu;
      mu.mass = mass;
      if (n <= 10) {
        CHECK(katok_spanning(d, mu, eps, delta, q).count == brute_katok(d, mass, eps, delta));
      }
      CHECK(katok_spanning(d, mu, eps, delta, q).count <= r.count);
    }
  }
}

TEST_CASE("greedy solvers bound the optimum from the right side") {
  CountQuery exact, greedy;
  greedy.mode = SolveMode::greedy;
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng = Rng::derive(123, t);
    const std::size_t n = 5 + rng.below(8);
    const DistMatrix d = random_metric(n, rng);
    const double eps = clear_scale(d, rng, 0.05, 1.05 * d.max_value());
    const CountReport gs = max_separated(d, eps, greedy);
    const CountReport gr = min_spanning(d, eps, greedy);
    const CountReport gc = min_cover(d, eps, greedy);
    CHECK(gs.direction == BoundDirection::lower);
    CHECK(gr.direction == BoundDirection::upper);
    CHECK(gc.direction == BoundDirection::upper);
    CHECK(gs.count <= max_separated(d, eps, exact).count);
    CHECK(gr.count >= min_spanning(d, eps, exact).count);
    CHECK(gc.count >= min_cover(d, eps, exact).count);
  }
}

TEST_CASE("line order sweeps are exact") {
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng = Rng::derive(321, t);
    const std::size_t n = 5 + rng.below(8);
    std::vector<double> xs;
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(x);
      x += rng.uniform(0.05, 1.0);
    }
    const DistMatrix d = line_matrix(xs);
    const double eps = clear_scale(d, rng, 0.05, 1.05 * d.max_value());
    CountQuery line;
    line.line_order = true;
    CHECK(max_separated(d, eps, line).count == brute_max_separated(d, eps));
    CHECK(max_separated(d, eps, line).direction == BoundDirection::exact);
    CHECK(min_spanning(d, eps, line).count == brute_min_spanning(d, eps));
    CHECK(min_cover(d, eps, line).count == brute_min_cover(d, eps));
    CHECK(max_separated(d, eps, line).nodes == 0);
  }
}

TEST_CASE("budgets degrade or throw as requested") {
  Rng rng(55);
  const DistMatrix d = random_metric(12, rng);
  const double eps = clear_scale(d, rng, 0.2, 0.6);

  CountQuery starved;
  starved.budgets.solver_nodes = 0;
  const CountReport s = max_separated(d, eps, starved);
  CHECK(s.budget_exhausted);
  CHECK(s.direction == BoundDirection::lower);
  const CountReport r = min_spanning(d, eps, starved);
  CHECK(r.budget_exhausted);
  CHECK(r.direction == BoundDirection::upper);

  CountQuery strict = starved;
  strict.degrade_on_budget = false;
  CHECK_THROWS_AS(max_separated(d, eps, strict), ResourceError);
  CHECK_THROWS_AS(min_spanning(d, eps, strict), ResourceError);

  CountQuery tiny;
  tiny.budgets.exact_points = 4;
  CHECK_THROWS_AS(max_separated(d, eps, tiny), ResourceError);
}

TEST_CASE("tie clearing nudges the scale down") {
  const DistMatrix d = line_matrix({0.0, 0.3, 0.9});
  bool jit = false;
  const double e1 = clear_ties(d, 0.3, {1.0}, &jit);
  CHECK(jit);
  CHECK(e1 < 0.3);
  CHECK(e1 > 0.3 * (1.0 - 1e-7));

  jit = false;
  const double e2 = clear_ties(d, 0.45, {1.0, 2.0}, &jit);  // 2*0.45 ties 0.9
  CHECK(jit);
  CHECK(e2 < 0.45);

  jit = false;
  CHECK(clear_ties(d, 0.25, {1.0, 2.0}, &jit) == 0.25);
  CHECK_FALSE(jit);
  CHECK_THROWS_AS(clear_ties(d, 0.0, {1.0}), DomainError);
}

TEST_CASE("chain sandwich holds on random instances") {
  CountQuery q;
  for (std::uint64_t t = 0; t < 30; ++t) {
    Rng rng = Rng::derive(777, t);
    const std::size_t n = 4 + rng.below(10);
    const DistMatrix d = random_metric(n, rng);
    const double eps = rng.uniform(0.05, 1.05 * d.max_value());
    const ChainReport chain = count_chain(d, eps, q);
    CHECK(chain.cov_2eps.count <= chain.spanning.count);
    CHECK(chain.spanning.count <= chain.separated.count);
    CHECK(chain.separated.count <= chain.cov_eps.count);
    CHECK(chain.epsilon_used <= eps);
    CHECK(chain.epsilon_used > eps * (1.0 - 1e-6));
  }
}

TEST_CASE("scale-limited measure matches partition enumeration") {
  for (std::uint64_t t = 0; t < 12; ++t) {
    Rng rng = Rng::derive(4242, t);
    const std::size_t n = 3 + rng.below(6);
    const DistMatrix d = random_metric(n, rng);
    const double eps = clear_scale(d, rng, 0.1, 1.05 * d.max_value());
    for (double s : {0.0, 0.7, 1.3}) {
      for (double floor : {0.0, 0.05}) {
        HausdorffQuery q;
        q.epsilon = eps;
        q.floor = floor;
        const MeasureValue v = hausdorff_measure_at_scale(d, s, q);
        CHECK(v.direction == BoundDirection::exact);
        CHECK(v.value == doctest::Approx(brute_hausdorff(d, eps, floor, s)).epsilon(1e-12));

        HausdorffQuery g = q;
        g.mode = SolveMode::greedy;
        const MeasureValue gv = hausdorff_measure_at_scale(d, s, g);
        CHECK(gv.direction == BoundDirection::upper);
        CHECK(gv.value >= v.value - 1e-12);

        if (n <= 10) {
          const MeasureValue bv = ball_measure_at_scale(d, s, q);
          CHECK(bv.value >= v.value - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("two-cluster dimension at scale") {
  const DistMatrix d = line_matrix({0.0, 0.01, 1.0, 1.01});
  HausdorffQuery q;
  q.epsilon = 0.1;
  q.floor = 0.1;

  CHECK(hausdorff_measure_at_scale(d, 0.0, q).value == doctest::Approx(2.0));
  CHECK(hausdorff_measure_at_scale(d, 1.0, q).value == doctest::Approx(0.2));
  for (double s : {0.2, 0.5, 0.9}) {
    CHECK(hausdorff_measure_at_scale(d, s, q).value ==
          doctest::Approx(2.0 * std::pow(0.1, s)).epsilon(1e-13));
  }

  const DimAtScale dim = dim_at_scale(d, q);
  const double expected = std::log(2.0) / std::log(10.0);
  CHECK_FALSE(dim.capped);
  CHECK_FALSE(dim.empty_sup);
  CHECK(dim.s <= expected + 1e-12);
  CHECK(dim.s >= expected - dim.bisection_width - 1e-12);

  const DimAtScale ball = ball_dim_at_scale(d, q);
  CHECK(ball.s >= dim.s - q.bisection_width);
}

TEST_CASE("dimension bisection edge cases") {
  const DistMatrix d = line_matrix({0.0, 0.3, 0.8});
  HausdorffQuery q;
  q.epsilon = 0.5;
  q.floor = 0.0;

  HausdorffQuery empty = q;
  empty.phi = 1e9;
  const DimAtScale de = dim_at_scale(d, empty);
  CHECK(de.empty_sup);
  CHECK(de.s == 0.0);

  HausdorffQuery capped = q;
  capped.floor = 0.5;
  capped.phi = 0.1;
  capped.s_cap = 2.0;
  const DimAtScale dc = dim_at_scale(d, capped);
  CHECK(dc.capped);
  CHECK(dc.s == 2.0);

  const DistMatrix single(1);
  HausdorffQuery one;
  one.epsilon = 0.5;
  CHECK(hausdorff_measure_at_scale(single, 0.0, one).value == doctest::Approx(1.0));
  CHECK(hausdorff_measure_at_scale(single, 2.0, one).value == 0.0);
}

TEST_CASE("snowflake identity for scale-limited measures") {
  Rng rng(31);
  const DistMatrix d = random_metric(8, rng);
  const double a = 0.5, eta = 0.3, delta = 0.02;
  const DistMatrix da = d.map([&](double v) { return std::pow(v, a); });
  for (double s : {0.3, 0.9, 1.6}) {
    HausdorffQuery q1;
    q1.epsilon = std::pow(eta, a);
    q1.floor = std::pow(delta, a);
    HausdorffQuery q2;
    q2.epsilon = eta;
    q2.floor = delta;
    const double lhs = hausdorff_measure_at_scale(da, s, q1).value;
    const double rhs = hausdorff_measure_at_scale(d, a * s, q2).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}
