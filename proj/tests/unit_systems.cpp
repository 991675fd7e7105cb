#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"

#include "meandim/config.hpp"
#include "meandim/estimate.hpp"
#include "meandim/report.hpp"
#include "meandim/runner.hpp"
#include "meandim/systems.hpp"
#include "meandim/verify.hpp"

using namespace meandim;

namespace {

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

AlphabetSpec line_alphabet(const std::vector<double>& xs) {
  return AlphabetSpec::explicit_matrix(DistMatrix::from(
      xs.size(), [&](std::size_t i, std::size_t j) { return std::abs(xs[i] - xs[j]); }));
}

ScaleGrid make_grid(double from, double to, std::size_t count, int n_max) {
  ScaleGrid g;
  g.epsilons = ScaleGrid::geometric(from, to, count);
  g.n_min = 1;
  g.n_max = n_max;
  return g;
}

}  // namespace

TEST_CASE("folded weights at lambda one half") {
  const WeightFamily w(0.5);
  CHECK(w.total(1) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(w.total(2) == doctest::Approx(9.0).epsilon(1e-15));

  const std::vector<double> f1 = w.folded_axis(1);
  REQUIRE(f1.size() == 1);
  CHECK(f1[0] == doctest::Approx(3.0).epsilon(1e-15));

  const std::vector<double> f2 = w.folded_axis(2);
  REQUIRE(f2.size() == 2);
  CHECK(f2[0] == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(f2[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  const std::vector<double> f5 = w.folded_axis(5);
  double sum = 0.0;
  for (double v : f5) sum += v;
  CHECK(sum == doctest::Approx(3.0).epsilon(1e-12));

  CHECK(w.weight({3}) == doctest::Approx(0.125));
  CHECK(w.weight({-3}) == doctest::Approx(0.125));
  CHECK(w.weight({33}) == 0.0);
  CHECK(WeightFamily::radius_for_tail(0.5, 1, 1e-6) == 21);
  CHECK(WeightFamily(0.5, 21).tail(1) <= 1e-6);
  CHECK_THROWS_AS(WeightFamily(1.0), ConfigError);
  CHECK_THROWS_AS(WeightFamily(0.0), ConfigError);
}

TEST_CASE("alphabet kinds") {
  const AlphabetSpec grid = AlphabetSpec::interval_grid(0.25);
  CHECK(grid.size() == 5);
  CHECK(grid.rho(0, 4) == doctest::Approx(1.0));
  CHECK(grid.rho(1, 2) == doctest::Approx(0.25));
  CHECK(grid.diameter() == doctest::Approx(1.0));
  CHECK(grid.resolution() == doctest::Approx(0.25));
  CHECK(grid.line_order());
  CHECK_THROWS_AS(AlphabetSpec::interval_grid(0.3), ConfigError);
  CHECK_THROWS_AS(AlphabetSpec::interval_grid(0.6), ConfigError);

  const AlphabetSpec circle = AlphabetSpec::circle_grid(4);
  CHECK(circle.size() == 4);
  CHECK(circle.rho(0, 1) == doctest::Approx(0.25));
  CHECK(circle.rho(0, 2) == doctest::Approx(0.5));
  CHECK(circle.rho(0, 3) == doctest::Approx(0.25));
  CHECK(circle.diameter() == doctest::Approx(0.5));
  CHECK_FALSE(circle.line_order());

  const AlphabetSpec line = line_alphabet({0.0, 0.4, 1.0});
  CHECK(line.size() == 3);
  CHECK(line.rho(0, 2) == doctest::Approx(1.0));
  CHECK_FALSE(line.line_order());
  CHECK_THROWS_AS(AlphabetSpec::explicit_matrix(DistMatrix(1)), ConfigError);
  CHECK_THROWS_AS(AlphabetSpec::explicit_matrix(DistMatrix::from(
                      3,
                      [](std::size_t i, std::size_t j) {
                        if (i == j) return 0.0;
                        return (i + j == 2) ? 1.0 : 0.2;  // 1.0 > 0.2 + 0.2
                      })),
                  ConfigError);
}

TEST_CASE("shift systems: enumeration, action, distances") {
  const AlphabetSpec a5 = AlphabetSpec::interval_grid(0.25);
  const ShiftSystem sys(a5, WeightFamily(0.5), 1, 2);
  CHECK(sys.cells() == 2);
  CHECK(sys.raw_space_size() == doctest::Approx(25.0));
  CHECK(sys.is_full_shift());
  CHECK(sys.enumerate(100).size() == 25);

  const ShiftSystem s3(a5, WeightFamily(0.5), 1, 3);
  const Config x3 = {0, 1, 2};
  CHECK(s3.act({1}, x3) == Config{1, 2, 0});
  CHECK(s3.act({3}, x3) == x3);
  CHECK(s3.act({-1}, x3) == Config{2, 0, 1});

  const ShiftSystem s1(a5, WeightFamily(0.5), 1, 1);
  CHECK(s1.folded_weight_identity() == doctest::Approx(3.0));
  CHECK(s1.base_distance({0}, {4}) == doctest::Approx(3.0));
  CHECK(s1.diameter_bound() == doctest::Approx(3.0));
  CHECK(s1.resolution_floor() == doctest::Approx(0.25));

  const Config x = {0, 0}, y = {1, 3};
  CHECK(sys.base_distance(x, y) == doctest::Approx(17.0 / 12.0).epsilon(1e-14));
  const FiniteWindow f2 = FiniteWindow::box(1, 2);
  CHECK(sys.bowen(x, y, f2) == doctest::Approx(19.0 / 12.0).epsilon(1e-14));

  const std::vector<Config> pts = sys.enumerate(100);
  const DistMatrix bm = sys.bowen_matrix(pts, f2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      CHECK(bm.at(i, j) == doctest::Approx(sys.bowen(pts[i], pts[j], f2)).epsilon(1e-14));
    }
  }

  const ShiftSystem big(AlphabetSpec::interval_grid(1.0 / 1024.0), WeightFamily(0.5), 1, 4);
  CHECK_THROWS_AS(big.enumerate(1000), ResourceError);
}

TEST_CASE("subshift with a forbidden adjacent pair") {
  const AlphabetSpec two = line_alphabet({0.0, 1.0});
  ForbiddenPattern adjacent_ones;
  adjacent_ones.offsets = {{0}, {1}};
  adjacent_ones.symbols = {1, 1};
  const ShiftSystem gm(two, WeightFamily(0.5), 1, 3, Boundary::periodic, {adjacent_ones});
  CHECK_FALSE(gm.is_full_shift());

  const std::vector<Config> pts = gm.enumerate(100);
  CHECK(pts.size() == 4);  // 000, 001, 010, 100; 101 closes the pair around the seam
  for (const Config& c : pts) CHECK(gm.admissible(c));
  CHECK_FALSE(gm.admissible({1, 0, 1}));
  CHECK_FALSE(gm.admissible({1, 1, 0}));

  Rng rng(5);
  SampleStats stats;
  const std::vector<Config> sampled = gm.sample(40, rng, &stats);
  CHECK(sampled.size() == 40);
  CHECK(stats.rejections > 0);
  for (const Config& c : sampled) CHECK(gm.admissible(c));
}

TEST_CASE("strict boundary windows") {
  const AlphabetSpec a5 = AlphabetSpec::interval_grid(0.25);
  const ShiftSystem strict(a5, WeightFamily(0.5), 1, 2, Boundary::strict);
  CHECK(strict.folded_weight_identity() == doctest::Approx(1.0));
  CHECK(strict.total_weight() == doctest::Approx(1.5));
  CHECK(strict.base_distance({0, 0}, {4, 4}) == doctest::Approx(1.5));
  CHECK_THROWS_AS(strict.act({1}, Config{0, 0}), DomainError);
  CHECK_THROWS_AS(strict.bowen(Config{0, 0}, Config{1, 1}, FiniteWindow::box(1, 2)), DomainError);
}

TEST_CASE("sampling is deterministic and counts duplicates") {
  const AlphabetSpec two = line_alphabet({0.0, 1.0});
  const ShiftSystem tiny(two, WeightFamily(0.5), 1, 1);
  Rng r1(42), r2(42);
  SampleStats st1, st2;
  const auto s1 = tiny.sample(50, r1, &st1);
  const auto s2 = tiny.sample(50, r2, &st2);
  CHECK(s1 == s2);
  CHECK(st1.duplicates == st2.duplicates);
  CHECK(st1.duplicates >= 48);

  const ShiftSystem five(AlphabetSpec::interval_grid(0.25), WeightFamily(0.5), 1, 3);
  Rng r3(42), r4(43);
  CHECK(five.sample(20, r3) != five.sample(20, r4));
}

TEST_CASE("scale grids") {
  const std::vector<double> eps = ScaleGrid::geometric(0.9, 0.5, 5);
  REQUIRE(eps.size() == 5);
  CHECK(eps.front() == 0.9);
  CHECK(eps.back() == 0.5);
  for (std::size_t i = 1; i < eps.size(); ++i) CHECK(eps[i] < eps[i - 1]);
  CHECK_THROWS_AS(ScaleGrid::geometric(0.5, 0.9, 5), ConfigError);
  CHECK_THROWS_AS(ScaleGrid::geometric(0.9, 0.5, 1), ConfigError);

  const ScaleGrid good = make_grid(0.9, 0.5, 5, 4);
  CHECK_NOTHROW(good.validate(0.25));
  CHECK_NOTHROW(good.validate(0.0));

  ScaleGrid bad = good;
  bad.epsilons.resize(3);
  CHECK_THROWS_AS(bad.validate(0.0), ConfigError);
  bad = good;
  bad.n_max = 3;
  CHECK_THROWS_AS(bad.validate(0.0), ConfigError);
  bad = good;
  CHECK_THROWS_AS(bad.validate(0.3), ConfigError);  // 0.5 < 2 * 0.3
  bad = good;
  bad.tail_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(0.0), ConfigError);
  bad = good;
  bad.epsilons[2] = bad.epsilons[1];
  CHECK_THROWS_AS(bad.validate(0.0), ConfigError);
  bad = good;
  bad.epsilons[0] = 1.0;
  CHECK_THROWS_AS(bad.validate(0.0), ConfigError);
}

TEST_CASE("frozen interval-grid counts at the calibrated scales") {
  const AlphabetSpec a = AlphabetSpec::interval_grid(1.0 / 1024.0);
  const ShiftSystem sys(a, WeightFamily(0.5), 1, 1);
  const ShiftCellSource src(sys, FolnerSequence::boxes(1, 5));
  const ScaleGrid grid = make_grid(0.0625, 0.015625, 8, 5);
  EstimatorOptions opt;

  const std::vector<CountCell> cells = detail::count_cells_for_window(src, grid, opt, 1);
  const std::uint64_t want[] = {47, 57, 69, 86, 103, 129, 147, 171};
  REQUIRE(cells.size() == 8);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CAPTURE(i);
    CHECK(cells[i].s.count == want[i]);
    CHECK(cells[i].enumerated);
    CHECK(cells[i].points == 1025);
    CHECK(cells[i].s.direction == BoundDirection::exact);
    CHECK(cells[i].r.count <= cells[i].s.count);
    CHECK(cells[i].s.count <= cells[i].cov.count);
    CHECK(cells[i].epsilon_used <= cells[i].epsilon);
  }

  CountQuery q;
  q.line_order = a.line_order();
  const MinkowskiReport mink = minkowski_dim_estimate(a.matrix(), grid.epsilons, q);
  const std::uint64_t want_mink[] = {17, 20, 24, 29, 36, 43, 52, 65};
  REQUIRE(mink.scales.size() == 8);
  for (std::size_t i = 0; i < mink.scales.size(); ++i) {
    CAPTURE(i);
    CHECK(mink.scales[i].count == want_mink[i]);
  }
  CHECK_FALSE(mink.any_nonexact);
  CHECK(mink.fit.slope > 0.95);
  CHECK(mink.fit.slope < 0.99);
}

TEST_CASE("transform commutes with counting and doubles the slope") {
  Rng rng(17);
  const DistMatrix base = random_metric(40, rng);
  std::vector<std::size_t> perm(40);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i + 1) % perm.size();
  const PermutationCellSource src(base, perm, FolnerSequence::boxes(1, 4));
  const ScaleGrid grid = make_grid(0.7, 0.2, 6, 4);
  EstimatorOptions opt;

  const DimensionReport plain = run_metric_estimate(src, grid, opt, 1);

  const MetricTransform t = MetricTransform::power(0.5);
  const double rescale = rescale_factor_for_transforms(src.diameter_bound());
  const TransformedCellSource tsrc(src, t, rescale);
  ScaleGrid mapped = grid;
  for (double& e : mapped.epsilons) e = tsrc.map_scale(e);
  const DimensionReport half = run_metric_estimate(tsrc, mapped, opt, 1);

  REQUIRE(plain.cells.size() == half.cells.size());
  for (std::size_t i = 0; i < plain.cells.size(); ++i) {
    CAPTURE(i);
    CHECK(plain.cells[i].n == half.cells[i].n);
    CHECK(plain.cells[i].s.count == half.cells[i].s.count);
    CHECK(plain.cells[i].r.count == half.cells[i].r.count);
    CHECK(plain.cells[i].cov.count == half.cells[i].cov.count);
  }
  REQUIRE(plain.s_est.valid);
  REQUIRE(half.s_est.valid);
  CHECK(half.s_est.upper_fit.slope ==
        doctest::Approx(2.0 * plain.s_est.upper_fit.slope).epsilon(1e-9));
  CHECK(half.cov_est.upper_fit.slope ==
        doctest::Approx(2.0 * plain.cov_est.upper_fit.slope).epsilon(1e-9));
  CHECK(half.r_est.lower_fit.slope ==
        doctest::Approx(2.0 * plain.r_est.lower_fit.slope).epsilon(1e-9));
}

TEST_CASE("scale-limited dimension per cell stays below the cover ratio") {
  const AlphabetSpec a4 = line_alphabet({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
  const ShiftSystem sys(a4, WeightFamily(0.5), 1, 1);
  const ShiftCellSource src(sys, FolnerSequence::boxes(1, 4));
  const ScaleGrid grid = make_grid(0.95, 0.7, 5, 4);
  EstimatorOptions opt;
  opt.sample_count = 400;

  const HausdorffEstimate h = mdim_hausdorff_estimate(src, grid, 0.05, 1.0, opt);
  REQUIRE(h.cells.size() == 20);
  for (const HausdorffCell& c : h.cells) {
    CAPTURE(c.n);
    CAPTURE(c.epsilon);
    CHECK(c.normalized >= 0.0);
    CHECK(c.cov_ratio >= 0.0);
    CHECK(c.epsilon_used <= c.epsilon);
    if (c.points <= 20 && c.dim.direction == BoundDirection::exact &&
        c.cov.direction == BoundDirection::exact) {
      CHECK(c.normalized <= c.cov_ratio + 1e-12);
    }
  }
  REQUIRE(!h.tail_upper.empty());
  CHECK(h.value_upper == h.tail_upper.back());
  CHECK(h.value_lower == h.tail_lower.back());
  CHECK(h.tail_windows == std::vector<int>{3, 4});
  CHECK_THROWS_AS(mdim_hausdorff_estimate(src, grid, -0.1, 1.0, opt), ConfigError);
  CHECK_THROWS_AS(mdim_hausdorff_estimate(src, grid, 0.8, 1.0, opt), ConfigError);
}

TEST_CASE("katok counts stay below spanning counts") {
  const AlphabetSpec a4 = line_alphabet({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
  const ShiftSystem sys(a4, WeightFamily(0.5), 1, 1);
  const ShiftCellSource src(sys, FolnerSequence::boxes(1, 4));
  const ScaleGrid grid = make_grid(0.95, 0.7, 5, 4);
  EstimatorOptions opt;
  opt.sample_count = 80;

  const KatokProfile prof = katok_profile(src, grid, 0.3, opt);
  REQUIRE(prof.cells.size() == 20);
  CHECK(prof.delta == 0.3);
  for (const KatokCell& c : prof.cells) {
    CAPTURE(c.n);
    CHECK(c.b >= 0.0);
    CHECK(c.epsilon_used <= c.epsilon);
    if (c.katok.direction == BoundDirection::exact && c.r.direction == BoundDirection::exact) {
      CHECK(c.katok.count <= c.r.count);
    }
  }
  CHECK_THROWS_AS(katok_profile(src, grid, 1.5, opt), ConfigError);
  CHECK_THROWS_AS(katok_profile(src, grid, 0.0, opt), ConfigError);
}

TEST_CASE("parallel estimation matches serial") {
  const AlphabetSpec a5 = AlphabetSpec::interval_grid(0.25);
  const ShiftSystem sys(a5, WeightFamily(0.5), 1, 1);
  const ShiftCellSource src(sys, FolnerSequence::boxes(1, 4));
  const ScaleGrid grid = make_grid(0.9, 0.5, 5, 4);
  EstimatorOptions opt;
  opt.mode = SolveMode::greedy;
  opt.sample_count = 200;

  const DimensionReport serial = mdim_metric_estimate(src, grid, opt);
  const DimensionReport par = run_metric_estimate(src, grid, opt, 4);
  CHECK(counts_csv(serial, "cfg") == counts_csv(par, "cfg"));
}

TEST_CASE("product cells take the max of factor distances") {
  const ShiftSystem left(AlphabetSpec::interval_grid(0.25), WeightFamily(0.5), 1, 1);
  const ShiftSystem right(AlphabetSpec::interval_grid(0.5), WeightFamily(0.5), 1, 1);
  const FolnerSequence fol = FolnerSequence::boxes(1, 3);
  const ShiftCellSource ls(left, fol), rs(right, fol);
  const ProductCellSource prod(ls, rs);
  EstimatorOptions opt;

  const Cell pc = prod.cell(2, opt);
  const Cell lc = ls.cell(2, opt);
  const Cell rc = rs.cell(2, opt);
  const std::size_t nb = rc.dist.size();
  REQUIRE(pc.dist.size() == lc.dist.size() * nb);
  for (std::size_t i = 0; i < lc.dist.size(); i += 3) {
    for (std::size_t j = 0; j < nb; j += 2) {
      for (std::size_t k = 0; k < lc.dist.size(); k += 4) {
        for (std::size_t l = 0; l < nb; l += 3) {
          CHECK(pc.dist.at(i * nb + j, k * nb + l) ==
                doctest::Approx(std::max(lc.dist.at(i, k), rc.dist.at(j, l))).epsilon(1e-14));
        }
      }
    }
  }
  CHECK(prod.resolution_floor() == doctest::Approx(std::min(ls.resolution_floor(),
                                                            rs.resolution_floor())));
}

TEST_CASE("empty subshift raises an estimation error") {
  const AlphabetSpec a5 = AlphabetSpec::interval_grid(0.25);
  std::vector<ForbiddenPattern> all;
  for (std::uint16_t s = 0; s < 5; ++s) {
    ForbiddenPattern p;
    p.offsets = {{0}};
    p.symbols = {s};
    all.push_back(p);
  }
  const ShiftSystem empty(a5, WeightFamily(0.5), 1, 1, Boundary::periodic, all);
  const ShiftCellSource src(empty, FolnerSequence::boxes(1, 4));
  const ScaleGrid grid = make_grid(0.9, 0.5, 5, 4);
  EstimatorOptions opt;
  CHECK_THROWS_AS(mdim_metric_estimate(src, grid, opt), EstimationError);
}

TEST_CASE("config parsing round trips") {
  const Json sys_j = Json::parse(R"({
    "alphabet": {"kind": "interval_grid", "step": 0.25},
    "weights": {"lambda": 0.5},
    "rank": 1,
    "side": 2
  })");
  const ShiftSystem sys = parse_system(sys_j, "system");
  CHECK(sys.alphabet().size() == 5);
  CHECK(sys.cells() == 2);
  CHECK(sys.rank() == 1);

  const Json gm_j = Json::parse(R"({
    "alphabet": {"kind": "circle_grid", "count": 4},
    "weights": {"lambda": 0.5, "radius": 16},
    "rank": 1,
    "side": 3,
    "boundary": "periodic",
    "forbidden": [{"offsets": [[0], [1]], "symbols": [1, 1]}]
  })");
  const ShiftSystem gm = parse_system(gm_j, "system");
  CHECK_FALSE(gm.is_full_shift());
  CHECK(gm.enumerate(100).size() < 64);

  try {
    parse_system(Json::parse(R"({"alphabet": {"kind": "interval_grid"}, "weights": {"lambda": 0.5}})"),
                 "system");
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("alphabet") != std::string::npos);
    CHECK(msg.find("step") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_mode("bogus"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);

  const Json grid_j = Json::parse(R"({"eps_from": 0.5, "eps_to": 0.1, "eps_count": 5, "n_max": 4})");
  const ScaleGrid g = parse_grid(grid_j, "grid");
  CHECK(g.epsilons.size() == 5);
  CHECK(g.epsilons.front() == 0.5);
  CHECK(g.epsilons.back() == 0.1);
  CHECK(g.n_max == 4);

  const Json grid_list = Json::parse(R"({"epsilons": [0.5, 0.4, 0.3], "n_max": 6, "tail_fraction": 0.25})");
  const ScaleGrid gl = parse_grid(grid_list, "grid");
  CHECK(gl.epsilons == std::vector<double>{0.5, 0.4, 0.3});
  CHECK(gl.tail_fraction == 0.25);

  const MetricTransform tp = parse_transform(Json::parse(R"({"kind": "power", "a": 0.5})"), "t");
  CHECK(tp(0.25) == doctest::Approx(0.5));
  const MetricTransform tt = parse_transform(
      Json::parse(R"({"kind": "table", "xs": [0.0, 1.0], "ys": [0.0, 0.5]})"), "t");
  CHECK(tt(0.5) == doctest::Approx(0.25));
  CHECK_THROWS_AS(parse_transform(Json::parse(R"({"kind": "nope"})"), "t"), ConfigError);
  CHECK_THROWS_AS(parse_transform(Json::parse(R"({"kind": "hybrid", "alpha": 2.0, "eps": 0.1})"), "t"),
                  ConfigError);

  const Json opt_j = Json::parse(R"({"mode": "greedy", "seed": 9, "saturation_ratio": 0.25})");
  const EstimatorOptions opt = parse_options(opt_j);
  CHECK(opt.mode == SolveMode::greedy);
  CHECK(opt.seed == 9);
  CHECK(opt.saturation_ratio == 0.25);
  CHECK_THROWS_AS(parse_options(Json::parse(R"({"saturation_ratio": 1.5})")), ConfigError);
  CHECK_THROWS_AS(parse_options(Json::parse(R"({"sample_count": 1})")), ConfigError);

  const Json fol_j = Json::parse(R"({"kind": "explicit", "windows": [[[0], [1]], [[0]]]})");
  const FolnerSequence fol = parse_folner(fol_j, 1, "windows");
  CHECK(fol.n_max() == 2);
  CHECK(fol.window(1).size() == 2);
  CHECK(fol.window(2).size() == 1);
  const FolnerSequence boxes = parse_folner(Json::parse(R"({"kind": "boxes", "n_max": 6})"), 2, "w");
  CHECK(boxes.window(6).size() == 36);
}

TEST_CASE("report formatting") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(config_stamp("abc").size() == 16);
  CHECK(config_stamp("abc") != config_stamp("abd"));

  const std::string pre = csv_preamble("abc");
  CHECK(pre.rfind("# meandim ", 0) == 0);
  CHECK(pre.find("config=") != std::string::npos);
  CHECK(pre.back() == '\n');

  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("a\"b") == "\"a\"\"b\"");

  CHECK(std::stod(fmt17(0.1)) == 0.1);
  CHECK(std::stod(fmt17(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(fmt_int(42) == "42");

  const ShiftSystem sys(AlphabetSpec::interval_grid(0.25), WeightFamily(0.5), 1, 1);
  const ShiftCellSource src(sys, FolnerSequence::boxes(1, 4));
  const ScaleGrid grid = make_grid(0.9, 0.5, 5, 4);
  EstimatorOptions opt;
  opt.mode = SolveMode::greedy;
  opt.sample_count = 100;
  const DimensionReport rep = run_metric_estimate(src, grid, opt, 1);
  const std::string csv = counts_csv(rep, "cfg");
  CHECK(csv.find("epsilon,epsilon_used,n,window_size,points,s,r,cov,katok,bound_direction,mode,seed\n") !=
        std::string::npos);
  std::size_t lines = 0;
  for (char c : csv) lines += (c == '\n');
  CHECK(lines == 2 + rep.cells.size());
}

TEST_CASE("verification checks on small batches") {
  const CheckOutcome sandwich = check_sandwich_sweep(15, 7);
  CHECK(sandwich.status == CheckStatus::pass);
  CHECK_FALSE(is_hard_failure(sandwich));

  const CheckOutcome katok = check_katok_vs_spanning(5, 7);
  CHECK(katok.status == CheckStatus::pass);

  const CheckOutcome cont = soft_exponent_continuity();
  CHECK_FALSE(is_hard_failure(cont));

  const std::string csv = verify_csv({sandwich, katok}, "cfg");
  CHECK(csv.find("sandwich-chain") != std::string::npos);
  CHECK(csv.find("name,status,margin,anchor,witness,note\n") != std::string::npos);
}
