#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "meandim/common.hpp"
#include "meandim/group.hpp"
#include "meandim/hausdorff.hpp"
#include "meandim/metric.hpp"
#include "meandim/packing.hpp"
#include "meandim/systems.hpp"

namespace meandim {

// Evaluation lattice: strictly decreasing scales crossed with an inclusive
// window index range. Slope fits run along the scale axis; the window axis
// supplies the tail over which per-scale extremes are taken.
struct ScaleGrid {
  std::vector<double> epsilons;
  int n_min = 1;
  int n_max = 4;
  double tail_fraction = 0.5;

  static std::vector<double> geometric(double from, double to, std::size_t count) {
    if (!(from > to && to > 0.0)) throw ConfigError("grid: need from > to > 0");
    if (count < 2) throw ConfigError("grid: need at least 2 scales");
    std::vector<double> out(count);
    const double q = std::pow(to / from, 1.0 / static_cast<double>(count - 1));
    double v = from;
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = (i + 1 == count) ? to : v;
      v *= q;
    }
    return out;
  }

  std::size_t windows() const { return static_cast<std::size_t>(n_max - n_min + 1); }

  void validate(double resolution_floor) const {
    if (epsilons.size() < 4) throw ConfigError("grid: need at least 4 scales");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      if (!(epsilons[i] > 0.0 && epsilons[i] < 1.0)) {
        throw ConfigError("grid: scales must lie in (0,1)");
      }
      if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
        throw ConfigError("grid: scales must strictly decrease");
      }
    }
    if (n_min < 1 || n_max < n_min) throw ConfigError("grid: bad window range");
    if (windows() < 4) throw ConfigError("grid: need at least 4 windows");
    if (resolution_floor > 0.0 && epsilons.back() < 2.0 * resolution_floor) {
      throw ConfigError("grid: smallest scale below twice the resolution floor");
    }
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
      throw ConfigError("grid: tail_fraction must be in (0,1]");
    }
  }
};

struct EstimatorOptions {
  SolveMode mode = SolveMode::exact;
  std::size_t sample_count = 2000;
  std::uint64_t seed = 1;
  Budgets budgets;
  double saturation_ratio = 0.5;
  bool degrade_on_budget = true;
};

// One evaluation cell: a finite point set with its precomputed window metric.
struct Cell {
  int n = 0;
  std::size_t window_size = 0;
  bool enumerated = false;
  bool line_order = false;
  std::size_t duplicates = 0;
  DistMatrix dist;
};

class CellSource {
 public:
  virtual ~CellSource() = default;
  virtual Cell cell(int n, const EstimatorOptions& opt) const = 0;
  virtual double resolution_floor() const = 0;
  virtual double diameter_bound() const = 0;
  virtual std::string describe() const = 0;
};

// Cells drawn from the box-periodic surrogates of a shift system. The window-n
// cell holds the n-periodic points; their folded weights reproduce the
// infinite-lattice metric exactly, so no truncation error enters. Spaces small
// enough to enumerate are enumerated even in sampled mode.
class ShiftCellSource : public CellSource {
 public:
  ShiftCellSource(ShiftSystem base, FolnerSequence folner)
      : base_(std::move(base)), folner_(std::move(folner)) {}

  Cell cell(int n, const EstimatorOptions& opt) const override {
    const ShiftSystem sys = base_.periodic_restriction(n);
    const FiniteWindow& f = folner_.window(n);
    Cell out;
    out.n = n;
    out.window_size = f.size();
    out.line_order = sys.cells() == 1 && base_.alphabet().line_order();
    const double cap = static_cast<double>(std::max<std::size_t>(opt.sample_count, 64));
    std::vector<Config> pts;
    if (sys.raw_space_size() <= cap) {
      pts = sys.enumerate(opt.budgets.enumeration);
      out.enumerated = true;
    } else if (opt.mode == SolveMode::sampled || opt.degrade_on_budget) {
      Rng rng(Rng::derive(opt.seed, static_cast<std::uint64_t>(n)));
      SampleStats stats;
      pts = sys.sample(opt.sample_count, rng, &stats);
      out.duplicates = stats.duplicates;
    } else {
      throw ResourceError("cell: space too large to enumerate in exact mode");
    }
    if (pts.size() < 2) throw EstimationError("cell: fewer than 2 points");
    if (out.line_order) std::sort(pts.begin(), pts.end());
    out.dist = sys.bowen_matrix(pts, f);
    return out;
  }

  double resolution_floor() const override { return base_.resolution_floor(); }
  double diameter_bound() const override { return base_.diameter_bound(); }
  std::string describe() const override {
    return std::string(base_.is_full_shift() ? "full-shift" : "subshift") + " rank " +
           std::to_string(base_.rank());
  }

  const ShiftSystem& system() const { return base_; }
  const FolnerSequence& folner() const { return folner_; }

 private:
  ShiftSystem base_;
  FolnerSequence folner_;
};

// Cells over a fixed finite metric space carrying a permutation action of the
// integers: window elements pull the metric back along permutation powers.
class PermutationCellSource : public CellSource {
 public:
  PermutationCellSource(DistMatrix base, std::vector<std::size_t> perm, FolnerSequence folner)
      : base_(std::move(base)), perm_(std::move(perm)), folner_(std::move(folner)) {
    const std::size_t n = base_.size();
    if (perm_.size() != n) throw ConfigError("permutation: size mismatch");
    std::vector<bool> seen(n, false);
    for (std::size_t v : perm_) {
      if (v >= n || seen[v]) throw ConfigError("permutation: not a bijection");
      seen[v] = true;
    }
  }

  Cell cell(int n, const EstimatorOptions&) const override {
    const FiniteWindow& f = folner_.window(n);
    if (f.rank() != 1) throw ConfigError("permutation action: windows must have rank 1");
    Cell out;
    out.n = n;
    out.window_size = f.size();
    out.enumerated = true;
    const std::size_t p = base_.size();
    std::vector<std::vector<std::size_t>> tables;
    for (const auto& h : f.elements()) tables.push_back(power_table(h[0]));
    out.dist = DistMatrix::from(p, [&](std::size_t i, std::size_t j) {
      double best = 0.0;
      for (const auto& t : tables) best = std::max(best, base_.at(t[i], t[j]));
      return best;
    });
    return out;
  }

  double resolution_floor() const override { return 0.0; }
  double diameter_bound() const override { return base_.max_value(); }
  std::string describe() const override {
    return "permutation action on " + std::to_string(base_.size()) + " points";
  }

 private:
  std::vector<std::size_t> power_table(std::int64_t h) const {
    const std::size_t p = perm_.size();
    std::vector<std::size_t> t(p);
    for (std::size_t i = 0; i < p; ++i) t[i] = i;
    if (h >= 0) {
      for (std::int64_t k = 0; k < h; ++k) {
        for (std::size_t i = 0; i < p; ++i) t[i] = perm_[t[i]];
      }
    } else {
      std::vector<std::size_t> inv(p);
      for (std::size_t i = 0; i < p; ++i) inv[perm_[i]] = i;
      for (std::int64_t k = 0; k < -h; ++k) {
        for (std::size_t i = 0; i < p; ++i) t[i] = inv[t[i]];
      }
    }
    return t;
  }

  DistMatrix base_;
  std::vector<std::size_t> perm_;
  FolnerSequence folner_;
};

// Applies a metric transform to every cell of an inner source. Distances are
// rescaled into the transform domain first; monotonicity preserves line order.
class TransformedCellSource : public CellSource {
 public:
  TransformedCellSource(const CellSource& inner, MetricTransform t, double rescale)
      : inner_(inner), transform_(std::move(t)), rescale_(rescale) {
    if (!(rescale_ > 0.0)) throw ConfigError("transform source: rescale must be positive");
  }

  Cell cell(int n, const EstimatorOptions& opt) const override {
    Cell c = inner_.cell(n, opt);
    c.dist = c.dist.map([this](double x) { return transform_(x * rescale_); });
    return c;
  }

  // Monotone maps move the quantization floor and diameter with the metric.
  double resolution_floor() const override {
    return transform_(rescale_ * inner_.resolution_floor());
  }
  double diameter_bound() const override {
    return transform_(rescale_ * inner_.diameter_bound());
  }
  std::string describe() const override {
    return inner_.describe() + " under " + transform_.describe();
  }

  double map_scale(double eps) const { return transform_(rescale_ * eps); }

 private:
  const CellSource& inner_;
  MetricTransform transform_;
  double rescale_;
};

// Pairs of cells from two sources over the same group, with the max metric.
// Small factor pairs are enumerated fully; otherwise pairs are sampled with
// streams derived independently for the two factors.
class ProductCellSource : public CellSource {
 public:
  ProductCellSource(const CellSource& left, const CellSource& right)
      : left_(left), right_(right) {}

  Cell cell(int n, const EstimatorOptions& opt) const override {
    EstimatorOptions lo = opt, ro = opt;
    lo.seed = derive_seed(opt.seed, 1);
    ro.seed = derive_seed(opt.seed, 2);
    const Cell a = left_.cell(n, lo);
    const Cell b = right_.cell(n, ro);
    if (a.window_size != b.window_size) throw ConfigError("product: window sizes differ");
    Cell out;
    out.n = n;
    out.window_size = a.window_size;
    out.duplicates = a.duplicates + b.duplicates;
    const std::size_t na = a.dist.size(), nb = b.dist.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    const std::size_t cap = std::max<std::size_t>(opt.sample_count, 64);
    if (a.enumerated && b.enumerated && na * nb <= cap) {
      out.enumerated = true;
      for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) pairs.emplace_back(i, j);
      }
    } else {
      Rng rng(Rng::derive(opt.seed, 3000 + static_cast<std::uint64_t>(n)));
      pairs.reserve(opt.sample_count);
      for (std::size_t k = 0; k < opt.sample_count; ++k) {
        pairs.emplace_back(rng.below(na), rng.below(nb));
      }
    }
    out.dist = DistMatrix::from(pairs.size(), [&](std::size_t i, std::size_t j) {
      return std::max(a.dist.at(pairs[i].first, pairs[j].first),
                      b.dist.at(pairs[i].second, pairs[j].second));
    });
    return out;
  }

  // A positive product distance max(dl, dr) has at least one positive side,
  // so the guaranteed floor is the smaller of the two.
  double resolution_floor() const override {
    return std::min(left_.resolution_floor(), right_.resolution_floor());
  }
  double diameter_bound() const override {
    return std::max(left_.diameter_bound(), right_.diameter_bound());
  }
  std::string describe() const override {
    return "product of (" + left_.describe() + ") and (" + right_.describe() + ")";
  }

 private:
  const CellSource& left_;
  const CellSource& right_;
};

enum class Flavor { separated, spanning, cover };

inline const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::separated: return "s";
    case Flavor::spanning: return "r";
    case Flavor::cover: return "cov";
  }
  return "?";
}

inline double a_value(std::uint64_t count, std::size_t window_size) {
  return std::log(static_cast<double>(count)) / static_cast<double>(window_size);
}

// Counts for one (scale, window) cell, all three flavors at a tie-free scale.
struct CountCell {
  double epsilon = 0.0;
  double epsilon_used = 0.0;
  bool jittered = false;
  int n = 0;
  std::size_t window_size = 0;
  std::size_t points = 0;
  bool enumerated = false;
  std::size_t duplicates = 0;
  CountReport s, r, cov;
};

// Per-flavor slope summary over the common usable window tail.
struct FlavorEstimate {
  Flavor flavor = Flavor::separated;
  bool valid = false;
  std::vector<int> usable_windows;
  std::vector<int> tail_windows;
  std::vector<double> tail_upper;
  std::vector<double> tail_lower;
  SlopeFit upper_fit{}, lower_fit{};
  double ratio_upper = 0.0;
  double ratio_lower = 0.0;
  bool any_nonexact = false;
  bool any_budget = false;
  double sensitivity = 0.0;
};

struct DimensionReport {
  ScaleGrid grid;
  SolveMode mode = SolveMode::exact;
  std::uint64_t seed = 0;
  std::string source;
  std::vector<CountCell> cells;
  FlavorEstimate s_est, r_est, cov_est;
};

namespace detail {

inline const CountReport& flavor_count(const CountCell& c, Flavor f) {
  switch (f) {
    case Flavor::separated: return c.s;
    case Flavor::spanning: return c.r;
    case Flavor::cover: return c.cov;
  }
  return c.s;
}

// Enumerated cells always count; sampled cells count only while the count
// stays clear of the sample size, since a saturated sample stops tracking
// the space and flattens the scale response.
inline bool cell_usable(const CountCell& c, Flavor f, double saturation_ratio) {
  if (c.enumerated) return true;
  return static_cast<double>(flavor_count(c, f).count) <
         saturation_ratio * static_cast<double>(c.points);
}

inline FlavorEstimate flavor_estimate(const std::vector<CountCell>& cells, const ScaleGrid& grid,
                                      const EstimatorOptions& opt, Flavor f) {
  FlavorEstimate est;
  est.flavor = f;
  const std::size_t ne = grid.epsilons.size();
  const auto cell_at = [&](int n, std::size_t ei) -> const CountCell& {
    return cells[static_cast<std::size_t>(n - grid.n_min) * ne + ei];
  };
  for (int n = grid.n_min; n <= grid.n_max; ++n) {
    bool all = true;
    for (std::size_t ei = 0; ei < ne && all; ++ei) {
      if (!cell_usable(cell_at(n, ei), f, opt.saturation_ratio)) all = false;
    }
    if (all) est.usable_windows.push_back(n);
  }
  if (est.usable_windows.empty()) return est;

  const auto tail_of = [&](double fraction) {
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(fraction * static_cast<double>(est.usable_windows.size()))));
    return std::vector<int>(est.usable_windows.end() - static_cast<std::ptrdiff_t>(k),
                            est.usable_windows.end());
  };
  est.tail_windows = tail_of(grid.tail_fraction);

  const auto upper_curve = [&](const std::vector<int>& windows) {
    std::vector<double> up(ne);
    for (std::size_t ei = 0; ei < ne; ++ei) {
      double v = -1.0;
      for (int n : windows) {
        const CountCell& c = cell_at(n, ei);
        v = std::max(v, a_value(flavor_count(c, f).count, c.window_size));
      }
      up[ei] = v;
    }
    return up;
  };

  std::vector<double> x(ne);
  for (std::size_t ei = 0; ei < ne; ++ei) x[ei] = std::abs(std::log(grid.epsilons[ei]));
  est.tail_upper = upper_curve(est.tail_windows);
  est.tail_lower.assign(ne, 0.0);
  for (std::size_t ei = 0; ei < ne; ++ei) {
    double v = std::numeric_limits<double>::infinity();
    for (int n : est.tail_windows) {
      const CountCell& c = cell_at(n, ei);
      v = std::min(v, a_value(flavor_count(c, f).count, c.window_size));
      const CountReport& r = flavor_count(c, f);
      if (r.direction != BoundDirection::exact) est.any_nonexact = true;
      if (r.budget_exhausted) est.any_budget = true;
    }
    est.tail_lower[ei] = v;
  }
  est.upper_fit = fit_slope(x, est.tail_upper);
  est.lower_fit = fit_slope(x, est.tail_lower);
  est.ratio_upper = est.tail_upper.back() / x.back();
  est.ratio_lower = est.tail_lower.back() / x.back();
  const std::vector<double> half = upper_curve(tail_of(grid.tail_fraction * 0.5));
  est.sensitivity = std::abs(fit_slope(x, half).slope - est.upper_fit.slope);
  est.valid = true;
  return est;
}

// All per-scale counts for one window index: one pure task of the grid.
inline std::vector<CountCell> count_cells_for_window(const CellSource& src, const ScaleGrid& grid,
                                                     const EstimatorOptions& opt, int n) {
  const Cell cell = src.cell(n, opt);
  CountQuery q;
  q.mode = opt.mode;
  q.budgets = opt.budgets;
  q.degrade_on_budget = opt.degrade_on_budget;
  q.line_order = cell.line_order;
  std::vector<CountCell> out;
  out.reserve(grid.epsilons.size());
  for (double eps : grid.epsilons) {
    CountCell cc;
    cc.epsilon = eps;
    cc.epsilon_used = clear_ties(cell.dist, eps, {1.0}, &cc.jittered);
    cc.n = n;
    cc.window_size = cell.window_size;
    cc.points = cell.dist.size();
    cc.enumerated = cell.enumerated;
    cc.duplicates = cell.duplicates;
    cc.s = max_separated(cell.dist, cc.epsilon_used, q);
    cc.r = min_spanning(cell.dist, cc.epsilon_used, q);
    cc.cov = min_cover(cell.dist, cc.epsilon_used, q);
    out.push_back(cc);
  }
  return out;
}

inline DimensionReport assemble_dimension_report(std::vector<CountCell> cells,
                                                 const ScaleGrid& grid,
                                                 const EstimatorOptions& opt,
                                                 const std::string& source) {
  DimensionReport rep;
  rep.grid = grid;
  rep.mode = opt.mode;
  rep.seed = opt.seed;
  rep.source = source;
  rep.cells = std::move(cells);
  rep.s_est = detail::flavor_estimate(rep.cells, grid, opt, Flavor::separated);
  rep.r_est = detail::flavor_estimate(rep.cells, grid, opt, Flavor::spanning);
  rep.cov_est = detail::flavor_estimate(rep.cells, grid, opt, Flavor::cover);
  if (!rep.s_est.valid && !rep.r_est.valid && !rep.cov_est.valid) {
    throw EstimationError("estimate: no window stayed usable across the scale grid");
  }
  return rep;
}

}  // namespace detail

// Scale response of the three window counts. For each flavor the windows kept
// are those usable at every scale; the slope of the per-scale tail extreme of
// a(eps, n) = log count / |window| against |log eps| estimates the dimension.
inline DimensionReport mdim_metric_estimate(const CellSource& src, const ScaleGrid& grid,
                                            const EstimatorOptions& opt) {
  grid.validate(src.resolution_floor());
  std::vector<CountCell> cells;
  for (int n = grid.n_min; n <= grid.n_max; ++n) {
    std::vector<CountCell> part = detail::count_cells_for_window(src, grid, opt, n);
    cells.insert(cells.end(), part.begin(), part.end());
  }
  return detail::assemble_dimension_report(std::move(cells), grid, opt, src.describe());
}

// Scale-limited dimension per cell, normalized by window size, with the
// matched cover count recorded for dimension comparisons at equal scales.
struct HausdorffCell {
  double epsilon = 0.0;
  double epsilon_used = 0.0;
  bool jittered = false;
  int n = 0;
  std::size_t window_size = 0;
  std::size_t points = 0;
  bool enumerated = false;
  DimAtScale dim;
  double normalized = 0.0;
  CountReport cov;
  double cov_ratio = 0.0;
};

struct HausdorffEstimate {
  ScaleGrid grid;
  double floor_delta = 0.0;
  double phi = 1.0;
  SolveMode mode = SolveMode::exact;
  std::uint64_t seed = 0;
  std::string source;
  std::vector<HausdorffCell> cells;
  std::vector<int> tail_windows;
  std::vector<double> tail_upper;
  std::vector<double> tail_lower;
  std::vector<double> cov_ratio_upper;
  double value_upper = 0.0;
  double value_lower = 0.0;
  SlopeFit trend{};
  bool any_capped = false;
  bool any_empty = false;
  bool any_nonexact = false;
};

inline HausdorffEstimate mdim_hausdorff_estimate(const CellSource& src, const ScaleGrid& grid,
                                                 double floor_delta, double phi,
                                                 const EstimatorOptions& opt) {
  grid.validate(src.resolution_floor());
  if (floor_delta < 0.0) throw ConfigError("hausdorff: floor must be nonnegative");
  if (floor_delta > grid.epsilons.back()) {
    throw ConfigError("hausdorff: floor above the smallest scale");
  }
  HausdorffEstimate rep;
  rep.grid = grid;
  rep.floor_delta = floor_delta;
  rep.phi = phi;
  rep.mode = opt.mode;
  rep.seed = opt.seed;
  rep.source = src.describe();
  const std::size_t ne = grid.epsilons.size();
  for (int n = grid.n_min; n <= grid.n_max; ++n) {
    const Cell cell = src.cell(n, opt);
    CountQuery q;
    q.mode = opt.mode;
    q.budgets = opt.budgets;
    q.degrade_on_budget = opt.degrade_on_budget;
    q.line_order = cell.line_order;
    for (double eps : grid.epsilons) {
      HausdorffCell hc;
      hc.epsilon = eps;
      hc.epsilon_used = clear_ties(cell.dist, eps, {1.0}, &hc.jittered);
      hc.n = n;
      hc.window_size = cell.window_size;
      hc.points = cell.dist.size();
      hc.enumerated = cell.enumerated;
      HausdorffQuery hq;
      hq.epsilon = hc.epsilon_used;
      hq.floor = floor_delta;
      hq.phi = phi;
      hq.mode = opt.mode;
      hq.budgets = opt.budgets;
      hc.dim = dim_at_scale(cell.dist, hq);
      hc.normalized = hc.dim.s / static_cast<double>(cell.window_size);
      hc.cov = min_cover(cell.dist, hc.epsilon_used, q);
      hc.cov_ratio =
          a_value(hc.cov.count, cell.window_size) / std::abs(std::log(hc.epsilon_used));
      if (hc.dim.capped) rep.any_capped = true;
      if (hc.dim.empty_sup) rep.any_empty = true;
      if (hc.dim.direction != BoundDirection::exact ||
          hc.cov.direction != BoundDirection::exact) {
        rep.any_nonexact = true;
      }
      rep.cells.push_back(hc);
    }
  }
  std::vector<int> usable;
  for (int n = grid.n_min; n <= grid.n_max; ++n) {
    if (rep.cells[static_cast<std::size_t>(n - grid.n_min) * ne].enumerated) usable.push_back(n);
  }
  if (usable.empty()) {
    throw EstimationError("hausdorff estimate: no enumerated window available");
  }
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(grid.tail_fraction * static_cast<double>(usable.size()))));
  rep.tail_windows.assign(usable.end() - static_cast<std::ptrdiff_t>(k), usable.end());
  std::vector<double> x(ne);
  rep.tail_upper.assign(ne, 0.0);
  rep.tail_lower.assign(ne, 0.0);
  rep.cov_ratio_upper.assign(ne, 0.0);
  for (std::size_t ei = 0; ei < ne; ++ei) {
    x[ei] = std::abs(std::log(grid.epsilons[ei]));
    double hi = -1.0, lo = std::numeric_limits<double>::infinity(), cr = -1.0;
    for (int n : rep.tail_windows) {
      const HausdorffCell& c = rep.cells[static_cast<std::size_t>(n - grid.n_min) * ne + ei];
      hi = std::max(hi, c.normalized);
      lo = std::min(lo, c.normalized);
      cr = std::max(cr, c.cov_ratio);
    }
    rep.tail_upper[ei] = hi;
    rep.tail_lower[ei] = lo;
    rep.cov_ratio_upper[ei] = cr;
  }
  rep.value_upper = rep.tail_upper.back();
  rep.value_lower = rep.tail_lower.back();
  rep.trend = fit_slope(x, rep.tail_upper);
  return rep;
}

// Box-counting profile of a single metric space: maximal eps-separated counts
// N(eps) across scales, with log N / |log eps| ratios and their slope.
struct MinkowskiScale {
  double epsilon = 0.0;
  double epsilon_used = 0.0;
  bool jittered = false;
  std::uint64_t count = 0;
  double ratio = 0.0;
};

struct MinkowskiReport {
  std::vector<MinkowskiScale> scales;
  SlopeFit fit{};
  bool any_nonexact = false;
};

inline MinkowskiReport minkowski_dim_estimate(const DistMatrix& d, const std::vector<double>& eps,
                                              const CountQuery& q) {
  if (eps.size() < 2) throw ConfigError("minkowski: need at least 2 scales");
  MinkowskiReport rep;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("minkowski: scales must strictly decrease");
    MinkowskiScale sc;
    sc.epsilon = eps[i];
    sc.epsilon_used = clear_ties(d, eps[i], {1.0}, &sc.jittered);
    const CountReport r = max_separated(d, sc.epsilon_used, q);
    sc.count = r.count;
    sc.ratio = std::log(static_cast<double>(r.count)) / std::abs(std::log(sc.epsilon_used));
    if (r.direction != BoundDirection::exact) rep.any_nonexact = true;
    rep.scales.push_back(sc);
    x.push_back(std::abs(std::log(eps[i])));
    y.push_back(std::log(static_cast<double>(r.count)));
  }
  rep.fit = fit_slope(x, y);
  return rep;
}

// Mass-discounted spanning profile: smallest center count whose eps-balls
// carry mass above 1 - delta, alongside the plain spanning count.
struct KatokCell {
  double epsilon = 0.0;
  double epsilon_used = 0.0;
  int n = 0;
  std::size_t window_size = 0;
  std::size_t points = 0;
  CountReport katok, r;
  double b = 0.0;
};

struct KatokProfile {
  double delta = 0.0;
  std::vector<KatokCell> cells;
};

inline KatokProfile katok_profile(const CellSource& src, const ScaleGrid& grid, double delta,
                                  const EstimatorOptions& opt) {
  grid.validate(src.resolution_floor());
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("katok: delta must be in (0,1)");
  KatokProfile prof;
  prof.delta = delta;
  for (int n = grid.n_min; n <= grid.n_max; ++n) {
    const Cell cell = src.cell(n, opt);
    const std::size_t p = cell.dist.size();
    WeightedPointSet mu;
    mu.mass.assign(p, 1.0 / static_cast<double>(p));
    mu.validate();
    CountQuery q;
    q.mode = opt.mode;
    q.budgets = opt.budgets;
    q.degrade_on_budget = opt.degrade_on_budget;
    q.line_order = cell.line_order;
    for (double eps : grid.epsilons) {
      KatokCell kc;
      kc.epsilon = eps;
      kc.epsilon_used = clear_ties(cell.dist, eps, {1.0});
      kc.n = n;
      kc.window_size = cell.window_size;
      kc.points = p;
      kc.katok = katok_spanning(cell.dist, mu, kc.epsilon_used, delta, q);
      kc.r = min_spanning(cell.dist, kc.epsilon_used, q);
      if (kc.katok.direction == BoundDirection::exact &&
          kc.r.direction == BoundDirection::exact && kc.katok.count > kc.r.count) {
        throw Error("katok profile: mass-discounted count exceeded spanning count");
      }
      kc.b = a_value(std::max<std::uint64_t>(kc.katok.count, 1), cell.window_size);
      prof.cells.push_back(kc);
    }
  }
  return prof;
}

}  // namespace meandim
