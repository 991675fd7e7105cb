#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "meandim/common.hpp"

namespace meandim {

// Metrics are evaluated on indexed finite point sets. The evaluator must be
// pure; diameter_bound is an upper bound for d over the intended domain.
struct MetricSpec {
  std::function<double(std::size_t, std::size_t)> eval;
  double diameter_bound = 1.0;
};

struct MetricDiagnostics {
  double max_symmetry_defect = 0.0;
  double max_self_distance = 0.0;
  double min_offdiagonal = std::numeric_limits<double>::infinity();
  double max_triangle_defect = 0.0;
  std::size_t sampled_pairs = 0;
};

// Spot-check metric axioms on sampled pairs/triples. Violations beyond tol
// throw; the caller decides whether zero distance between distinct indices is
// acceptable (duplicate sample points make it legitimate).
inline MetricDiagnostics validate_metric(const MetricSpec& m, std::size_t n_points, Rng& rng,
                                         std::size_t samples = 2000, double tol = 1e-12,
                                         bool require_distinct = true) {
  if (n_points == 0) throw DomainError("validate_metric: empty point set");
  MetricDiagnostics diag;
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t i = rng.below(n_points);
    const std::size_t j = rng.below(n_points);
    const std::size_t l = rng.below(n_points);
    const double dij = m.eval(i, j);
    const double dji = m.eval(j, i);
    const double dii = m.eval(i, i);
    diag.max_symmetry_defect = std::max(diag.max_symmetry_defect, std::abs(dij - dji));
    diag.max_self_distance = std::max(diag.max_self_distance, std::abs(dii));
    if (i != j) diag.min_offdiagonal = std::min(diag.min_offdiagonal, dij);
    const double defect = dij - (m.eval(i, l) + m.eval(l, j));
    diag.max_triangle_defect = std::max(diag.max_triangle_defect, defect);
    ++diag.sampled_pairs;
  }
  if (diag.max_symmetry_defect > tol) throw DomainError("metric validation: symmetry defect");
  if (diag.max_self_distance > tol) throw DomainError("metric validation: nonzero self distance");
  if (diag.max_triangle_defect > tol) throw DomainError("metric validation: triangle defect");
  if (require_distinct && n_points > 1 && diag.min_offdiagonal <= 0.0) {
    throw DomainError("metric validation: distinct indices at zero distance");
  }
  return diag;
}

// Symmetric pairwise distances, lower-triangle storage.
class DistMatrix {
 public:
  DistMatrix() = default;
  explicit DistMatrix(std::size_t n) : n_(n), d_(n * (n + 1) / 2, 0.0) {}

  static DistMatrix from(std::size_t n, const std::function<double(std::size_t, std::size_t)>& eval) {
    DistMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) m.set(i, j, eval(i, j));
    }
    return m;
  }

  std::size_t size() const { return n_; }

  double at(std::size_t i, std::size_t j) const {
    return i >= j ? d_[i * (i + 1) / 2 + j] : d_[j * (j + 1) / 2 + i];
  }

  void set(std::size_t i, std::size_t j, double v) {
    if (i >= j) {
      d_[i * (i + 1) / 2 + j] = v;
    } else {
      d_[j * (j + 1) / 2 + i] = v;
    }
  }

  double max_value() const {
    double m = 0.0;
    for (double v : d_) m = std::max(m, v);
    return m;
  }

  // Smallest strictly positive entry; 0 if none.
  double min_positive() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : d_) {
      if (v > 0.0) m = std::min(m, v);
    }
    return std::isfinite(m) ? m : 0.0;
  }

  template <typename F>
  DistMatrix map(F&& f) const {
    DistMatrix out = *this;
    for (double& v : out.d_) v = f(v);
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

// Product of two metrics on a paired index set: max{d, d'}.
inline MetricSpec product_metric(const MetricSpec& a, const MetricSpec& b,
                                 std::function<std::pair<std::size_t, std::size_t>(std::size_t)> split) {
  MetricSpec out;
  out.diameter_bound = std::max(a.diameter_bound, b.diameter_bound);
  out.eval = [a, b, split = std::move(split)](std::size_t i, std::size_t j) {
    const auto [ia, ib] = split(i);
    const auto [ja, jb] = split(j);
    return std::max(a.eval(ia, ja), b.eval(ib, jb));
  };
  return out;
}

// Largest |d1 - d2| over all pairs of the finite set. On a finite surrogate
// this is a lower bound of the uniform distance between the two metrics.
inline double uniform_distance_lower_bound(const DistMatrix& d1, const DistMatrix& d2) {
  if (d1.size() != d2.size()) throw DomainError("uniform distance: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      worst = std::max(worst, std::abs(d1.at(i, j) - d2.at(i, j)));
    }
  }
  return worst;
}

// Scale transforms zeta: [0, rho] -> [0, inf), continuous, increasing,
// subadditive, zero exactly at zero. Composition with a metric gives another
// metric, and composition commutes with the window maximum.
class MetricTransform {
 public:
  enum class Kind { power, log_power, hybrid, table };

  static MetricTransform power(double a) {
    MetricTransform t;
    t.kind_ = Kind::power;
    t.a_ = a;
    return t;
  }

  // zeta(x) = log(1 + x^a), same scaling exponent as power(a).
  static MetricTransform log_power(double a) {
    MetricTransform t;
    t.kind_ = Kind::log_power;
    t.a_ = a;
    return t;
  }

  // Identity above eps, snowflake eps^{1-alpha} x^alpha below; stays within
  // 2*eps of the identity everywhere.
  static MetricTransform hybrid(double alpha, double eps) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw TransformError("hybrid: alpha must be in (0,1)");
    if (!(eps > 0.0)) throw TransformError("hybrid: eps must be positive");
    MetricTransform t;
    t.kind_ = Kind::hybrid;
    t.a_ = alpha;
    t.eps_ = eps;
    return t;
  }

  // Piecewise-linear interpolation of sampled (x, zeta(x)) pairs; the table
  // must start at (0, 0).
  static MetricTransform table(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2) throw TransformError("table: need at least two samples");
    std::sort(samples.begin(), samples.end());
    if (samples.front().first != 0.0 || samples.front().second != 0.0) {
      throw TransformError("table: must start at (0,0)");
    }
    MetricTransform t;
    t.kind_ = Kind::table;
    t.table_ = std::move(samples);
    return t;
  }

  Kind kind() const { return kind_; }
  double parameter() const { return a_; }
  double hybrid_eps() const { return eps_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::power:
        return std::pow(x, a_);
      case Kind::log_power:
        return std::log1p(std::pow(x, a_));
      case Kind::hybrid:
        return x >= eps_ ? x : std::pow(eps_, 1.0 - a_) * std::pow(x, a_);
      case Kind::table: {
        if (x <= table_.front().first) return table_.front().second;
        if (x >= table_.back().first) return table_.back().second;
        auto it = std::upper_bound(table_.begin(), table_.end(), std::make_pair(x, std::numeric_limits<double>::infinity()));
        const auto [x1, y1] = *it;
        const auto [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
      }
    }
    return 0.0;
  }

  // Known scaling exponent at zero, if the family has one in closed form.
  bool closed_form_exponent(double& k) const {
    switch (kind_) {
      case Kind::power:
      case Kind::log_power:
        k = a_;
        return true;
      case Kind::hybrid:
        k = a_;
        return true;
      case Kind::table:
        return false;
    }
    return false;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::power:
        return "power(" + fmt17(a_) + ")";
      case Kind::log_power:
        return "log_power(" + fmt17(a_) + ")";
      case Kind::hybrid:
        return "hybrid(" + fmt17(a_) + "," + fmt17(eps_) + ")";
      case Kind::table:
        return "table[" + std::to_string(table_.size()) + "]";
    }
    return "?";
  }

 private:
  MetricTransform() = default;
  Kind kind_ = Kind::power;
  double a_ = 1.0;
  double eps_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

// Grid validation of the admissibility conditions on [0, rho]: zero at zero,
// strictly increasing, subadditive. Throws TransformError with the offending
// pair when a counterexample is found.
inline void validate_transform(const MetricTransform& t, double rho, std::size_t grid = 200,
                               double tol = 1e-12) {
  if (!(rho > 0.0)) throw TransformError("validate_transform: rho must be positive");
  if (std::abs(t(0.0)) > tol) throw TransformError(t.describe() + ": zeta(0) != 0");
  std::vector<double> xs(grid + 1);
  for (std::size_t i = 0; i <= grid; ++i) xs[i] = rho * static_cast<double>(i) / static_cast<double>(grid);
  for (std::size_t i = 1; i <= grid; ++i) {
    const double lo = t(xs[i - 1]);
    const double hi = t(xs[i]);
    if (!(hi - lo > -tol) || !(hi > 0.0)) {
      throw TransformError(t.describe() + ": not increasing/positive at x=" + fmt17(xs[i]));
    }
  }
  for (std::size_t i = 1; i <= grid; ++i) {
    for (std::size_t j = i; i + j <= grid; ++j) {
      const double lhs = t(xs[i + j]);
      const double rhs = t(xs[i]) + t(xs[j]);
      if (lhs > rhs + tol) {
        throw TransformError(t.describe() + ": subadditivity fails at x=" + fmt17(xs[i]) +
                             " y=" + fmt17(xs[j]));
      }
    }
  }
}

inline MetricSpec apply_transform(const MetricTransform& t, const MetricSpec& m) {
  MetricSpec out;
  out.diameter_bound = t(m.diameter_bound);
  out.eval = [t, base = m.eval](std::size_t i, std::size_t j) { return t(base(i, j)); };
  return out;
}

// Scaling exponent estimate from slopes log zeta(eps) / log eps on a
// decreasing grid. The admissible class forces the limit exponents into
// [0, 1]; finite-grid slopes of valid members can poke above 1 by a prefactor
// term, so raw extremes are retained and the reported pair is clamped.
struct ExponentEstimate {
  double k_min = 0.0;
  double k_max = 0.0;
  double raw_min = 0.0;
  double raw_max = 0.0;
  bool clamped = false;
  std::vector<double> epsilons;
  std::vector<double> slopes;
};

inline ExponentEstimate exponent_range(const MetricTransform& t, double eps_max = 0.1,
                                       double eps_min = 1e-6, std::size_t count = 25,
                                       double tail_fraction = 0.5) {
  if (!(eps_min > 0.0 && eps_max > eps_min && eps_max < 1.0)) {
    throw DomainError("exponent_range: need 0 < eps_min < eps_max < 1");
  }
  if (count < 4) throw DomainError("exponent_range: need at least 4 grid points");
  ExponentEstimate est;
  const double ratio = std::pow(eps_min / eps_max, 1.0 / static_cast<double>(count - 1));
  for (std::size_t i = 0; i < count; ++i) {
    const double eps = eps_max * std::pow(ratio, static_cast<double>(i));
    const double z = t(eps);
    if (!(z > 0.0)) throw TransformError(t.describe() + ": nonpositive value at eps=" + fmt17(eps));
    est.epsilons.push_back(eps);
    est.slopes.push_back(std::log(z) / std::log(eps));
  }
  const std::size_t tail = std::max<std::size_t>(2, static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(count))));
  est.raw_min = std::numeric_limits<double>::infinity();
  est.raw_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = count - tail; i < count; ++i) {
    est.raw_min = std::min(est.raw_min, est.slopes[i]);
    est.raw_max = std::max(est.raw_max, est.slopes[i]);
  }
  est.k_min = std::clamp(est.raw_min, 0.0, 1.0);
  est.k_max = std::clamp(est.raw_max, 0.0, 1.0);
  est.clamped = (est.k_min != est.raw_min) || (est.k_max != est.raw_max);
  if (est.k_min > est.k_max) throw EstimationError("exponent_range: min above max");
  return est;
}

// Enforce diameter below one before scale-transform work: returns the factor
// the metric was multiplied by (1 when no rescale was needed).
inline double rescale_factor_for_transforms(double diameter_bound) {
  return diameter_bound >= 1.0 ? 1.0 / (diameter_bound + 1e-9) : 1.0;
}

}  // namespace meandim
