#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "meandim/common.hpp"
#include "meandim/group.hpp"
#include "meandim/metric.hpp"

namespace meandim {

// Symbol space with its metric. Grids carry sorted point values so downstream
// solvers can exploit line order; explicit alphabets carry a validated matrix.
class AlphabetSpec {
 public:
  enum class Kind { interval_grid, circle_grid, explicit_matrix };

  // {0, step, 2*step, ..., 1} with |x - y|; 1/step must be integral.
  static AlphabetSpec interval_grid(double step) {
    if (!(step > 0.0 && step <= 0.5)) throw ConfigError("alphabet.step must be in (0, 0.5]");
    const double inv = 1.0 / step;
    const auto m = static_cast<std::int64_t>(std::llround(inv));
    if (std::abs(inv - static_cast<double>(m)) > 1e-9) {
      throw ConfigError("alphabet.step must divide 1 evenly");
    }
    AlphabetSpec a;
    a.kind_ = Kind::interval_grid;
    a.step_ = step;
    for (std::int64_t k = 0; k <= m; ++k) a.points_.push_back(static_cast<double>(k) / static_cast<double>(m));
    return a;
  }

  // m equidistant points on the unit circle, arc metric min(|x-y|, 1-|x-y|).
  static AlphabetSpec circle_grid(std::size_t m) {
    if (m < 2) throw ConfigError("circle alphabet needs at least 2 symbols");
    AlphabetSpec a;
    a.kind_ = Kind::circle_grid;
    a.step_ = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) a.points_.push_back(static_cast<double>(k) / static_cast<double>(m));
    return a;
  }

  // Arbitrary finite metric space given as a full matrix; axioms checked
  // exactly (symmetry, zero diagonal, positivity, triangle).
  static AlphabetSpec explicit_matrix(DistMatrix m) {
    const std::size_t n = m.size();
    if (n < 2) throw ConfigError("explicit alphabet needs at least 2 symbols");
    for (std::size_t i = 0; i < n; ++i) {
      if (m.at(i, i) != 0.0) throw ConfigError("alphabet matrix: nonzero diagonal");
      for (std::size_t j = 0; j < i; ++j) {
        if (!(m.at(i, j) > 0.0)) throw ConfigError("alphabet matrix: nonpositive distance");
        for (std::size_t k = 0; k < n; ++k) {
          if (m.at(i, j) > m.at(i, k) + m.at(k, j) + 1e-12) {
            throw ConfigError("alphabet matrix: triangle inequality fails");
          }
        }
      }
    }
    AlphabetSpec a;
    a.kind_ = Kind::explicit_matrix;
    a.matrix_ = std::move(m);
    return a;
  }

  Kind kind() const { return kind_; }
  double step() const { return step_; }

  std::size_t size() const {
    return kind_ == Kind::explicit_matrix ? matrix_.size() : points_.size();
  }

  double rho(std::size_t i, std::size_t j) const {
    switch (kind_) {
      case Kind::interval_grid:
        return std::abs(points_[i] - points_[j]);
      case Kind::circle_grid: {
        const double v = std::abs(points_[i] - points_[j]);
        return std::min(v, 1.0 - v);
      }
      case Kind::explicit_matrix:
        return matrix_.at(i, j);
    }
    return 0.0;
  }

  double diameter() const {
    switch (kind_) {
      case Kind::interval_grid:
        return 1.0;
      case Kind::circle_grid: {
        double m = 0.0;
        for (std::size_t i = 1; i < size(); ++i) m = std::max(m, rho(0, i));
        return m;
      }
      case Kind::explicit_matrix:
        return matrix_.max_value();
    }
    return 0.0;
  }

  // Quantization floor: the smallest positive symbol distance.
  double resolution() const {
    switch (kind_) {
      case Kind::interval_grid:
      case Kind::circle_grid:
        return step_;
      case Kind::explicit_matrix:
        return matrix_.min_positive();
    }
    return 0.0;
  }

  // True for alphabets whose natural order makes proximity an interval
  // relation, so greedy sweeps are exact.
  bool line_order() const { return kind_ == Kind::interval_grid; }

  const std::vector<double>& points() const { return points_; }

  DistMatrix matrix() const {
    return DistMatrix::from(size(), [this](std::size_t i, std::size_t j) { return rho(i, j); });
  }

 private:
  AlphabetSpec() = default;
  Kind kind_ = Kind::interval_grid;
  double step_ = 0.0;
  std::vector<double> points_;
  DistMatrix matrix_;
};

// Summable coordinate weights alpha_g = lambda^{|g|_1}, identity weight 1.
// Two evaluation modes: raw truncation at a radius (with an explicit tail
// bound), and the exact geometric fold onto a period box, which has no
// truncation error at all.
class WeightFamily {
 public:
  explicit WeightFamily(double lambda, int radius = 32) : lambda_(lambda), radius_(radius) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("weights.lambda must be in (0,1)");
    if (radius < 1) throw ConfigError("weights.radius must be positive");
  }

  double lambda() const { return lambda_; }
  int radius() const { return radius_; }

  double weight(const GroupElement& g) const {
    std::int64_t norm = 0;
    for (auto c : g) norm += std::abs(c);
    if (norm > radius_) return 0.0;
    return std::pow(lambda_, static_cast<double>(norm));
  }

  // Sum over all of Z^rank (no truncation): ((1+lambda)/(1-lambda))^rank.
  double total(int rank) const {
    return std::pow((1.0 + lambda_) / (1.0 - lambda_), static_cast<double>(rank));
  }

  // Mass beyond the truncation radius, summed numerically with geometric decay.
  double tail(int rank) const {
    double acc = 0.0;
    for (std::int64_t m = radius_ + 1; m < radius_ + 4096; ++m) {
      const double term = shell_count(rank, m) * std::pow(lambda_, static_cast<double>(m));
      acc += term;
      if (term < 1e-18 * std::max(acc, 1.0)) break;
    }
    return acc;
  }

  static int radius_for_tail(double lambda, int rank, double tol) {
    for (int r = 1; r <= 4096; ++r) {
      if (WeightFamily(lambda, r).tail(rank) <= tol) return r;
    }
    throw ConfigError("weights: no radius achieves the requested tail");
  }

  // Exact fold of lambda^{|k|} onto Z_n: sums over all k congruent mod n.
  std::vector<double> folded_axis(std::int64_t n) const {
    const double ln = std::pow(lambda_, static_cast<double>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    w[0] = 1.0 + 2.0 * ln / (1.0 - ln);
    for (std::int64_t j = 1; j < n; ++j) {
      w[static_cast<std::size_t>(j)] =
          (std::pow(lambda_, static_cast<double>(j)) + std::pow(lambda_, static_cast<double>(n - j))) /
          (1.0 - ln);
    }
    return w;
  }

 private:
  static double shell_count(int rank, std::int64_t m) {
    if (m == 0) return 1.0;
    switch (rank) {
      case 1:
        return 2.0;
      case 2:
        return 4.0 * static_cast<double>(m);
      default: {
        // |{g : |g|_1 = m}| by 1-d convolution; fine at these ranks.
        std::vector<double> counts{1.0};  // rank 0
        for (int r = 0; r < rank; ++r) {
          std::vector<double> next(static_cast<std::size_t>(m) + 1, 0.0);
          for (std::size_t a = 0; a < counts.size(); ++a) {
            for (std::size_t b = 0; a + b <= static_cast<std::size_t>(m); ++b) {
              next[a + b] += counts[a] * (b == 0 ? 1.0 : 2.0);
            }
          }
          counts = std::move(next);
        }
        return counts[static_cast<std::size_t>(m)];
      }
    }
  }

  double lambda_;
  int radius_;
};

// One configuration of a finite shift surrogate: symbol indices over the
// cells of the box window [0, side)^rank, row-major.
using Config = std::vector<std::uint16_t>;

struct ForbiddenPattern {
  std::vector<GroupElement> offsets;
  std::vector<std::uint16_t> symbols;
};

enum class Boundary { periodic, strict };

struct SampleStats {
  std::size_t duplicates = 0;
  std::size_t rejections = 0;
};

// Finite surrogate of a shift system over Z^rank: configurations on a box
// window. Under the periodic policy the box is a torus, translation is total
// and bijective, and the metric uses exactly folded weights, so the surrogate
// is literally the set of box-periodic points of the infinite system.
class ShiftSystem {
 public:
  ShiftSystem(AlphabetSpec alphabet, WeightFamily weights, int rank, std::int64_t side,
              Boundary boundary = Boundary::periodic, std::vector<ForbiddenPattern> forbidden = {})
      : alphabet_(std::move(alphabet)),
        weights_(weights),
        rank_(rank),
        side_(side),
        boundary_(boundary),
        forbidden_(std::move(forbidden)) {
    if (rank_ < 1 || rank_ > 3) throw ConfigError("system rank must be in [1,3]");
    if (side_ < 1) throw ConfigError("window side must be positive");
    double c = 1.0;
    for (int i = 0; i < rank_; ++i) c *= static_cast<double>(side_);
    if (c > 1e9) throw ResourceError("domain window too large");
    cells_ = static_cast<std::size_t>(c);
    for (const auto& p : forbidden_) {
      if (p.offsets.empty() || p.offsets.size() != p.symbols.size()) {
        throw ConfigError("forbidden pattern: offsets/symbols mismatch");
      }
      for (const auto& o : p.offsets) {
        if (static_cast<int>(o.size()) != rank_) throw ConfigError("forbidden pattern: bad rank");
      }
      for (auto s : p.symbols) {
        if (s >= alphabet_.size()) throw ConfigError("forbidden pattern: symbol out of range");
      }
    }
    build_weights();
  }

  static ShiftSystem full_shift(AlphabetSpec alphabet, WeightFamily weights, int rank,
                                std::int64_t side) {
    return ShiftSystem(std::move(alphabet), weights, rank, side);
  }

  const AlphabetSpec& alphabet() const { return alphabet_; }
  const WeightFamily& weights() const { return weights_; }
  int rank() const { return rank_; }
  std::int64_t side() const { return side_; }
  Boundary boundary() const { return boundary_; }
  std::size_t cells() const { return cells_; }
  bool is_full_shift() const { return forbidden_.empty(); }
  const std::vector<ForbiddenPattern>& forbidden() const { return forbidden_; }
  double folded_weight_identity() const { return cell_weights_[0]; }
  double total_weight() const { return total_weight_; }

  // Same alphabet, weights and constraints on the period box [0,n)^rank.
  ShiftSystem periodic_restriction(std::int64_t n) const {
    return ShiftSystem(alphabet_, weights_, rank_, n, Boundary::periodic, forbidden_);
  }

  // sigma^h(x)_g = x_{g+h}; periodic wrap, or a domain error in strict mode
  // when a translate leaves the window.
  Config act(const GroupElement& h, const Config& x) const {
    if (static_cast<int>(h.size()) != rank_) throw DomainError("act: element rank mismatch");
    Config out(cells_);
    std::vector<std::int64_t> coords(static_cast<std::size_t>(rank_), 0);
    for (std::size_t c = 0; c < cells_; ++c) {
      cell_coords(c, coords);
      bool exits = false;
      for (int a = 0; a < rank_; ++a) {
        coords[static_cast<std::size_t>(a)] += h[static_cast<std::size_t>(a)];
        if (boundary_ == Boundary::strict) {
          if (coords[static_cast<std::size_t>(a)] < 0 || coords[static_cast<std::size_t>(a)] >= side_) {
            exits = true;
          }
        } else {
          coords[static_cast<std::size_t>(a)] = mod_side(coords[static_cast<std::size_t>(a)]);
        }
      }
      if (exits) throw DomainError("act: translate exits window in strict mode");
      out[c] = x[cell_index(coords)];
    }
    return out;
  }

  // d(x,y) = sum_g w_g rho(x_g, y_g) with folded (periodic) or truncated
  // (strict) weights.
  double base_distance(const Config& x, const Config& y) const {
    double acc = 0.0;
    for (std::size_t c = 0; c < cells_; ++c) {
      if (x[c] != y[c]) acc += cell_weights_[c] * alphabet_.rho(x[c], y[c]);
    }
    return acc;
  }

  // Window metric d_F(x,y) = max_{h in F} d(sigma^h x, sigma^h y), evaluated
  // by rotating the weight profile rather than the configurations.
  double bowen(const Config& x, const Config& y, const FiniteWindow& f) const {
    double best = 0.0;
    std::vector<std::int64_t> coords(static_cast<std::size_t>(rank_), 0);
    for (const auto& h : f.elements()) {
      if (static_cast<int>(h.size()) != rank_) throw DomainError("bowen: window rank mismatch");
      double acc = 0.0;
      for (std::size_t c = 0; c < cells_; ++c) {
        cell_coords(c, coords);
        bool exits = false;
        for (int a = 0; a < rank_; ++a) {
          coords[static_cast<std::size_t>(a)] += h[static_cast<std::size_t>(a)];
          if (boundary_ == Boundary::strict) {
            if (coords[static_cast<std::size_t>(a)] < 0 ||
                coords[static_cast<std::size_t>(a)] >= side_) {
              exits = true;
            }
          } else {
            coords[static_cast<std::size_t>(a)] = mod_side(coords[static_cast<std::size_t>(a)]);
          }
        }
        if (exits) throw DomainError("bowen: translate exits window in strict mode");
        const std::size_t src = cell_index(coords);
        if (x[src] != y[src]) acc += cell_weights_[c] * alphabet_.rho(x[src], y[src]);
      }
      best = std::max(best, acc);
    }
    return best;
  }

  // Pairwise window metric over a point list, with the per-element source
  // index tables precomputed once.
  DistMatrix bowen_matrix(const std::vector<Config>& pts, const FiniteWindow& f) const {
    std::vector<std::vector<std::uint32_t>> table;
    table.reserve(f.size());
    std::vector<std::int64_t> coords(static_cast<std::size_t>(rank_), 0);
    for (const auto& h : f.elements()) {
      if (static_cast<int>(h.size()) != rank_) throw DomainError("bowen: window rank mismatch");
      std::vector<std::uint32_t> t(cells_);
      for (std::size_t c = 0; c < cells_; ++c) {
        cell_coords(c, coords);
        for (int a = 0; a < rank_; ++a) {
          coords[static_cast<std::size_t>(a)] += h[static_cast<std::size_t>(a)];
          if (boundary_ == Boundary::strict) {
            if (coords[static_cast<std::size_t>(a)] < 0 ||
                coords[static_cast<std::size_t>(a)] >= side_) {
              throw DomainError("bowen: translate exits window in strict mode");
            }
          } else {
            coords[static_cast<std::size_t>(a)] = mod_side(coords[static_cast<std::size_t>(a)]);
          }
        }
        t[c] = static_cast<std::uint32_t>(cell_index(coords));
      }
      table.push_back(std::move(t));
    }
    return DistMatrix::from(pts.size(), [&](std::size_t i, std::size_t j) {
      const Config& x = pts[i];
      const Config& y = pts[j];
      double best = 0.0;
      for (const auto& t : table) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cells_; ++c) {
          const std::uint32_t src = t[c];
          if (x[src] != y[src]) acc += cell_weights_[c] * alphabet_.rho(x[src], y[src]);
        }
        best = std::max(best, acc);
      }
      return best;
    });
  }

  double diameter_bound() const { return total_weight_ * alphabet_.diameter(); }

  double resolution_floor() const { return alphabet_.resolution(); }

  // True iff no forbidden pattern occurs at any periodic translate.
  bool admissible(const Config& x) const {
    if (forbidden_.empty()) return true;
    std::vector<std::int64_t> coords(static_cast<std::size_t>(rank_), 0);
    for (std::size_t base = 0; base < cells_; ++base) {
      for (const auto& p : forbidden_) {
        bool match = true;
        for (std::size_t k = 0; k < p.offsets.size() && match; ++k) {
          cell_coords(base, coords);
          for (int a = 0; a < rank_; ++a) {
            coords[static_cast<std::size_t>(a)] =
                mod_side(coords[static_cast<std::size_t>(a)] + p.offsets[k][static_cast<std::size_t>(a)]);
          }
          if (x[cell_index(coords)] != p.symbols[k]) match = false;
        }
        if (match) return false;
      }
    }
    return true;
  }

  double raw_space_size() const {
    return std::pow(static_cast<double>(alphabet_.size()), static_cast<double>(cells_));
  }

  // All admissible configurations; throws when the raw space exceeds budget.
  std::vector<Config> enumerate(std::uint64_t budget) const {
    if (raw_space_size() > static_cast<double>(budget)) {
      throw ResourceError("enumerate: configuration space exceeds budget");
    }
    std::vector<Config> out;
    Config cur(cells_, 0);
    const std::size_t m = alphabet_.size();
    while (true) {
      if (admissible(cur)) out.push_back(cur);
      std::size_t c = cells_;
      while (c > 0) {
        --c;
        if (++cur[c] < m) break;
        cur[c] = 0;
        if (c == 0) return out;
      }
    }
  }

  // N independent uniform configurations (i.i.d. symbols); subshifts use
  // rejection. Duplicates are permitted and counted.
  std::vector<Config> sample(std::size_t n, Rng& rng, SampleStats* stats = nullptr) const {
    std::vector<Config> out;
    out.reserve(n);
    std::map<Config, bool> seen;
    std::size_t dup = 0, rej = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Config x(cells_);
      bool ok = false;
      for (int attempt = 0; attempt < 10000; ++attempt) {
        for (auto& s : x) s = static_cast<std::uint16_t>(rng.below(alphabet_.size()));
        if (admissible(x)) {
          ok = true;
          break;
        }
        ++rej;
      }
      if (!ok) throw ResourceError("sample: rejection cap hit (constraints too tight)");
      if (!seen.emplace(x, true).second) ++dup;
      out.push_back(std::move(x));
    }
    if (stats) {
      stats->duplicates = dup;
      stats->rejections = rej;
    }
    return out;
  }

 private:
  void build_weights() {
    cell_weights_.assign(cells_, 0.0);
    std::vector<std::int64_t> coords(static_cast<std::size_t>(rank_), 0);
    if (boundary_ == Boundary::periodic) {
      const std::vector<double> axis = weights_.folded_axis(side_);
      for (std::size_t c = 0; c < cells_; ++c) {
        cell_coords(c, coords);
        double w = 1.0;
        for (int a = 0; a < rank_; ++a) w *= axis[static_cast<std::size_t>(coords[static_cast<std::size_t>(a)])];
        cell_weights_[c] = w;
      }
    } else {
      for (std::size_t c = 0; c < cells_; ++c) {
        cell_coords(c, coords);
        GroupElement g(coords.begin(), coords.end());
        cell_weights_[c] = weights_.weight(g);
      }
    }
    total_weight_ = 0.0;
    for (double w : cell_weights_) total_weight_ += w;
  }

  std::int64_t mod_side(std::int64_t v) const {
    v %= side_;
    return v < 0 ? v + side_ : v;
  }

  std::size_t cell_index(const std::vector<std::int64_t>& coords) const {
    std::size_t idx = 0;
    for (int a = 0; a < rank_; ++a) {
      idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(coords[static_cast<std::size_t>(a)]);
    }
    return idx;
  }

  void cell_coords(std::size_t idx, std::vector<std::int64_t>& coords) const {
    for (int a = rank_ - 1; a >= 0; --a) {
      coords[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(side_));
      idx /= static_cast<std::size_t>(side_);
    }
  }

  AlphabetSpec alphabet_;
  WeightFamily weights_;
  int rank_;
  std::int64_t side_;
  Boundary boundary_;
  std::vector<ForbiddenPattern> forbidden_;
  std::size_t cells_ = 0;
  std::vector<double> cell_weights_;
  double total_weight_ = 0.0;
};

// Product of two systems over the same group: pairs of configurations with
// the max metric; translation acts componentwise, so window metrics satisfy
// (d x d')_F = max(d_F, d'_F) identically.
struct ProductSystem {
  ShiftSystem left;
  ShiftSystem right;

  ProductSystem(ShiftSystem a, ShiftSystem b) : left(std::move(a)), right(std::move(b)) {
    if (left.rank() != right.rank()) throw ConfigError("product: factor ranks differ");
  }

  double bowen(const Config& xl, const Config& xr, const Config& yl, const Config& yr,
               const FiniteWindow& f) const {
    return std::max(left.bowen(xl, yl, f), right.bowen(xr, yr, f));
  }

  double diameter_bound() const {
    return std::max(left.diameter_bound(), right.diameter_bound());
  }
};

}  // namespace meandim
