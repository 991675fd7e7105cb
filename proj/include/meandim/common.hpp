#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace meandim {

// Error taxonomy. The CLI maps these to exit codes: config 2, resource 3,
// everything else (including failed hard checks) 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Budget or enumeration limits exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Bad arguments at the library boundary (index out of range, empty window, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A candidate scale transform failed validation.
class TransformError : public Error {
 public:
  using Error::Error;
};

// Too little usable data to fit an estimate.
class EstimationError : public Error {
 public:
  using Error::Error;
};

struct Budgets {
  std::uint64_t solver_nodes = 10'000'000;  // branch-and-bound node cap
  std::uint64_t enumeration = 2'000'000;    // largest point set we will enumerate
  std::size_t exact_points = 4096;          // largest point set exact solvers accept
};

// Deterministic RNG. splitmix64 for seeding/derivation, and a small
// xoshiro-style generator for streams; uniform doubles take the top 53 bits
// so results are identical on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Child seed for task `index` under a base seed; distinct indices give
// independent-looking streams.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  std::uint64_t s = base_seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (0xD1B54A32D192ED03ull * (index + 1));
  return splitmix64(t);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : s_) word = splitmix64(s);
  }

  static Rng derive(std::uint64_t base_seed, std::uint64_t index) {
    return Rng(derive_seed(base_seed, index));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw DomainError("Rng::below: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4] = {};
};

// Shortest-decimal-free serialization: 17 significant digits round-trip any double.
inline std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_int(std::uint64_t v) { return std::to_string(v); }

// Least-squares slope of y against x. Returns slope and max absolute residual.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::size_t points = 0;
};

inline SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw EstimationError("fit_slope: need at least two points");
  }
  const std::size_t n = x.size();
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (sxx <= 0.0) throw EstimationError("fit_slope: degenerate abscissa");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  fit.points = n;
  for (std::size_t i = 0; i < n; ++i) {
    fit.max_residual = std::max(fit.max_residual, std::abs(y[i] - (fit.intercept + fit.slope * x[i])));
  }
  return fit;
}

}  // namespace meandim
