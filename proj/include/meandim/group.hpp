#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "meandim/common.hpp"

namespace meandim {

// Group elements of Z^rank as integer coordinate vectors. Windows are finite
// subsets kept sorted (lexicographic) and deduplicated, so set operations are
// exact integer work.
using GroupElement = std::vector<std::int64_t>;

inline GroupElement neg(const GroupElement& g) {
  GroupElement out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = -g[i];
  return out;
}

inline GroupElement add(const GroupElement& a, const GroupElement& b) {
  if (a.size() != b.size()) throw DomainError("group element rank mismatch");
  GroupElement out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline std::int64_t norm_inf(const GroupElement& g) {
  std::int64_t m = 0;
  for (auto c : g) m = std::max(m, std::abs(c));
  return m;
}

class FiniteWindow {
 public:
  FiniteWindow() = default;

  explicit FiniteWindow(std::vector<GroupElement> elements) : elems_(std::move(elements)) {
    if (elems_.empty()) throw DomainError("window must be nonempty");
    const std::size_t rank = elems_.front().size();
    for (const auto& e : elems_) {
      if (e.size() != rank) throw DomainError("window elements must share rank");
    }
    std::sort(elems_.begin(), elems_.end());
    elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
  }

  // Box [0,n)^rank.
  static FiniteWindow box(int rank, std::int64_t n) {
    if (rank < 1 || rank > 4) throw DomainError("box rank must be in [1,4]");
    if (n < 1) throw DomainError("box side must be positive");
    double cells = 1.0;
    for (int i = 0; i < rank; ++i) cells *= static_cast<double>(n);
    if (cells > 1e8) throw ResourceError("box window too large to materialize");
    std::vector<GroupElement> elems;
    elems.reserve(static_cast<std::size_t>(cells));
    GroupElement cur(rank, 0);
    while (true) {
      elems.push_back(cur);
      int axis = rank - 1;
      while (axis >= 0) {
        if (++cur[axis] < n) break;
        cur[axis] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
    return FiniteWindow(std::move(elems));
  }

  std::size_t size() const { return elems_.size(); }
  std::size_t rank() const { return elems_.front().size(); }
  const std::vector<GroupElement>& elements() const { return elems_; }

  bool contains(const GroupElement& g) const {
    return std::binary_search(elems_.begin(), elems_.end(), g);
  }

  bool operator==(const FiniteWindow& other) const { return elems_ == other.elems_; }

 private:
  std::vector<GroupElement> elems_;
};

inline FiniteWindow translate(const GroupElement& g, const FiniteWindow& w) {
  std::vector<GroupElement> out;
  out.reserve(w.size());
  for (const auto& e : w.elements()) out.push_back(add(g, e));
  return FiniteWindow(std::move(out));
}

inline FiniteWindow inverse(const FiniteWindow& w) {
  std::vector<GroupElement> out;
  out.reserve(w.size());
  for (const auto& e : w.elements()) out.push_back(neg(e));
  return FiniteWindow(std::move(out));
}

// Sumset S + F = {s + f}. Guarded: the result can blow up quadratically.
inline FiniteWindow window_product(const FiniteWindow& s, const FiniteWindow& f,
                                   std::uint64_t budget = 100'000'000) {
  if (s.rank() != f.rank()) throw DomainError("window rank mismatch");
  const std::uint64_t pairs = static_cast<std::uint64_t>(s.size()) * f.size();
  if (pairs > budget) throw ResourceError("window product exceeds budget");
  std::vector<GroupElement> out;
  out.reserve(pairs);
  for (const auto& a : s.elements()) {
    for (const auto& b : f.elements()) out.push_back(add(a, b));
  }
  return FiniteWindow(std::move(out));
}

// |F \ gF| / |F|. Zero iff g fixes F setwise; for boxes [0,n)^d it is
// bounded by d*|g|_inf/n.
inline double boundary_ratio(const FiniteWindow& f, const GroupElement& g) {
  const FiniteWindow shifted = translate(g, f);
  std::size_t inside = 0;
  for (const auto& e : f.elements()) {
    if (shifted.contains(e)) ++inside;
  }
  return static_cast<double>(f.size() - inside) / static_cast<double>(f.size());
}

// Window family indexed by n >= 1: either boxes [0,n)^rank or an explicit list.
class FolnerSequence {
 public:
  static FolnerSequence boxes(int rank, int n_max) {
    if (n_max < 1) throw DomainError("n_max must be positive");
    FolnerSequence seq;
    seq.rank_ = rank;
    seq.n_max_ = n_max;
    return seq;
  }

  static FolnerSequence explicit_list(std::vector<FiniteWindow> windows) {
    if (windows.empty()) throw DomainError("explicit window list must be nonempty");
    FolnerSequence seq;
    seq.windows_ = std::move(windows);
    seq.rank_ = static_cast<int>(seq.windows_.front().rank());
    seq.n_max_ = static_cast<int>(seq.windows_.size());
    return seq;
  }

  int rank() const { return rank_; }
  int n_max() const { return n_max_; }
  bool is_boxes() const { return windows_.empty(); }

  FiniteWindow window(int n) const {
    if (n < 1 || n > n_max_) throw DomainError("window index out of range");
    if (!windows_.empty()) return windows_[static_cast<std::size_t>(n - 1)];
    return FiniteWindow::box(rank_, n);
  }

 private:
  FolnerSequence() = default;
  int rank_ = 1;
  int n_max_ = 1;
  std::vector<FiniteWindow> windows_;
};

// Empirical tempering constant: max over n <= n_max of
// |union_{k<n} F_k^{-1} F_n| / |F_n|. This is the finite-range witness of the
// tempered condition, reported rather than asserted.
inline double check_tempered(const FolnerSequence& seq, int n_max,
                             std::uint64_t budget = 50'000'000) {
  if (n_max < 2 || n_max > seq.n_max()) throw DomainError("check_tempered: bad n_max");
  double worst = 0.0;
  for (int n = 2; n <= n_max; ++n) {
    const FiniteWindow fn = seq.window(n);
    std::vector<GroupElement> acc;
    for (int k = 1; k < n; ++k) {
      const FiniteWindow prod = window_product(inverse(seq.window(k)), fn, budget);
      acc.insert(acc.end(), prod.elements().begin(), prod.elements().end());
      if (acc.size() > budget) throw ResourceError("check_tempered: union exceeds budget");
    }
    const FiniteWindow u{std::move(acc)};
    worst = std::max(worst, static_cast<double>(u.size()) / static_cast<double>(fn.size()));
  }
  return worst;
}

}  // namespace meandim
