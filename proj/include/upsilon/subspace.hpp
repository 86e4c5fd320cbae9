#pragma once

// Exact linear algebra over Q^r: canonical subspaces in reduced row echelon
// form, intersections and sums.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "upsilon/errors.hpp"
#include "upsilon/rational.hpp"

namespace upsilon {

using RatVector = std::vector<Rat>;
using RatMatrix = std::vector<RatVector>;

namespace detail {

// Gauss-Jordan elimination in place over the first `cols` columns; zero rows
// are dropped. Returns the rank.
inline std::size_t reduce_rows(RatMatrix& m, std::size_t cols) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t p = rank;
    while (p < m.size() && m[p][c].is_zero()) ++p;
    if (p == m.size()) continue;
    std::swap(m[rank], m[p]);
    RatVector& pivot = m[rank];
    if (pivot[c] != 1) {
      Rat inv = 1 / pivot[c];
      for (std::size_t k = c; k < pivot.size(); ++k) pivot[k] *= inv;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == rank || m[i][c].is_zero()) continue;
      Rat f = m[i][c];
      for (std::size_t k = c; k < pivot.size(); ++k) m[i][k] -= f * pivot[k];
    }
    ++rank;
  }
  m.resize(rank);
  return rank;
}

// Forward elimination only.
inline std::size_t rank_of(RatMatrix m, std::size_t cols) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t p = rank;
    while (p < m.size() && m[p][c].is_zero()) ++p;
    if (p == m.size()) continue;
    std::swap(m[rank], m[p]);
    for (std::size_t i = rank + 1; i < m.size(); ++i) {
      if (m[i][c].is_zero()) continue;
      Rat f = m[i][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[i][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// A subspace of Q^r held as its RREF basis; equal subspaces have identical bases.
class Subspace {
 public:
  static Subspace zero(std::size_t ambient_dim) { return Subspace(check_ambient(ambient_dim), {}); }

  static Subspace full(std::size_t ambient_dim) {
    RatMatrix rows(check_ambient(ambient_dim), RatVector(ambient_dim));
    for (std::size_t i = 0; i < ambient_dim; ++i) rows[i][i] = 1;
    return Subspace(ambient_dim, std::move(rows));
  }

  std::size_t ambient_dim() const noexcept { return ambient_; }
  std::size_t dim() const noexcept { return basis_.size(); }
  const RatMatrix& basis() const noexcept { return basis_; }
  bool is_zero() const noexcept { return basis_.empty(); }
  bool is_full() const noexcept { return basis_.size() == ambient_; }
  bool is_proper() const noexcept { return !is_zero() && !is_full(); }

  bool contains(const RatVector& v) const {
    RatMatrix rows = basis_;
    rows.push_back(v);
    return detail::rank_of(std::move(rows), ambient_) == dim();
  }

  bool contains(const Subspace& other) const {
    RatMatrix rows = basis_;
    rows.insert(rows.end(), other.basis_.begin(), other.basis_.end());
    return detail::rank_of(std::move(rows), ambient_) == dim();
  }

  friend bool operator==(const Subspace&, const Subspace&) = default;

  friend std::strong_ordering operator<=>(const Subspace& a, const Subspace& b) {
    if (auto c = a.ambient_ <=> b.ambient_; c != 0) return c;
    if (auto c = a.basis_.size() <=> b.basis_.size(); c != 0) return c;
    for (std::size_t i = 0; i < a.basis_.size(); ++i) {
      auto c = std::lexicographical_compare_three_way(a.basis_[i].begin(), a.basis_[i].end(), b.basis_[i].begin(),
                                                      b.basis_[i].end());
      if (c != 0) return c;
    }
    return std::strong_ordering::equal;
  }

 private:
  friend Subspace reduce(RatMatrix rows, std::size_t ambient_dim);

  Subspace(std::size_t ambient, RatMatrix basis) : ambient_(ambient), basis_(std::move(basis)) {}

  static std::size_t check_ambient(std::size_t r) {
    if (r == 0) throw InvalidArgument("ambient dimension must be positive");
    return r;
  }

  std::size_t ambient_;
  RatMatrix basis_;
};

/// Span of `rows` in canonical form.
inline Subspace reduce(RatMatrix rows, std::size_t ambient_dim) {
  Subspace::check_ambient(ambient_dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != ambient_dim)
      throw DimensionMismatch("row " + std::to_string(i) + " has length " + std::to_string(rows[i].size()) +
                              ", expected " + std::to_string(ambient_dim));
  detail::reduce_rows(rows, ambient_dim);
  return Subspace(ambient_dim, std::move(rows));
}

inline Subspace span_of(std::initializer_list<RatVector> rows, std::size_t ambient_dim) {
  return reduce(RatMatrix(rows), ambient_dim);
}

inline RatVector unit_vector(std::size_t ambient_dim, std::size_t i) {
  RatVector v(ambient_dim);
  v.at(i) = 1;
  return v;
}

namespace detail {
inline void require_same_ambient(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionMismatch("ambient dimensions differ: " + std::to_string(a.ambient_dim()) + " vs " +
                            std::to_string(b.ambient_dim()));
}
}  // namespace detail

inline Subspace subspace_sum(const Subspace& a, const Subspace& b) {
  detail::require_same_ambient(a, b);
  RatMatrix rows = a.basis();
  rows.insert(rows.end(), b.basis().begin(), b.basis().end());
  return reduce(std::move(rows), a.ambient_dim());
}

/// dim(A ∩ B) = dim A + dim B - dim(A + B), without building the intersection.
inline std::size_t intersection_dim(const Subspace& a, const Subspace& b) {
  detail::require_same_ambient(a, b);
  if (a.is_zero() || b.is_zero()) return 0;
  if (a.is_full()) return b.dim();
  if (b.is_full()) return a.dim();
  RatMatrix rows = a.basis();
  rows.insert(rows.end(), b.basis().begin(), b.basis().end());
  return a.dim() + b.dim() - detail::rank_of(std::move(rows), a.ambient_dim());
}

/// Zassenhaus: reduce [a | a] over [b | 0]; rows whose left half vanishes span A ∩ B.
inline Subspace intersect(const Subspace& a, const Subspace& b) {
  detail::require_same_ambient(a, b);
  const std::size_t r = a.ambient_dim();
  if (a.is_full()) return b;
  if (b.is_full() || a == b) return a;
  if (a.is_zero() || b.is_zero()) return Subspace::zero(r);
  RatMatrix rows;
  rows.reserve(a.dim() + b.dim());
  for (const auto& v : a.basis()) {
    RatVector row(v);
    row.insert(row.end(), v.begin(), v.end());
    rows.push_back(std::move(row));
  }
  for (const auto& v : b.basis()) {
    RatVector row(v);
    row.resize(2 * r);
    rows.push_back(std::move(row));
  }
  detail::reduce_rows(rows, 2 * r);
  RatMatrix out;
  for (auto& row : rows) {
    bool left_zero = std::all_of(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(r),
                                 [](const Rat& x) { return x.is_zero(); });
    if (left_zero) out.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(r), row.end());
  }
  return reduce(std::move(out), r);
}

inline Rat dot(std::span<const Rat> a, std::span<const Rat> b) {
  Rat s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace upsilon
