#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "groupcos/errors.hpp"

namespace groupcos {

/// Dense real vector. Embedding coordinates are unitless doubles.
using Vector = std::vector<double>;

/// Relative tolerance used wherever rank or singularity has to be decided.
inline constexpr double kDefaultTolerance = 1e-10;

/// Process-wide operation counters. Only used by self-checks that assert
/// complexity contracts (number of factorizations, number of vector-vs-group
/// cosine evaluations); the library itself never reads them.
struct OpCounters {
  static inline std::atomic<std::uint64_t> orthonormalizations{0};
  static inline std::atomic<std::uint64_t> group_cosines{0};

  static void reset() {
    orthonormalizations.store(0, std::memory_order_relaxed);
    group_cosines.store(0, std::memory_order_relaxed);
  }
};

inline double dot(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("dot: dimensions differ (" + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
  return sum;
}

inline double norm(const Vector& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

/// Cosine of the angle between two nonzero vectors, clamped to [-1, 1].
inline double cosine(const Vector& u, const Vector& v) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine: dimensions differ (" + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()) + ")");
  }
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine: zero vector has no direction");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

/// Ordered collection of equal-dimension vectors (the rows of a group matrix).
/// Rows may be linearly dependent; full rank is never assumed. Immutable
/// after construction, so concurrent read-only use is safe.
class VectorGroup {
 public:
  explicit VectorGroup(std::vector<Vector> rows) : rows_(std::move(rows)) { validate(); }
  VectorGroup(std::initializer_list<Vector> rows) : rows_(rows) { validate(); }

  std::size_t size() const { return rows_.size(); }
  std::size_t dimension() const { return rows_.front().size(); }
  const Vector& row(std::size_t i) const { return rows_[i]; }
  const std::vector<Vector>& rows() const { return rows_; }

  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

 private:
  void validate() const {
    if (rows_.empty()) throw Error("VectorGroup: group must contain at least one vector");
    const std::size_t d = rows_.front().size();
    if (d == 0) throw Error("VectorGroup: vectors must have dimension >= 1");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].size() != d) {
        throw DimensionMismatch("VectorGroup: row " + std::to_string(i) + " has dimension " +
                                std::to_string(rows_[i].size()) + ", expected " + std::to_string(d));
      }
      for (double x : rows_[i]) {
        if (!std::isfinite(x)) {
          throw Error("VectorGroup: row " + std::to_string(i) + " has a non-finite component");
        }
      }
    }
  }

  std::vector<Vector> rows_;
};

/// Orthonormal spanning set for a vector group. rank() may be zero (the
/// all-zero group); pairwise dot products are ~0 and norms ~1 within the
/// tolerance the basis was built with.
class OrthonormalBasis {
 public:
  OrthonormalBasis(std::vector<Vector> basis_vectors, std::size_t dimension, double tolerance_used)
      : vectors_(std::move(basis_vectors)), dimension_(dimension), tolerance_used_(tolerance_used) {}

  std::size_t rank() const { return vectors_.size(); }
  std::size_t dimension() const { return dimension_; }
  double tolerance_used() const { return tolerance_used_; }
  const std::vector<Vector>& vectors() const { return vectors_; }

 private:
  std::vector<Vector> vectors_;
  std::size_t dimension_;
  double tolerance_used_;
};

/// Rank-revealing orthonormalization by modified Gram-Schmidt with one
/// re-orthogonalization pass. A row enters the basis only if its residual
/// after removing the projection onto the vectors accepted so far exceeds
/// tol times the row's original norm. Zero rows never pass that test, so an
/// all-zero group yields rank 0 rather than an error.
inline OrthonormalBasis orthonormalize(const VectorGroup& group, double tol = kDefaultTolerance) {
  if (!(tol > 0.0)) throw Error("orthonormalize: tolerance must be positive");
  OpCounters::orthonormalizations.fetch_add(1, std::memory_order_relaxed);

  std::vector<Vector> basis;
  for (const Vector& row : group.rows()) {
    const double original_norm = norm(row);
    Vector v = row;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : basis) {
        const double c = dot(v, q);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
      }
    }
    const double residual = norm(v);
    if (residual > tol * original_norm) {
      for (double& x : v) x /= residual;
      basis.push_back(std::move(v));
    }
  }
  return OrthonormalBasis(std::move(basis), group.dimension(), tol);
}

/// Orthogonal projection of b onto span(basis): p = sum_k (b . q_k) q_k.
/// A rank-0 basis projects everything to the zero vector.
inline Vector project_onto_basis(const Vector& b, const OrthonormalBasis& basis) {
  if (b.size() != basis.dimension()) {
    throw DimensionMismatch("project_onto_basis: vector dimension " + std::to_string(b.size()) +
                            " does not match basis dimension " + std::to_string(basis.dimension()));
  }
  Vector p(b.size(), 0.0);
  for (const Vector& q : basis.vectors()) {
    const double c = dot(b, q);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += c * q[i];
  }
  return p;
}

namespace detail {

/// Solves the n-by-n system M x = rhs in place by Gaussian elimination with
/// partial pivoting. Throws SingularGram when a pivot vanishes or the ratio
/// of extreme pivot magnitudes (a cheap condition estimate) exceeds 1/tol.
inline std::vector<double> solve_pivoted(std::vector<double>& m, std::vector<double>& rhs,
                                         std::size_t n, double tol) {
  auto at = [&m, n](std::size_t r, std::size_t c) -> double& { return m[r * n + c]; };

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(at(i, k)) > std::abs(at(pivot, k))) pivot = i;
    }
    if (pivot != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(at(k, c), at(pivot, c));
      std::swap(rhs[k], rhs[pivot]);
    }
    const double p = at(k, k);
    if (p == 0.0) throw SingularGram("Gram matrix is singular (zero pivot)");
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = at(i, k) / p;
      if (f == 0.0) continue;
      at(i, k) = 0.0;
      for (std::size_t c = k + 1; c < n; ++c) at(i, c) -= f * at(k, c);
      rhs[i] -= f * rhs[k];
    }
  }

  double dmax = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::abs(at(k, k));
    dmax = std::max(dmax, a);
    dmin = std::min(dmin, a);
  }
  if (dmin == 0.0 || dmax / dmin > 1.0 / tol) {
    throw SingularGram("Gram matrix is numerically singular (condition estimate exceeds 1/tol)");
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double s = rhs[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= at(k, c) * x[c];
    x[k] = s / at(k, k);
  }
  return x;
}

}  // namespace detail

/// Projection of b onto span(A) through the explicit normal equations:
/// lambda (A A^T) = b A^T, then p = lambda A. Requires the rows of A to be
/// linearly independent; a numerically singular Gram matrix throws
/// SingularGram, signalling the caller to use the basis path instead.
inline Vector project_via_gram(const Vector& b, const VectorGroup& group,
                               double tol = kDefaultTolerance) {
  if (b.size() != group.dimension()) {
    throw DimensionMismatch("project_via_gram: vector dimension " + std::to_string(b.size()) +
                            " does not match group dimension " + std::to_string(group.dimension()));
  }
  if (!(tol > 0.0)) throw Error("project_via_gram: tolerance must be positive");

  const std::size_t n = group.size();
  std::vector<double> gram(n * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double g = dot(group.row(i), group.row(j));
      gram[i * n + j] = g;
      gram[j * n + i] = g;
    }
    rhs[i] = dot(group.row(i), b);
  }

  const std::vector<double> lambda = detail::solve_pivoted(gram, rhs, n, tol);

  Vector p(group.dimension(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < p.size(); ++c) p[c] += lambda[i] * group.row(i)[c];
  }
  return p;
}

}  // namespace groupcos
