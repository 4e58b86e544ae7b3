#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "groupcos/linalg.hpp"

namespace groupcos {

namespace detail {

/// FNV-1a over the little-endian bytes of a 64-bit word.
inline void fnv1a_mix(std::uint64_t& hash, std::uint64_t word) {
  for (int byte = 0; byte < 8; ++byte) {
    hash ^= (word >> (8 * byte)) & 0xffu;
    hash *= 1099511628211ULL;
  }
}

/// Components quantized at 1e-12 before hashing, so groups that differ only
/// by sub-tolerance noise share a fingerprint.
inline std::uint64_t quantize_component(double x) {
  constexpr double kScale = 1e12;
  const double scaled = std::clamp(x * kScale, -9.0e18, 9.0e18);
  return std::bit_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(scaled)));
}

}  // namespace detail

/// Content hash of a group: shape plus every component rounded at 1e-12.
inline std::uint64_t group_fingerprint(const VectorGroup& group) {
  std::uint64_t hash = 14695981039346656037ULL;
  detail::fnv1a_mix(hash, group.size());
  detail::fnv1a_mix(hash, group.dimension());
  for (const Vector& row : group.rows()) {
    for (double x : row) detail::fnv1a_mix(hash, detail::quantize_component(x));
  }
  return hash;
}

/// Reusable orthogonal projection onto the span of a group. Building one
/// factors the group once; every later query costs O(rank * dimension) with
/// no linear solve. The result depends only on span(group), not on which
/// (possibly redundant) rows represent it. Immutable, so a single Projector
/// can serve any number of concurrent callers.
class Projector {
 public:
  Projector(OrthonormalBasis basis, std::uint64_t source_fingerprint)
      : basis_(std::move(basis)), source_fingerprint_(source_fingerprint) {}

  const OrthonormalBasis& basis() const { return basis_; }
  std::size_t rank() const { return basis_.rank(); }
  std::size_t dimension() const { return basis_.dimension(); }
  std::uint64_t source_fingerprint() const { return source_fingerprint_; }

 private:
  OrthonormalBasis basis_;
  std::uint64_t source_fingerprint_;
};

inline Projector build_projector(const VectorGroup& group, double tol = kDefaultTolerance) {
  return Projector(orthonormalize(group, tol), group_fingerprint(group));
}

/// Cosine of the angle between b and the span of a group: |p| / |b| where p
/// is the orthogonal projection of b. Always in [0, 1]. A rank-0 projector
/// (all-zero source group) scores 0.
inline double cos_to_group(const Vector& b, const Projector& projector) {
  if (b.size() != projector.dimension()) {
    throw DimensionMismatch("cos_to_group: vector dimension " + std::to_string(b.size()) +
                            " does not match projector dimension " +
                            std::to_string(projector.dimension()));
  }
  const double b_norm = norm(b);
  if (b_norm == 0.0) throw ZeroVector("cos_to_group: query vector is zero");
  if (projector.rank() == 0) {
    OpCounters::group_cosines.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  const Vector p = project_onto_basis(b, projector.basis());
  OpCounters::group_cosines.fetch_add(1, std::memory_order_relaxed);
  return std::clamp(norm(p) / b_norm, 0.0, 1.0);
}

/// Same cosine through the explicit formula sqrt(b A^T (A A^T)^-1 A b^T)/|b|.
/// Exists for fidelity and as the second route of the oracle pair; throws
/// SingularGram when the group's rows are not numerically independent.
inline double cos_to_group_gram(const Vector& b, const VectorGroup& group,
                                double tol = kDefaultTolerance) {
  if (b.size() != group.dimension()) {
    throw DimensionMismatch("cos_to_group_gram: vector dimension " + std::to_string(b.size()) +
                            " does not match group dimension " + std::to_string(group.dimension()));
  }
  const double b_norm = norm(b);
  if (b_norm == 0.0) throw ZeroVector("cos_to_group_gram: query vector is zero");
  const Vector p = project_via_gram(b, group, tol);
  // |p|^2 = b . p once p solves the normal equations
  const double squared = std::max(dot(b, p), 0.0);
  OpCounters::group_cosines.fetch_add(1, std::memory_order_relaxed);
  return std::clamp(std::sqrt(squared) / b_norm, 0.0, 1.0);
}

/// Mean of cos_to_group over the rows of X against another group's span.
/// Noncommutative: swapping the roles of the two groups changes the value.
inline double cos_group_to_group(const VectorGroup& x, const Projector& other) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (norm(x.row(i)) == 0.0) {
      throw ZeroVector("cos_group_to_group: row " + std::to_string(i) + " is zero");
    }
  }
  double sum = 0.0;
  for (const Vector& row : x.rows()) sum += cos_to_group(row, other);
  return sum / static_cast<double>(x.size());
}

/// How the per-direction cosines are combined. `mean` divides each direction
/// by its group size, keeping SIM in [0, 1] with full match = 1; `sum` keeps
/// the raw sums for fidelity experiments and may exceed 1.
enum class SimCombine { mean, sum };

/// Which projection route scores each query vector.
enum class ProjectionPath { basis, gram };

struct SimOptions {
  double tolerance = kDefaultTolerance;
  SimCombine combine = SimCombine::mean;
  ProjectionPath path = ProjectionPath::basis;
};

/// Symmetrized group similarity plus the per-direction components and the
/// number of vector-vs-group cosine evaluations performed (n + m for groups
/// of n and m vectors).
struct SimilarityValue {
  double value = 0.0;
  double a_vs_b = 0.0;  ///< rows of A against span(B)
  double b_vs_a = 0.0;  ///< rows of B against span(A)
  std::size_t evaluations = 0;
};

/// SIM(A, B): the two directional group cosines averaged. Symmetric by
/// construction -- both orders evaluate the same two directions, each with a
/// fixed row order, so SIM(A, B) == SIM(B, A) bit-exactly. With the gram
/// path, queries whose Gram solve is singular fall back to the basis route.
inline SimilarityValue sim_symmetric(const VectorGroup& a, const VectorGroup& b,
                                     const SimOptions& options = {}) {
  if (a.dimension() != b.dimension()) {
    throw DimensionMismatch("sim_symmetric: group dimensions differ (" +
                            std::to_string(a.dimension()) + " vs " +
                            std::to_string(b.dimension()) + ")");
  }
  for (const VectorGroup* g : {&a, &b}) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (norm(g->row(i)) == 0.0) {
        throw ZeroVector("sim_symmetric: row " + std::to_string(i) + " is zero");
      }
    }
  }

  std::size_t evaluations = 0;
  auto direction = [&](const VectorGroup& queries, const VectorGroup& target) -> double {
    std::optional<Projector> projector;
    if (options.path == ProjectionPath::basis) projector = build_projector(target, options.tolerance);
    double sum = 0.0;
    for (const Vector& q : queries.rows()) {
      double c;
      if (options.path == ProjectionPath::gram) {
        try {
          c = cos_to_group_gram(q, target, options.tolerance);
        } catch (const SingularGram&) {
          if (!projector) projector = build_projector(target, options.tolerance);
          c = cos_to_group(q, *projector);
        }
      } else {
        c = cos_to_group(q, *projector);
      }
      sum += c;
      ++evaluations;
    }
    return options.combine == SimCombine::mean ? sum / static_cast<double>(queries.size()) : sum;
  };

  SimilarityValue result;
  result.b_vs_a = direction(b, a);
  result.a_vs_b = direction(a, b);
  result.value = (result.b_vs_a + result.a_vs_b) / 2.0;
  result.evaluations = evaluations;
  return result;
}

/// Baseline measure: the mean of all n*m pairwise vector cosines. Unlike the
/// projection measure this lies in [-1, 1].
inline double pairwise_mean_cosine(const VectorGroup& a, const VectorGroup& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionMismatch("pairwise_mean_cosine: group dimensions differ (" +
                            std::to_string(a.dimension()) + " vs " +
                            std::to_string(b.dimension()) + ")");
  }
  for (const VectorGroup* g : {&a, &b}) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (norm(g->row(i)) == 0.0) {
        throw ZeroVector("pairwise_mean_cosine: row " + std::to_string(i) + " is zero");
      }
    }
  }
  double sum = 0.0;
  for (const Vector& u : a.rows()) {
    for (const Vector& v : b.rows()) sum += cosine(u, v);
  }
  return sum / static_cast<double>(a.size() * b.size());
}

}  // namespace groupcos
