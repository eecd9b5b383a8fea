#pragma once

#include <vector>

#include "kahlerlab/rational.hpp"

namespace klab {

using LatticeVector = std::vector<long long>;

/// Full-dimensional lattice polytope in dimension n <= 3, vertices exact
/// integers, facets derived by exact convex hull. Facet inequality is
/// <a_i, x> >= -c_i with a_i a primitive inward integer normal.
struct LatticePolytope {
  struct Facet {
    LatticeVector normal;
    long long offset;  // c in <a,x> >= -c
  };

  int dim = 0;
  std::vector<LatticeVector> vertices;
  std::vector<Facet> facets;

  /// Builds and validates: derives facets, checks full-dimensionality and
  /// that every input point is a genuine vertex (saturates >= dim facets).
  static LatticePolytope from_vertices(std::vector<LatticeVector> verts);

  /// Dilation by a positive integer factor (vertices scaled).
  LatticePolytope dilate(long long factor) const;

  bool contains_lattice_point(const LatticeVector& x, long long k) const;
};

/// Exact cardinality of kP intersected with Z^n (bounding-box scan).
long long lattice_point_count(const LatticePolytope& p, long long k);

/// Degree-n polynomial with exact rational coefficients; coeffs[i] is the
/// coefficient of k^i.
struct EhrhartPolynomial {
  std::vector<Rational> coeffs;
  Rational eval(long long k) const;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// Exact interpolation of lattice counts over k_range (needs >= n+1 distinct
/// values); the fit is verified on every supplied k and on one held-out k.
EhrhartPolynomial ehrhart_fit(const LatticePolytope& p,
                              const std::vector<long long>& k_range);

/// Exact euclidean volume via simplicial decomposition.
Rational polytope_volume(const LatticePolytope& p);

/// Exact centroid via simplicial decomposition.
std::vector<Rational> barycenter(const LatticePolytope& p);

/// Lattice-normalized surface measure of the boundary: each facet contributes
/// its (n-1)-volume normalized so the induced lattice has covolume 1.
Rational boundary_measure(const LatticePolytope& p);

/// Barycenter of the boundary with respect to the lattice surface measure.
std::vector<Rational> boundary_barycenter(const LatticePolytope& p);

struct ToricDegrees {
  Rational L_degree;              // n! * vol(P)
  Rational anticanonical_degree;  // (n-1)! * lattice surface measure
};

ToricDegrees toric_degrees(const LatticePolytope& p);

}  // namespace klab
