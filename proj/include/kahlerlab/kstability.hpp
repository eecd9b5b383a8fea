#pragma once

#include <string>
#include <vector>

#include "kahlerlab/polytope.hpp"

namespace klab {

/// Rational affine functional x -> <gradient, x> + offset.
struct AffinePiece {
  std::vector<Rational> gradient;
  Rational offset;
  Rational eval(const std::vector<Rational>& x) const;
};

/// Toric test configuration: a rational piecewise-linear concave weight on a
/// lattice polytope, stored as the min of finitely many affine functionals.
/// A single piece encodes a product / one-parameter-subgroup configuration.
struct ToricTestConfiguration {
  LatticePolytope base_polytope;
  std::vector<AffinePiece> pieces;

  static ToricTestConfiguration make(LatticePolytope p,
                                     std::vector<AffinePiece> pieces);

  /// min over pieces at a rational point.
  Rational weight(const std::vector<Rational>& x) const;
};

struct HilbertCoefficients {
  Rational a0;  // leading Ehrhart coefficient (= vol)
  Rational a1;  // subleading (= half boundary measure)
};

struct WeightCoefficients {
  Rational b0;  // k^{n+1} coefficient of the weight trace
  Rational b1;  // k^n coefficient
};

enum class DFVerdict { kStableDirection, kUnstableDirection, kZero };

struct DFReport {
  Rational futaki;
  DFVerdict verdict;
  HilbertCoefficients hilbert;
  WeightCoefficients weight;
};

std::string to_string(DFVerdict v);

HilbertCoefficients hilbert_coefficients(const LatticePolytope& p);

/// Sum of k*f(x/k) over the lattice points of kP, exact.
Rational weight_trace(const ToricTestConfiguration& tc, long long k);

/// Exact fit of the weight trace to b0 k^{n+1} + ... + const over
/// k = 1..n+2, verified on a held-out dilation.
WeightCoefficients weight_coefficients(const ToricTestConfiguration& tc);

/// Donaldson-Futaki invariant 2(a1 b0 - a0 b1)/a0, exact rational.
DFReport donaldson_futaki(const ToricTestConfiguration& tc);

/// n * anticanonical_degree / L_degree of the polarized fiber.
Rational eta_constant(const LatticePolytope& p);

/// CM-degree from supplied pushforward intersection numbers:
/// 2^{n+1} ((n+1) * relcanonical + eta * polarization).
struct CMPushforwardData {
  Rational relcanonical_term;
  Rational polarization_term;
  int n = 1;
};

Rational cm_degree(const CMPushforwardData& data, const Rational& eta);

}  // namespace klab
