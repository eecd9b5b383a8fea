#pragma once

#include <complex>
#include <vector>

namespace klab {

using Complex = std::complex<double>;

/// Small dense Hermitian matrix (metric coefficient blocks, n <= 4).
struct HermitianMatrix {
  int n = 0;
  std::vector<Complex> a;  // row-major

  HermitianMatrix() = default;
  explicit HermitianMatrix(int size) : n(size), a(size * size, Complex(0, 0)) {}

  Complex& at(int i, int j) { return a[i * n + j]; }
  const Complex& at(int i, int j) const { return a[i * n + j]; }

  static HermitianMatrix identity(int size);
  static HermitianMatrix diagonal(const std::vector<double>& d);

  HermitianMatrix scaled(double factor) const;
  double hermitian_defect() const;  // max |a_ij - conj(a_ji)|
  /// Leading principal minors, all real parts (imaginary parts are
  /// round-off for Hermitian input).
  std::vector<double> leading_principal_minors() const;
  bool is_positive_definite(double tol = 0.0) const;
};

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// ascending order.
std::vector<double> hermitian_eigenvalues(const HermitianMatrix& m);

/// Extreme generalized eigenvalues of (A, B) with B positive definite:
/// min and max of eigenvalues of L^{-1} A L^{-H}, B = L L^H.
std::pair<double, double> generalized_eigenvalue_extremes(
    const HermitianMatrix& A, const HermitianMatrix& B);

}  // namespace klab
