#include "kahlerlab/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "kahlerlab/errors.hpp"

namespace klab {

HermitianMatrix HermitianMatrix::identity(int size) {
  HermitianMatrix m(size);
  for (int i = 0; i < size; ++i) m.at(i, i) = 1.0;
  return m;
}

HermitianMatrix HermitianMatrix::diagonal(const std::vector<double>& d) {
  HermitianMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.n; ++i) m.at(i, i) = d[i];
  return m;
}

HermitianMatrix HermitianMatrix::scaled(double factor) const {
  HermitianMatrix m = *this;
  for (auto& v : m.a) v *= factor;
  return m;
}

double HermitianMatrix::hermitian_defect() const {
  double d = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d = std::max(d, std::abs(at(i, j) - std::conj(at(j, i))));
  return d;
}

namespace {

Complex det_recursive(const HermitianMatrix& m, int size) {
  if (size == 1) return m.at(0, 0);
  if (size == 2)
    return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
  Complex det(0, 0);
  double sign = 1;
  for (int c = 0; c < size; ++c) {
    HermitianMatrix sub(size - 1);
    for (int i = 1; i < size; ++i) {
      int jj = 0;
      for (int j = 0; j < size; ++j) {
        if (j == c) continue;
        sub.at(i - 1, jj++) = m.at(i, j);
      }
    }
    det += sign * m.at(0, c) * det_recursive(sub, size - 1);
    sign = -sign;
  }
  return det;
}

}  // namespace

std::vector<double> HermitianMatrix::leading_principal_minors() const {
  std::vector<double> minors;
  for (int k = 1; k <= n; ++k) {
    HermitianMatrix sub(k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub.at(i, j) = at(i, j);
    minors.push_back(det_recursive(sub, k).real());
  }
  return minors;
}

bool HermitianMatrix::is_positive_definite(double tol) const {
  for (double m : leading_principal_minors())
    if (!(m > tol)) return false;
  return true;
}

std::vector<double> hermitian_eigenvalues(const HermitianMatrix& m) {
  HermitianMatrix w = m;
  const int n = w.n;
  if (n == 0) return {};
  if (n == 1) return {w.at(0, 0).real()};
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0;
    int p = 0, q = 1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(w.at(i, j)) > off) {
          off = std::abs(w.at(i, j));
          p = i;
          q = j;
        }
    double scale = 0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(w.at(i, i)));
    if (off <= 1e-15 * std::max(scale, 1.0)) break;

    // complex Jacobi rotation zeroing w_pq
    Complex apq = w.at(p, q);
    double app = w.at(p, p).real(), aqq = w.at(q, q).real();
    Complex phase = apq / std::abs(apq);
    double tau = (aqq - app) / (2.0 * std::abs(apq));
    double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    double c = 1.0 / std::sqrt(1.0 + t * t);
    double s = t * c;
    // columns: v_p' = c v_p - s conj(phase) v_q ; v_q' = s phase v_p + c v_q
    for (int i = 0; i < n; ++i) {
      Complex wip = w.at(i, p), wiq = w.at(i, q);
      w.at(i, p) = c * wip - s * std::conj(phase) * wiq;
      w.at(i, q) = s * phase * wip + c * wiq;
    }
    for (int j = 0; j < n; ++j) {
      Complex wpj = w.at(p, j), wqj = w.at(q, j);
      w.at(p, j) = c * wpj - s * phase * wqj;
      w.at(q, j) = s * std::conj(phase) * wpj + c * wqj;
    }
  }
  std::vector<double> eigs(n);
  for (int i = 0; i < n; ++i) eigs[i] = w.at(i, i).real();
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

namespace {

// Cholesky B = L L^H for Hermitian positive definite B; lower triangle.
HermitianMatrix cholesky(const HermitianMatrix& b) {
  const int n = b.n;
  HermitianMatrix L(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      Complex sum = b.at(i, j);
      for (int k = 0; k < j; ++k) sum -= L.at(i, k) * std::conj(L.at(j, k));
      if (i == j) {
        double d = sum.real();
        if (d <= 0)
          throw SolverError("cholesky: matrix is not positive definite");
        L.at(i, i) = std::sqrt(d);
      } else {
        L.at(i, j) = sum / L.at(j, j).real();
      }
    }
  }
  return L;
}

}  // namespace

std::pair<double, double> generalized_eigenvalue_extremes(
    const HermitianMatrix& A, const HermitianMatrix& B) {
  if (A.n != B.n) throw SolverError("generalized eigenvalues: size mismatch");
  const int n = A.n;
  HermitianMatrix L = cholesky(B);
  // C = L^{-1} A L^{-H}: solve L X = A (columns), then C L^H = X row-wise.
  HermitianMatrix X(n);
  for (int col = 0; col < n; ++col)
    for (int i = 0; i < n; ++i) {
      Complex sum = A.at(i, col);
      for (int k = 0; k < i; ++k) sum -= L.at(i, k) * X.at(k, col);
      X.at(i, col) = sum / L.at(i, i).real();
    }
  HermitianMatrix C(n);
  for (int row = 0; row < n; ++row)
    for (int j = 0; j < n; ++j) {
      Complex sum = X.at(row, j);
      for (int k = 0; k < j; ++k) sum -= C.at(row, k) * std::conj(L.at(j, k));
      C.at(row, j) = sum / L.at(j, j).real();
    }
  auto eigs = hermitian_eigenvalues(C);
  return {eigs.front(), eigs.back()};
}

}  // namespace klab
