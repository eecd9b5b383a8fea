#include "kahlerlab/kstability.hpp"

#include <algorithm>

#include "kahlerlab/errors.hpp"

namespace klab {

Rational AffinePiece::eval(const std::vector<Rational>& x) const {
  Rational acc = offset;
  for (size_t i = 0; i < gradient.size(); ++i) acc += gradient[i] * x[i];
  return acc;
}

ToricTestConfiguration ToricTestConfiguration::make(LatticePolytope p,
                                                    std::vector<AffinePiece> pieces) {
  if (pieces.empty())
    throw ValidationError("test configuration: needs at least one affine piece");
  for (const auto& piece : pieces)
    if (static_cast<int>(piece.gradient.size()) != p.dim)
      throw ValidationError("test configuration: gradient dimension mismatch");
  ToricTestConfiguration tc;
  tc.base_polytope = std::move(p);
  tc.pieces = std::move(pieces);
  return tc;
}

Rational ToricTestConfiguration::weight(const std::vector<Rational>& x) const {
  Rational best = pieces[0].eval(x);
  for (size_t i = 1; i < pieces.size(); ++i)
    best = std::min(best, pieces[i].eval(x));
  return best;
}

HilbertCoefficients hilbert_coefficients(const LatticePolytope& p) {
  const int n = p.dim;
  std::vector<long long> ks;
  for (long long k = 1; k <= n + 3; ++k) ks.push_back(k);
  EhrhartPolynomial poly = ehrhart_fit(p, ks);
  HilbertCoefficients h;
  h.a0 = poly.coeffs[n];
  h.a1 = n >= 1 ? poly.coeffs[n - 1] : Rational(0);
  if (h.a0.sign() <= 0)
    throw SolverError("hilbert_coefficients: nonpositive leading coefficient");
  return h;
}

Rational weight_trace(const ToricTestConfiguration& tc, long long k) {
  if (k < 1) throw ValidationError("weight_trace: k must be >= 1");
  const auto& p = tc.base_polytope;
  std::vector<long long> lo(p.dim), hi(p.dim);
  for (int i = 0; i < p.dim; ++i) {
    long long mn = p.vertices[0][i], mx = p.vertices[0][i];
    for (const auto& v : p.vertices) {
      mn = std::min(mn, v[i]);
      mx = std::max(mx, v[i]);
    }
    lo[i] = mn * k;
    hi[i] = mx * k;
  }
  // k * f(x/k) for f = min of affine pieces: min_i(<g_i, x> + k c_i), exact.
  Rational total(0);
  Rational rk(k);
  std::vector<Rational> xr(p.dim);
  LatticeVector x(p.dim);
  auto accumulate = [&]() {
    if (!p.contains_lattice_point(x, k)) return;
    for (int i = 0; i < p.dim; ++i) xr[i] = Rational(x[i]) / rk;
    total += rk * tc.weight(xr);
  };
  if (p.dim == 1) {
    for (x[0] = lo[0]; x[0] <= hi[0]; ++x[0]) accumulate();
  } else if (p.dim == 2) {
    for (x[0] = lo[0]; x[0] <= hi[0]; ++x[0])
      for (x[1] = lo[1]; x[1] <= hi[1]; ++x[1]) accumulate();
  } else {
    for (x[0] = lo[0]; x[0] <= hi[0]; ++x[0])
      for (x[1] = lo[1]; x[1] <= hi[1]; ++x[1])
        for (x[2] = lo[2]; x[2] <= hi[2]; ++x[2]) accumulate();
  }
  return total;
}

namespace {

// Exact Vandermonde solve, degree m-1 through m points.
std::vector<Rational> interpolate_rational(const std::vector<long long>& xs,
                                           const std::vector<Rational>& ys) {
  const size_t m = xs.size();
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1));
  for (size_t i = 0; i < m; ++i) {
    Rational pw(1);
    for (size_t j = 0; j < m; ++j) {
      a[i][j] = pw;
      pw *= Rational(xs[i]);
    }
    a[i][m] = ys[i];
  }
  for (size_t col = 0; col < m; ++col) {
    size_t piv = col;
    while (piv < m && a[piv][col].is_zero()) ++piv;
    if (piv == m) throw SolverError("weight fit: singular system");
    std::swap(a[col], a[piv]);
    for (size_t r = 0; r < m; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      Rational factor = a[r][col] / a[col][col];
      for (size_t c = col; c <= m; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<Rational> out(m);
  for (size_t i = 0; i < m; ++i) out[i] = a[i][m] / a[i][i];
  return out;
}

}  // namespace

WeightCoefficients weight_coefficients(const ToricTestConfiguration& tc) {
  const int n = tc.base_polytope.dim;
  // Weight trace is a degree-(n+1) polynomial in k; fit on n+2 points,
  // verify on a held-out one.
  std::vector<long long> ks;
  std::vector<Rational> ys;
  for (long long k = 1; k <= n + 2; ++k) {
    ks.push_back(k);
    ys.push_back(weight_trace(tc, k));
  }
  auto coeffs = interpolate_rational(ks, ys);
  Rational held = weight_trace(tc, n + 3);
  Rational pred(0), pw(1);
  for (const auto& c : coeffs) {
    pred += c * pw;
    pw *= Rational(n + 3);
  }
  if (pred != held)
    throw SolverError("weight_coefficients: trace is not polynomial of degree n+1");
  WeightCoefficients w;
  w.b0 = coeffs[n + 1];
  w.b1 = coeffs[n];
  return w;
}

std::string to_string(DFVerdict v) {
  switch (v) {
    case DFVerdict::kStableDirection: return "stable-direction";
    case DFVerdict::kUnstableDirection: return "unstable-direction";
    case DFVerdict::kZero: return "zero";
  }
  return "?";
}

DFReport donaldson_futaki(const ToricTestConfiguration& tc) {
  DFReport r;
  r.hilbert = hilbert_coefficients(tc.base_polytope);
  r.weight = weight_coefficients(tc);
  r.futaki = Rational(2) *
             (r.hilbert.a1 * r.weight.b0 - r.hilbert.a0 * r.weight.b1) /
             r.hilbert.a0;
  r.verdict = r.futaki.is_zero()
                  ? DFVerdict::kZero
                  : (r.futaki.sign() > 0 ? DFVerdict::kStableDirection
                                         : DFVerdict::kUnstableDirection);
  return r;
}

Rational eta_constant(const LatticePolytope& p) {
  ToricDegrees d = toric_degrees(p);
  if (d.L_degree.is_zero()) throw ValidationError("eta_constant: L degree is zero");
  return Rational(p.dim) * d.anticanonical_degree / d.L_degree;
}

Rational cm_degree(const CMPushforwardData& data, const Rational& eta) {
  Rational two_pow(1);
  for (int i = 0; i <= data.n; ++i) two_pow *= Rational(2);
  return two_pow * (Rational(data.n + 1) * data.relcanonical_term +
                    eta * data.polarization_term);
}

}  // namespace klab
