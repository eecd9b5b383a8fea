#include "kahlerlab/metric_models.hpp"

#include <cmath>
#include <numbers>

#include "kahlerlab/errors.hpp"

namespace klab {

namespace {
constexpr double kPi = std::numbers::pi;
}

ConicalModelMetric ConicalModelMetric::validated(ConicalModelMetric m) {
  if (!(m.beta > 0.0 && m.beta <= 1.0))
    throw ValidationError("conical model: beta must lie in (0, 1]");
  if (m.n < 1 || m.n > 3)
    throw ValidationError("conical model: dimension must be 1..3");
  return m;
}

FibrewiseModelMetric FibrewiseModelMetric::validated(FibrewiseModelMetric m) {
  double at = std::abs(m.t);
  if (!(at > 0.0 && at < 1.0))
    throw ValidationError("fibrewise model: |t| must lie in (0,1), t != 0");
  if (m.n < 1 || m.n > 3)
    throw ValidationError("fibrewise model: fiber dimension must be 1..3");
  return m;
}

MetricSample eval_conical_model(const ConicalModelMetric& m,
                                const std::vector<Complex>& z) {
  ConicalModelMetric mv = ConicalModelMetric::validated(m);
  if (static_cast<int>(z.size()) != mv.n)
    throw ValidationError("conical model: point dimension mismatch");
  if (std::abs(z[0]) == 0.0)
    throw ValidationError("conical model: point lies on the singular locus z1 = 0");
  MetricSample s;
  s.point = z;
  s.matrix = HermitianMatrix::identity(mv.n);
  s.matrix.at(0, 0) = std::pow(std::abs(z[0]), -2.0 * (1.0 - mv.beta));
  return s;
}

MetricSample eval_fibrewise_model(const FibrewiseModelMetric& m,
                                  const std::vector<Complex>& z) {
  FibrewiseModelMetric mv = FibrewiseModelMetric::validated(m);
  if (static_cast<int>(z.size()) != mv.n)
    throw ValidationError("fibrewise model: point dimension mismatch");
  double L = std::log(std::norm(mv.t));
  for (const auto& zk : z) {
    double a = std::abs(zk);
    if (a == 0.0)
      throw ValidationError("fibrewise model: undefined at z_k = 0");
    if (mv.kind == FibrewiseKind::kPoincare && a >= 1.0)
      throw ValidationError("fibrewise model: poincare kind needs 0 < |z_k| < 1");
    L -= std::log(std::norm(zk));
  }
  if (L == 0.0)
    throw ValidationError("fibrewise model: undefined where log|t|^2 = sum log|z_k|^2");
  MetricSample s;
  s.point = z;
  s.matrix = HermitianMatrix(mv.n);
  for (int j = 0; j < mv.n; ++j) {
    double n2 = std::norm(z[j]);
    double diag = mv.kind == FibrewiseKind::kPoincare
                      ? 1.0 / (kPi * n2 * std::pow(std::log(n2), 2))
                      : 1.0 / (kPi * n2);
    s.matrix.at(j, j) += diag;
  }
  double corr = 1.0 / (kPi * L * L);
  for (int j = 0; j < mv.n; ++j)
    for (int k = 0; k < mv.n; ++k)
      s.matrix.at(j, k) += corr / (z[j] * std::conj(z[k]));
  return s;
}

std::vector<std::vector<Complex>> SampleRegion::points() const {
  if (!(abs_min > 0.0) || !(abs_max > abs_min))
    throw ValidationError("sample region: need 0 < abs_min < abs_max");
  if (n < 1 || n > 3) throw ValidationError("sample region: dimension must be 1..3");
  std::vector<std::vector<Complex>> pts;
  const int m = samples_per_axis;
  // fixed phase ladder keeps the grid deterministic and off symmetry axes
  auto phase = [](int i) { return 0.37 + 2.399963229728653 * i; };
  std::vector<int> idx(n, 0);
  while (true) {
    std::vector<Complex> z(n);
    for (int d = 0; d < n; ++d) {
      double fr = m == 1 ? 0.5 : static_cast<double>(idx[d]) / (m - 1);
      double r = abs_min * std::pow(abs_max / abs_min, fr);
      z[d] = std::polar(r, phase(idx[d] + 3 * d));
    }
    pts.push_back(std::move(z));
    int d = 0;
    while (d < n && ++idx[d] == m) idx[d++] = 0;
    if (d == n) break;
  }
  return pts;
}

QuasiIsometryResult quasi_isometry_constants(const MetricSampler& model,
                                             const MetricSampler& candidate,
                                             SampleRegion region) {
  QuasiIsometryResult prev{0, 0, 0};
  for (int refine = 0; refine < 5; ++refine) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& z : region.points()) {
      HermitianMatrix a = candidate(z);
      HermitianMatrix b = model(z);
      if (!a.is_positive_definite())
        throw SolverError("quasi_isometry: candidate metric is not positive on the region");
      auto [emin, emax] = generalized_eigenvalue_extremes(a, b);
      lo = std::min(lo, emin);
      hi = std::max(hi, emax);
    }
    QuasiIsometryResult cur{lo, hi, refine};
    if (refine > 0) {
      double move = std::max(std::abs(cur.c_low - prev.c_low) /
                                 std::max(std::abs(prev.c_low), 1e-300),
                             std::abs(cur.c_high - prev.c_high) /
                                 std::max(std::abs(prev.c_high), 1e-300));
      if (move < 0.01) return cur;
    }
    prev = cur;
    region.samples_per_axis *= 2;
  }
  return prev;
}

}  // namespace klab
