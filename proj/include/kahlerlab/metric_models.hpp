#pragma once

#include <functional>
#include <vector>

#include "kahlerlab/linalg.hpp"

namespace klab {

/// Model conic metric with angle 2*pi*beta transverse to {z1 = 0}:
/// diagonal |z1|^{-2(1-beta)}, 1, ..., 1 in the sqrt(-1) dz_i ^ dz_bar_i basis.
struct ConicalModelMetric {
  double beta = 0.5;  // in (0,1); beta = 1 is the smooth limit
  int n = 1;

  static ConicalModelMetric validated(ConicalModelMetric m);
};

enum class FibrewiseKind { kPoincare, kConical };

/// Fibrewise model over a base parameter t, |t| in (0,1): diagonal Poincare
/// or conical part plus the rank-one correction (1/pi) L^{-2} (1/z_j)(1/z_bar_k),
/// L = log|t|^2 - sum_k log|z_k|^2. All z_k are fiber coordinates.
struct FibrewiseModelMetric {
  FibrewiseKind kind = FibrewiseKind::kPoincare;
  int n = 1;  // fiber dimension
  Complex t = Complex(0.1, 0.0);

  static FibrewiseModelMetric validated(FibrewiseModelMetric m);
};

struct MetricSample {
  std::vector<Complex> point;
  HermitianMatrix matrix;
};

MetricSample eval_conical_model(const ConicalModelMetric& m,
                                const std::vector<Complex>& z);

MetricSample eval_fibrewise_model(const FibrewiseModelMetric& m,
                                  const std::vector<Complex>& z);

using MetricSampler =
    std::function<HermitianMatrix(const std::vector<Complex>&)>;

/// Deterministic sample region: moduli |z_k| log-spaced over
/// [abs_min, abs_max] with fixed phases; avoids the singular locus by
/// construction when abs_min > 0.
struct SampleRegion {
  int n = 1;
  double abs_min = 0.05;
  double abs_max = 0.8;
  int samples_per_axis = 8;
  std::vector<std::vector<Complex>> points() const;
};

struct QuasiIsometryResult {
  double c_low = 0.0;
  double c_high = 0.0;
  int refinements = 0;
};

/// Extremal generalized-eigenvalue ratios of candidate against model over the
/// region grid; the grid doubles until the constants move less than 1%.
QuasiIsometryResult quasi_isometry_constants(const MetricSampler& model,
                                             const MetricSampler& candidate,
                                             SampleRegion region);

}  // namespace klab
