#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace klab {

/// Complex point in dimension 1 or 2, stored as interleaved re/im pairs.
using CPoint = std::vector<double>;  // size 2*dim

enum class SmoothPreset { kZero, kQuadratic, kRe, kGauss, kLogOnePlus };

SmoothPreset smooth_preset_from_name(const std::string& name);
std::string to_string(SmoothPreset p);

/// lambda * log|z - center|^2 contribution.
struct LogPole {
  CPoint center;
  double lambda = 0.0;
};

/// Algebraic singularity (1/m) log(sum_i |z^{a_i}|^2); dimension 1, monomials
/// in z, singular locus at the origin.
struct AlgebraicPart {
  int m = 1;
  std::vector<int> monomial_orders;
};

/// A plurisubharmonic-type local weight: declared log poles, an optional
/// algebraic part, and a bounded smooth remainder from a named preset.
struct PshWeight {
  int dim = 1;  // complex dimension, 1 or 2
  std::vector<LogPole> poles;
  std::optional<AlgebraicPart> algebraic;
  SmoothPreset smooth = SmoothPreset::kZero;
  double smooth_scale = 1.0;
  double domain_radius = 2.0;

  static PshWeight validated(PshWeight w);

  /// Value at z (off the singular centers).
  double value(const CPoint& z) const;
  /// Trace complex Hessian sum_k d2/dz_k dz_bar_k of the non-atomic part.
  double smooth_trace_hessian(const CPoint& z) const;
  /// Lelong coefficient carried by declared singular data at a point.
  double atom_at(const CPoint& p) const;
};

/// Normalized mass of dd^c w on the r-ball about p; declared atoms analytic,
/// smooth remainder by quadrature. Normalization: dd^c log|z-p|^2 has unit
/// mass, i.e. density = trace Hessian / pi^dim.
double mass_ratio(const PshWeight& w, const CPoint& p, double r);

struct LelongEstimate {
  double value = 0.0;             // extrapolated mass-ratio limit
  std::vector<double> r_schedule;
  double slope_value = 0.0;       // least-squares slope against log|z-p|^2
};

LelongEstimate lelong_number(const PshWeight& w, const CPoint& p);

/// Optional density multiplying Lebesgue measure; empty = Lebesgue.
using VolumeDensity = std::function<double(const CPoint&)>;

struct ThresholdEstimate {
  double threshold = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool open_bracket = false;  // finite for every tested alpha up to alpha_max
};

struct ThresholdOptions {
  double alpha_max = 8.0;
  double bracket_rel_width = 0.02;
  double divergence_ratio = 1.05;
};

/// Bisection on alpha for finiteness of int e^{-alpha (w - sup w)} dV, judged
/// by stabilization of dyadic shell refinements near the singular centers.
ThresholdEstimate integrability_threshold(const PshWeight& w,
                                          const VolumeDensity& reference = {},
                                          const ThresholdOptions& opts = {});

enum class AlphaMode { kAbsolute, kRelative };

struct AlphaReport {
  ThresholdEstimate estimate;
  AlphaMode mode = AlphaMode::kAbsolute;
  int fiber_dim = 1;
  bool criterion_evaluated = false;
  bool criterion_holds = false;  // threshold > n/(n+1), relative mode only
};

AlphaReport alpha_over_family(const std::vector<PshWeight>& weights,
                              const VolumeDensity& reference = {},
                              AlphaMode mode = AlphaMode::kAbsolute,
                              int fiber_dim = 1,
                              const ThresholdOptions& opts = {});

}  // namespace klab
