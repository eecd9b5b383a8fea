#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kahlerlab/linalg.hpp"
#include "kahlerlab/psh.hpp"
#include "kahlerlab/radial.hpp"

namespace klab {

enum class FamilyKind { kTorus, kIsotrivial, kSphere };

FamilyKind family_kind_from_name(const std::string& name);
std::string to_string(FamilyKind k);

/// Modulus map presets: affine tau(s) = tau0 + slope * s, or the mixed
/// construction tau0 + slope * s^2 on {Re s > 0} glued to the constant tau0
/// (isotrivial on the left half; holomorphy holds per piece and the
/// Cauchy-Riemann validation skips the seam column).
struct TauPreset {
  Complex tau0{0.0, 1.0};
  Complex slope{0.0, 0.0};
  bool mixed = false;
};

struct BaseGrid {
  Complex center{0.0, 0.0};
  double half_width = 0.25;
  int samples = 9;
};

struct FamilyDescriptor {
  FamilyKind kind = FamilyKind::kTorus;
  TauPreset tau;
  BaseGrid base;
  int fiber_resolution = 24;

  static FamilyDescriptor validated(FamilyDescriptor f);

  Complex tau_at(Complex s) const;
  /// Internal difference spacing for base derivatives; tied to the family's
  /// resolution knob so one refinement refines every numerical route.
  double stencil_h() const { return 0.5 / fiber_resolution; }
};

/// Fiberwise Kahler-Einstein (flat for torus fibers) data per base point.
struct SemiKEMetric {
  FamilyKind kind = FamilyKind::kTorus;
  std::vector<Complex> base_points;
  std::vector<double> fiber_metric_density;  // torus: 1/(2 Im tau) per point
  std::vector<double> fiber_residual;        // per-fiber equation residual
  double max_fiber_residual = 0.0;
  double fiberwise_constant = 0.0;           // 0 for flat fibers, 1 for KE spheres
  std::optional<RadialProfile> sphere_profile;
};

SemiKEMetric fiberwise_ke(const FamilyDescriptor& fam);

struct WPSample {
  Complex s;
  double wp_density = 0.0;  // coefficient of sqrt(-1) ds ^ ds_bar
  double ks_norm = 0.0;     // integral of |A|^2 over the fiber
};

/// Weil-Petersson density via the harmonic Kodaira-Spencer norm
/// (closed-form representative, fiber quadrature, base differences for tau').
WPSample wp_via_ks_norm(const FamilyDescriptor& fam, Complex s);

/// Weil-Petersson density as the curvature fiber integral of the semi-flat
/// fiberwise-KE form (the Hodge-norm route: no tau' enters; everything is
/// fiber quadratures differentiated over a 3x3 base stencil). Cross-checked
/// against the KS-norm route.
WPSample wp_fiber_integral(const FamilyDescriptor& fam, Complex s);

struct FoliationEntry {
  Complex s;
  int null_rank = 0;   // null directions of the horizontal block
  int fiber_dim = 1;
  bool full_rank_null = false;  // null rank == fiber dimension
};

FoliationEntry foliation_rank(const FamilyDescriptor& fam, Complex s);

enum class CurvatureRegime { kFanoBase, kGeneralTypeBase };

using TotalMetricSampler = std::function<HermitianMatrix(Complex, Complex)>;
using ScalarField = std::function<double(Complex)>;

struct ProductPatch {
  Complex s_center{0.0, 0.0};
  double s_half_width = 0.1;
  int s_samples = 9;
  Complex w_center{0.5, 0.3};
  double w_half_width = 0.1;
  int w_samples = 5;
};

struct PoleTerm {
  Complex center;
  double coefficient = 0.0;
};

/// sup-norm over the patch of Ric(omega_X) - (+-omega_B) - omega_WP, all
/// components; the sign comes from the declared regime. Pole terms are
/// distributional and the patch must avoid them.
double relative_ke_residual(const TotalMetricSampler& total,
                            const ScalarField& base_density,
                            const ScalarField& wp_density,
                            const std::vector<PoleTerm>& poles,
                            CurvatureRegime regime, const ProductPatch& patch);

/// Canned torus-family construction whose continuum identity
/// Ric = -omega_B + omega_WP is exact: total = pi* g_can + semi-flat form,
/// base = g_can + 2 wp, wp numeric. Returns the residual on the patch.
double torus_family_relative_residual(const FamilyDescriptor& fam,
                                      const ProductPatch& patch);

/// Flat x flat product control (residual at round-off).
double product_relative_residual(const ProductPatch& patch);

/// Schumacher-Berman horizontal identity -Lap c - c = |A|^2 on the fiber
/// over s; returns the sup residual relative to sup|A|^2.
double horizontal_c_residual(const FamilyDescriptor& fam, Complex s);

/// Fiberwise flat measure density at the family's central fiber, the
/// reference measure for the relative alpha-invariant (kappa = fiber
/// dimension, unit section metric).
VolumeDensity berndtsson_fiber_density(const FamilyDescriptor& fam);

}  // namespace klab
