#pragma once

#include <vector>

namespace klab {

/// Uniform grid in s = log|z|^2 on [-S, S].
struct RadialGrid {
  double S = 26.0;
  int nodes = 2048;

  double h() const { return 2.0 * S / (nodes - 1); }
  double s(int j) const { return -S + j * h(); }
  bool operator==(const RadialGrid& o) const {
    return S == o.S && nodes == o.nodes;
  }
};

/// Cone angles 2*pi*beta at z = 0 and z = infinity. beta in (0,1]; beta = 0 is
/// accepted by the profile type for cylindrical ends, the solvers require > 0.
struct ConeData {
  double beta0 = 1.0;
  double beta_inf = 1.0;
};

/// Rotationally reduced Kahler metric on the sphere:
/// omega = sqrt(-1) f(s) dz ^ dzbar / |z|^2, area form f(s) ds dtheta.
/// Invariants: f > 0; f e^{-beta0 s} and f e^{beta_inf s} settle to positive
/// constants at the ends (5% over the outermost three nodes); total_area is
/// the trapezoid quadrature 2*pi*int f ds of its own samples.
struct RadialProfile {
  RadialGrid grid;
  std::vector<double> density;
  ConeData cone;
  double total_area = 0.0;

  static RadialProfile from_density(RadialGrid grid, std::vector<double> f,
                                    ConeData cone);

  /// Recomputed area quadrature (must match total_area to 1e-8).
  double area_quadrature() const;

  std::vector<double> log_density() const;
};

/// Trapezoid quadrature of 2*pi*int f ds.
double radial_area(const RadialGrid& grid, const std::vector<double>& f);

struct CurvatureSamples {
  std::vector<double> ricci;  // reduced Ricci density -(log f)''
  std::vector<double> scal;   // ricci / f (the Gauss curvature)
};

/// Fourth-order second differences of log f; one-sided at the two outermost
/// nodes on each end.
CurvatureSamples ricci_and_scal(const RadialProfile& p);

/// Quadrature of the Gauss curvature against the area form; equals
/// 2*pi*(beta0 + beta_inf) for converged conical profiles.
double gauss_bonnet(const RadialProfile& p);

/// Closed-form round (Fubini-Study) reduction with Ric = omega:
/// f(s) = 2 e^s / (1 + e^s)^2.
RadialProfile round_profile(const RadialGrid& grid);

/// Closed-form constant-curvature football with equal angles beta:
/// f(s) = 2 beta^2 e^{beta s} / (1 + e^{beta s})^2.
RadialProfile football_profile(double beta, const RadialGrid& grid);

/// Density of the reference profile with prescribed end slopes; the exact
/// football when beta0 == beta_inf. Used as a Newton seed.
std::vector<double> reference_density(const RadialGrid& grid, ConeData cone,
                                      double lambda);

}  // namespace klab
