#pragma once

#include <vector>

#include "kahlerlab/radial.hpp"

namespace klab {

struct SolveOptions {
  // S large enough that truncated cone tails (~2 e^{-beta S}) sit well below
  // the 1e-4 Gauss-Bonnet tolerance at beta = 1/2.
  RadialGrid grid{26.0, 2048};
  // The residual evaluation has a round-off floor ~ eps*|u|/h^2, so the
  // target is modest and an Armijo stall within 100*tol still counts as
  // converged. Acceptance-level bounds (1e-8) sit above both.
  double tol = 1e-10;
  int max_iter = 60;
  int max_restarts = 5;     // Armijo halvings per Newton step
  double total_area = 0.0;  // 0 = natural area 2*pi*(beta0+beta_inf)
};

struct KESolveResult {
  RadialProfile profile;
  int iterations = 0;
  double residual = 0.0;
  double lambda = 1.0;          // solves Ric(omega) = lambda * omega
  double end_slope_error = 0.0; // achieved vs requested slope at +S
};

/// Damped Newton on the reduced equation u'' + lambda e^u = 0 (u = log f),
/// Numerov interior, asymptote-corrected Robin condition at -S and an
/// area-centroid gauge. Unequal angles converge to the wrong end slope
/// (energy conservation forces equal slopes) and raise
/// ObstructionSuspectedError.
KESolveResult ke_solve_radial(ConeData cone, const SolveOptions& opts = {});

struct SolitonData {
  double vector_field_coefficient = 0.0;  // X = a z d/dz
  std::vector<double> theta;              // theta_X on the grid
};

struct SolitonResult {
  RadialProfile profile;
  SolitonData soliton;
  int iterations = 0;
  double residual = 0.0;
  double lambda = 1.0;
};

/// Reduced soliton equation u'' + lambda e^u + a e^u u' = 0 with theta_X from
/// the contraction identity (theta' = a f). With coefficient_search the field
/// coefficient a is a Newton unknown closing both end slopes; without it a is
/// fixed at the supplied value.
SolitonResult soliton_solve_radial(ConeData cone, bool coefficient_search,
                                   double fixed_coefficient = 0.0,
                                   const SolveOptions& opts = {});

/// Pointwise sup residual of the reduced soliton equation on a given profile
/// (central differences). An optional source term is subtracted node-wise:
/// injecting the discrete defect of a manufactured profile must return zero
/// up to round-off (same-discretization identity).
double soliton_equation_residual(const RadialProfile& p, double a, double lambda,
                                 const std::vector<double>& source = {});

struct ContinuityPath {
  std::vector<double> epsilon_schedule;   // strictly decreasing, positive
  std::vector<double> psi_plus_poles;     // a_i > 0, log poles at z = 0
  std::vector<double> psi_minus_poles;    // 0 < b_j < 1 (klt)

  static ContinuityPath validated(ContinuityPath p, double base_beta0);
  static std::vector<double> default_schedule();  // 10^{-1} .. 10^{-6}
};

struct ContinuityStep {
  double epsilon = 0.0;
  double residual = 0.0;       // density-equation residual after the solve
  int newton_iterations = 0;
  double c0_bound = 0.0;       // sup |psi_eps|
  double sup_distance = 0.0;   // sup |f_eps - f_prev| (0 for the first step)
};

struct ContinuityResult {
  RadialProfile final_profile;
  std::vector<ContinuityStep> steps;
  bool converged_all = true;
  int failure_index = -1;
  double effective_angle_at_origin = 0.0;  // beta0 + sum a_i - sum b_j
};

/// For each epsilon solves the regularized twisted equation
/// f_ref + psi'' = e^{psi_+ - psi_-} f_ref (poles smoothed as log(e^s + eps))
/// by damped Newton warm-started from the previous epsilon; the returned
/// density is reconstructed from the solved potential.
ContinuityResult continuity_path_run(const ContinuityPath& path,
                                     const RadialProfile& initial);

}  // namespace klab
