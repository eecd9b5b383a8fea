#pragma once

#include <vector>

#include "kahlerlab/radial.hpp"

namespace klab {

struct FlowState {
  double time = 0.0;
  double residual_norm = 0.0;  // recomputed sup of the stationary residual
  std::vector<double> density;
};

struct FlowResult {
  std::vector<FlowState> states;             // snapshots, initial included
  std::vector<double> early_residuals;       // first steps, for transient checks
  double area_drift_per_unit_time = 0.0;     // |area(final) - area(0)| / t_end
  double final_time = 0.0;
  RadialProfile final_profile;
};

/// Largest explicit-Euler step the stepper declares stable for this state:
/// 0.4 h^2 min f (the reduced diffusivity is 1/f).
double flow_stable_dt(const RadialProfile& state, double phi);

/// Sup of the stationary residual of a state; the same code path the flow
/// uses when recording states, so recomputation is bitwise reproducible.
double flow_residual_norm(const RadialGrid& grid, const std::vector<double>& density,
                          double phi);

/// Normalized reduced Kahler-Ricci flow du/dt = e^{-u}(u'' + phi e^u) with
/// the same Numerov spatial residual as the Newton solver (shared fixed
/// points), Robin boundary projection each step and area renormalization to
/// the initial area. Blow-up (nonfinite state or residual explosion) raises
/// SolverError with the time stamp.
FlowResult kr_flow_run(const RadialProfile& initial, double phi, double t_end,
                       double dt, int snapshots = 60);

}  // namespace klab
