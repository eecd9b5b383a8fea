#include "kahlerlab/flow.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kahlerlab/errors.hpp"

namespace klab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Numerov residual of u'' + phi e^u at interior nodes, matching the Newton
// solver's stationary equation.
void stationary_residual(const RadialGrid& g, const std::vector<double>& u,
                         const std::vector<double>& e, double phi,
                         std::vector<double>& r) {
  const int n = g.nodes;
  const double h = g.h();
  r.assign(n, 0.0);
  for (int j = 1; j + 1 < n; ++j)
    r[j] = (u[j - 1] - 2 * u[j] + u[j + 1]) / (h * h) +
           phi * (e[j - 1] + 10 * e[j] + e[j + 1]) / 12.0;
}

// Solves the discrete Robin condition for the boundary node (scalar Newton).
void project_boundary(const RadialGrid& g, std::vector<double>& u,
                      const ConeData& cone, double phi) {
  const double h = g.h();
  const int n = g.nodes;
  for (int it = 0; it < 3; ++it) {
    double e0 = std::exp(u[0]);
    double f = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h) - cone.beta0 +
               phi * e0 / cone.beta0;
    double df = -3 / (2 * h) + phi * e0 / cone.beta0;
    u[0] -= f / df;
  }
  for (int it = 0; it < 3; ++it) {
    double en = std::exp(u[n - 1]);
    double f = (3 * u[n - 1] - 4 * u[n - 2] + u[n - 3]) / (2 * h) +
               cone.beta_inf - phi * en / cone.beta_inf;
    double df = 3 / (2 * h) - phi * en / cone.beta_inf;
    u[n - 1] -= f / df;
  }
}

double area_of(const RadialGrid& g, const std::vector<double>& e) {
  double sum = 0.5 * (e.front() + e.back());
  for (int j = 1; j + 1 < g.nodes; ++j) sum += e[j];
  return kTwoPi * sum * g.h();
}

double sup_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double flow_residual_norm(const RadialGrid& grid,
                          const std::vector<double>& density, double phi) {
  const int n = grid.nodes;
  std::vector<double> u(n), e(n), r(n);
  for (int j = 0; j < n; ++j) {
    e[j] = density[j];
    u[j] = std::log(density[j]);
  }
  stationary_residual(grid, u, e, phi, r);
  return sup_abs(r);
}

double flow_stable_dt(const RadialProfile& state, double phi) {
  double fmin = state.density[0];
  for (double v : state.density) fmin = std::min(fmin, v);
  (void)phi;  // the bound is set by the diffusive term
  double h = state.grid.h();
  return 0.4 * h * h * fmin;
}

FlowResult kr_flow_run(const RadialProfile& initial, double phi, double t_end,
                       double dt, int snapshots) {
  if (!(dt > 0) || !(t_end > 0))
    throw ValidationError("kr_flow_run: dt and t_end must be positive");
  if (!(phi > 0))
    throw ValidationError("kr_flow_run: phi must be positive for the normalized flow");
  const RadialGrid g = initial.grid;
  const int n = g.nodes;
  const long long steps = static_cast<long long>(std::ceil(t_end / dt));
  const long long snap_every = std::max<long long>(1, steps / std::max(snapshots, 1));

  std::vector<double> u = initial.log_density();
  std::vector<double> e(n), r(n);
  const double area0 = initial.total_area;

  FlowResult out;
  auto record = [&](double t) {
    FlowState st;
    st.time = t;
    st.density.resize(n);
    for (int j = 0; j < n; ++j) st.density[j] = std::exp(u[j]);
    st.residual_norm = flow_residual_norm(g, st.density, phi);
    out.states.push_back(std::move(st));
    return out.states.back().residual_norm;
  };
  record(0.0);

  for (long long step = 1; step <= steps; ++step) {
    for (int j = 0; j < n; ++j) e[j] = std::exp(u[j]);
    stationary_residual(g, u, e, phi, r);
    for (int j = 1; j + 1 < n; ++j) u[j] += dt * r[j] / e[j];
    project_boundary(g, u, initial.cone, phi);
    // renormalize the area to its initial value
    for (int j = 0; j < n; ++j) e[j] = std::exp(u[j]);
    double area = area_of(g, e);
    if (!std::isfinite(area) || area <= 0)
      throw SolverError("kr_flow_run: flow singularity at t = " +
                        std::to_string(step * dt));
    double shift = std::log(area0 / area);
    for (int j = 0; j < n; ++j) u[j] += shift;

    double t = step * dt;
    bool snap = (step % snap_every == 0) || step == steps;
    if (step <= 12 || snap) {
      for (int j = 0; j < n; ++j) e[j] = std::exp(u[j]);
      stationary_residual(g, u, e, phi, r);
      double res = sup_abs(r);
      if (!std::isfinite(res) || res > 1e6)
        throw SolverError("kr_flow_run: instability (residual blow-up) at t = " +
                          std::to_string(t));
      if (step <= 12) out.early_residuals.push_back(res);
      if (snap) record(t);
    }
    for (double v : u)
      if (!std::isfinite(v))
        throw SolverError("kr_flow_run: flow singularity at t = " +
                          std::to_string(t));
  }
  out.final_time = steps * dt;
  std::vector<double> f(n);
  for (int j = 0; j < n; ++j) f[j] = std::exp(u[j]);
  out.final_profile = RadialProfile::from_density(g, std::move(f), initial.cone);
  out.area_drift_per_unit_time =
      std::abs(out.final_profile.total_area - area0) / out.final_time;
  return out;
}

}  // namespace klab
