#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/flow.hpp"
#include "kahlerlab/ma_solvers.hpp"
#include "kahlerlab/radial.hpp"

using namespace klab;

namespace {
constexpr double kPi = std::numbers::pi;

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
}  // namespace

TEST_CASE("round profile: area and curvature identities") {
  // area of the Ric = omega sphere is 4 pi, up to exponential tails
  RadialGrid wide{20.0, 2048};
  auto pw = round_profile(wide);
  CHECK(pw.total_area == doctest::Approx(4 * kPi).epsilon(1e-6));
  CHECK(pw.area_quadrature() == doctest::Approx(pw.total_area).epsilon(1e-14));

  // Scal == 1 away from 3 boundary nodes; a moderate S keeps the 1/f
  // division away from the round-off floor
  RadialGrid g{6.0, 2048};
  auto p = round_profile(g);
  auto curv = ricci_and_scal(p);
  for (int j = 3; j < g.nodes - 3; ++j)
    CHECK(std::abs(curv.scal[j] - 1.0) < 1e-6);
}

TEST_CASE("flat cylinder profile has zero scal") {
  RadialGrid g{5.0, 128};
  std::vector<double> f(g.nodes, 0.7);
  auto p = RadialProfile::from_density(g, f, {0.0, 0.0});
  auto curv = ricci_and_scal(p);
  for (int j = 0; j < g.nodes; ++j) CHECK(std::abs(curv.scal[j]) < 1e-12);
}

TEST_CASE("scaled round profile halves scal") {
  RadialGrid g{6.0, 1024};
  auto p = round_profile(g);
  std::vector<double> f2 = p.density;
  for (double& v : f2) v *= 2.0;
  auto p2 = RadialProfile::from_density(g, f2, p.cone);
  auto c1 = ricci_and_scal(p);
  auto c2 = ricci_and_scal(p2);
  for (int j = 5; j < g.nodes - 5; j += 97)
    CHECK(c2.scal[j] == doctest::Approx(0.5 * c1.scal[j]).epsilon(1e-9));
}

TEST_CASE("gauss-bonnet on closed-form profiles") {
  RadialGrid g{20.0, 2048};
  for (double beta : {1.0, 0.75, 0.5}) {
    auto p = football_profile(beta, g);
    double gb = gauss_bonnet(p);
    double expect = 2 * kPi * 2 * beta;
    CHECK(std::abs(gb - expect) / expect < 1e-4);
  }
}

TEST_CASE("profile validation enforces the declared invariants") {
  RadialGrid g{20.0, 256};
  std::vector<double> bad(g.nodes, 1.0);
  bad[10] = -0.5;
  CHECK_THROWS_AS(RadialProfile::from_density(g, bad, {0.0, 0.0}),
                  ValidationError);
  // round density declared with the wrong cone angles fails the asymptote
  auto p = round_profile(g);
  CHECK_THROWS_AS(RadialProfile::from_density(g, p.density, {0.5, 0.5}),
                  ValidationError);
}

TEST_CASE("ke solver reproduces the round sphere") {
  auto res = ke_solve_radial({1.0, 1.0});
  CHECK(res.residual <= 1e-8);
  auto exact = round_profile(res.profile.grid);
  CHECK(sup_diff(res.profile.density, exact.density) <= 1e-6);
  CHECK(res.lambda == doctest::Approx(1.0));
}

TEST_CASE("ke solver reproduces the football") {
  auto res = ke_solve_radial({0.5, 0.5});
  CHECK(res.residual <= 1e-8);
  auto exact = football_profile(0.5, res.profile.grid);
  CHECK(sup_diff(res.profile.density, exact.density) <= 1e-4);
}

TEST_CASE("ke solver flags the teardrop as obstruction-suspected") {
  CHECK_THROWS_AS(ke_solve_radial({1.0, 0.5}), ObstructionSuspectedError);
}

TEST_CASE("ke solver rejects invalid cone data") {
  CHECK_THROWS_AS(ke_solve_radial({0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(ke_solve_radial({1.0, 1.5}), ValidationError);
}

TEST_CASE("ke solver honors a custom normalization") {
  SolveOptions opts;
  opts.total_area = kPi;  // half the natural area 2*pi: lambda = 2
  auto res = ke_solve_radial({0.5, 0.5}, opts);
  CHECK(res.lambda == doctest::Approx(2.0));
  // the grid truncates the exponential tails, hence the loose tolerance
  CHECK(res.profile.total_area == doctest::Approx(kPi).epsilon(1e-3));
}

TEST_CASE("gauss-bonnet holds on solver output") {
  for (double beta : {1.0, 0.75, 0.5}) {
    auto res = ke_solve_radial({beta, beta});
    double gb = gauss_bonnet(res.profile);
    double expect = 2 * kPi * 2 * beta;
    CHECK(std::abs(gb - expect) / expect < 1e-4);
  }
}

TEST_CASE("soliton on the sphere reduces to the round metric with a = 0") {
  auto res = soliton_solve_radial({1.0, 1.0}, true);
  CHECK(std::abs(res.soliton.vector_field_coefficient) <= 1e-6);
  auto exact = round_profile(res.profile.grid);
  // central scheme: second-order accurate fixed point
  CHECK(sup_diff(res.profile.density, exact.density) <= 5e-4);
  // theta_X is constant when a = 0
  double tmin = res.soliton.theta.front(), tmax = tmin;
  for (double t : res.soliton.theta) {
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  CHECK(tmax - tmin <= 1e-6);
}

TEST_CASE("theta potential obeys the contraction identity on the grid") {
  auto res = soliton_solve_radial({1.0, 1.0}, true);
  const auto& g = res.profile.grid;
  double h = g.h();
  for (int j = 1; j + 1 < g.nodes; j += 101) {
    double dtheta =
        (res.soliton.theta[j + 1] - res.soliton.theta[j - 1]) / (2 * h);
    double target = res.soliton.vector_field_coefficient * res.profile.density[j];
    CHECK(std::abs(dtheta - target) < 1e-8);
  }
}

TEST_CASE("manufactured soliton residual: same-discretization identity") {
  // inject the discrete defect of a manufactured (f*, a*) as the source;
  // the recomputed residual must vanish to round-off
  RadialGrid g{12.0, 1024};
  auto base = football_profile(0.8, g);
  std::vector<double> f = base.density;
  for (int j = 0; j < g.nodes; ++j)
    f[j] *= 1.0 + 0.07 * std::exp(-g.s(j) * g.s(j) / 8.0);
  auto p = RadialProfile::from_density(g, f, base.cone);
  const double a_star = 0.3, lambda = 1.0, h = g.h();
  std::vector<double> u = p.log_density();
  std::vector<double> source(g.nodes, 0.0);
  for (int j = 1; j + 1 < g.nodes; ++j) {
    double lap = (u[j - 1] - 2 * u[j] + u[j + 1]) / (h * h);
    double up = (u[j + 1] - u[j - 1]) / (2 * h);
    source[j] = lap + lambda * p.density[j] + a_star * p.density[j] * up;
  }
  CHECK(soliton_equation_residual(p, a_star, lambda, source) <= 1e-10);
  // and the residual definition is recomputed, not cached
  CHECK(soliton_equation_residual(p, a_star, lambda) ==
        soliton_equation_residual(p, a_star, lambda));
}

TEST_CASE("flow: stationary at the discrete KE profile") {
  SolveOptions opts;
  opts.grid = {6.0, 256};
  auto ke = ke_solve_radial({1.0, 1.0}, opts);
  double dt = flow_stable_dt(ke.profile, 1.0);
  auto run = kr_flow_run(ke.profile, 1.0, 0.05, dt, 5);
  for (const auto& st : run.states) CHECK(st.residual_norm <= 1e-7);
  CHECK(sup_diff(run.final_profile.density, ke.profile.density) <= 1e-8);
}

TEST_CASE("flow converges to the Newton profile from a 10% perturbation") {
  SolveOptions opts;
  opts.grid = {6.0, 256};
  auto ke = ke_solve_radial({1.0, 1.0}, opts);

  std::vector<double> f0 = ke.profile.density;
  for (int j = 0; j < opts.grid.nodes; ++j) {
    double s = opts.grid.s(j);
    f0[j] *= 1.0 + 0.1 * std::exp(-s * s / 4.0);
  }
  // area-match the perturbed state to the Newton area
  double a = radial_area(opts.grid, f0);
  for (double& v : f0) v *= ke.profile.total_area / a;
  auto initial = RadialProfile::from_density(opts.grid, f0, ke.profile.cone);

  double dt = flow_stable_dt(initial, 1.0);
  auto run = kr_flow_run(initial, 1.0, 8.0, dt, 40);

  CHECK(sup_diff(run.final_profile.density, ke.profile.density) <= 1e-5);
  CHECK(run.area_drift_per_unit_time <= 1e-6);
  // residual decreasing after the transient
  const auto& st = run.states;
  for (size_t i = 2; i + 1 < st.size(); ++i)
    CHECK(st[i + 1].residual_norm <= st[i].residual_norm * (1 + 1e-9) + 1e-13);
}

TEST_CASE("flow detects instability for an over-large step") {
  SolveOptions opts;
  opts.grid = {6.0, 128};
  auto ke = ke_solve_radial({1.0, 1.0}, opts);
  std::vector<double> f0 = ke.profile.density;
  for (double& v : f0) v *= 1.05;
  auto initial = RadialProfile::from_density(opts.grid, f0, ke.profile.cone);
  double dt = 2000.0 * flow_stable_dt(initial, 1.0);
  CHECK_THROWS_AS(kr_flow_run(initial, 1.0, 2.0, dt, 10), SolverError);
}

TEST_CASE("flow and newton agree for several cone angles") {
  for (double beta : {1.0, 0.75, 0.5}) {
    SolveOptions opts;
    opts.grid = {6.0, 192};
    auto ke = ke_solve_radial({beta, beta}, opts);
    std::vector<double> f0 = ke.profile.density;
    for (int j = 0; j < opts.grid.nodes; ++j) {
      double s = opts.grid.s(j);
      f0[j] *= 1.0 + 0.05 * std::exp(-s * s / 4.0);
    }
    double a = radial_area(opts.grid, f0);
    for (double& v : f0) v *= ke.profile.total_area / a;
    auto initial = RadialProfile::from_density(opts.grid, f0, ke.profile.cone);
    auto run = kr_flow_run(initial, 1.0, 8.0, flow_stable_dt(initial, 1.0), 10);
    CHECK(sup_diff(run.final_profile.density, ke.profile.density) <= 1e-5);
  }
}

TEST_CASE("continuity path: trivial twist returns the reference profile") {
  RadialGrid g{20.0, 1024};
  auto base = round_profile(g);
  ContinuityPath path;
  path.epsilon_schedule = ContinuityPath::default_schedule();
  auto out = continuity_path_run(path, base);
  CHECK(out.converged_all);
  CHECK(sup_diff(out.final_profile.density, base.density) <= 1e-10);
}

TEST_CASE("continuity path with a klt pole converges and matches quadrature") {
  // S chosen so the twisted tail density stays above the D^2-reconstruction
  // noise floor ||psi|| eps_mach / h^2 while e^{-S} << min(eps)
  RadialGrid g{14.0, 2048};
  auto base = round_profile(g);
  ContinuityPath path;
  path.epsilon_schedule = ContinuityPath::default_schedule();
  path.psi_minus_poles = {0.5};
  auto out = continuity_path_run(path, base);
  REQUIRE(out.converged_all);
  CHECK(out.effective_angle_at_origin == doctest::Approx(0.5));

  // area oracle: quadrature of the twisted reference density at the last eps
  double eps = path.epsilon_schedule.back();
  std::vector<double> target(g.nodes);
  for (int j = 0; j < g.nodes; ++j)
    target[j] = std::pow(std::exp(g.s(j)) + eps, -0.5) * base.density[j];
  double oracle_area = radial_area(g, target);
  CHECK(std::abs(out.final_profile.total_area - oracle_area) <= 1e-6);

  // the eps -> 0 profiles are Cauchy: successive sup distances decrease
  for (size_t i = 2; i < out.steps.size(); ++i)
    CHECK(out.steps[i].sup_distance < out.steps[i - 1].sup_distance);
}

TEST_CASE("continuity path rejects a b = 1 pole at validation") {
  RadialGrid g{10.0, 256};
  auto base = round_profile(g);
  ContinuityPath path;
  path.epsilon_schedule = ContinuityPath::default_schedule();
  path.psi_minus_poles = {1.0};
  CHECK_THROWS_AS(continuity_path_run(path, base), ValidationError);
}

TEST_CASE("continuity path validates the schedule") {
  RadialGrid g{10.0, 256};
  auto base = round_profile(g);
  ContinuityPath path;
  path.epsilon_schedule = {1e-2, 1e-1};  // not decreasing
  CHECK_THROWS_AS(continuity_path_run(path, base), ValidationError);
}

TEST_CASE("flow residual honesty: recomputed from the state, bitwise") {
  SolveOptions opts;
  opts.grid = {6.0, 128};
  auto ke = ke_solve_radial({1.0, 1.0}, opts);
  std::vector<double> f0 = ke.profile.density;
  for (double& v : f0) v *= 1.03;
  double a = radial_area(opts.grid, f0);
  for (double& v : f0) v *= ke.profile.total_area / a;
  auto initial = RadialProfile::from_density(opts.grid, f0, ke.profile.cone);
  auto run = kr_flow_run(initial, 1.0, 0.02, flow_stable_dt(initial, 1.0), 6);
  for (const auto& st : run.states) {
    double recomputed = flow_residual_norm(opts.grid, st.density, 1.0);
    CHECK(recomputed == st.residual_norm);  // bitwise
  }
}
