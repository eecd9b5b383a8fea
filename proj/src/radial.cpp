#include "kahlerlab/radial.hpp"

#include <cmath>
#include <numbers>

#include "kahlerlab/errors.hpp"

namespace klab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_end_asymptote(const std::vector<double>& f, const RadialGrid& g,
                         double beta, bool left) {
  // f e^{-beta s} (left) or f e^{+beta s} (right) settles to a positive
  // constant: 5% spread over the outermost three nodes.
  double vals[3];
  for (int k = 0; k < 3; ++k) {
    int j = left ? k : g.nodes - 1 - k;
    double s = g.s(j);
    vals[k] = f[j] * std::exp(left ? -beta * s : beta * s);
    if (!(vals[k] > 0))
      throw ValidationError("radial profile: nonpositive end asymptote");
  }
  double lo = std::min({vals[0], vals[1], vals[2]});
  double hi = std::max({vals[0], vals[1], vals[2]});
  if (hi / lo - 1.0 > 0.05)
    throw ValidationError(
        "radial profile: cone asymptote not settled at the boundary (spread "
        "> 5%)");
}

}  // namespace

double radial_area(const RadialGrid& grid, const std::vector<double>& f) {
  double h = grid.h();
  double sum = 0.5 * (f.front() + f.back());
  for (int j = 1; j + 1 < grid.nodes; ++j) sum += f[j];
  return kTwoPi * sum * h;
}

RadialProfile RadialProfile::from_density(RadialGrid grid, std::vector<double> f,
                                          ConeData cone) {
  if (grid.nodes < 16) throw ValidationError("radial profile: grid too coarse");
  if (static_cast<int>(f.size()) != grid.nodes)
    throw ValidationError("radial profile: density size mismatch");
  if (!(cone.beta0 >= 0 && cone.beta0 <= 1 && cone.beta_inf >= 0 &&
        cone.beta_inf <= 1))
    throw ValidationError("radial profile: cone angles must lie in [0,1]");
  for (double v : f)
    if (!(v > 0) || !std::isfinite(v))
      throw ValidationError("radial profile: density must be positive and finite");
  check_end_asymptote(f, grid, cone.beta0, true);
  check_end_asymptote(f, grid, cone.beta_inf, false);
  RadialProfile p;
  p.grid = grid;
  p.density = std::move(f);
  p.cone = cone;
  p.total_area = radial_area(grid, p.density);
  return p;
}

double RadialProfile::area_quadrature() const {
  return radial_area(grid, density);
}

std::vector<double> RadialProfile::log_density() const {
  std::vector<double> u(density.size());
  for (size_t j = 0; j < density.size(); ++j) u[j] = std::log(density[j]);
  return u;
}

CurvatureSamples ricci_and_scal(const RadialProfile& p) {
  const int n = p.grid.nodes;
  const double h = p.grid.h();
  for (double v : p.density)
    if (!(v > 0)) throw ValidationError("ricci_and_scal: density must be positive");
  std::vector<double> u = p.log_density();
  CurvatureSamples out;
  out.ricci.assign(n, 0.0);
  out.scal.assign(n, 0.0);
  auto second = [&](int j) {
    if (j >= 2 && j <= n - 3)
      return (-u[j - 2] + 16 * u[j - 1] - 30 * u[j] + 16 * u[j + 1] - u[j + 2]) /
             (12 * h * h);
    if (j == 0)
      return (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / (h * h);
    if (j == 1) return (u[0] - 2 * u[1] + u[2]) / (h * h);
    if (j == n - 2) return (u[n - 3] - 2 * u[n - 2] + u[n - 1]) / (h * h);
    return (2 * u[n - 1] - 5 * u[n - 2] + 4 * u[n - 3] - u[n - 4]) / (h * h);
  };
  for (int j = 0; j < n; ++j) {
    out.ricci[j] = -second(j);
    out.scal[j] = out.ricci[j] / p.density[j];
  }
  return out;
}

double gauss_bonnet(const RadialProfile& p) {
  auto curv = ricci_and_scal(p);
  const int n = p.grid.nodes;
  const double h = p.grid.h();
  // int K dA = 2 pi * sum K f ds; K f = ricci density
  double sum = 0.5 * (curv.ricci.front() + curv.ricci.back());
  for (int j = 1; j + 1 < n; ++j) sum += curv.ricci[j];
  return kTwoPi * sum * h;
}

RadialProfile round_profile(const RadialGrid& grid) {
  return football_profile(1.0, grid);
}

RadialProfile football_profile(double beta, const RadialGrid& grid) {
  if (!(beta > 0 && beta <= 1))
    throw ValidationError("football profile: beta must lie in (0,1]");
  std::vector<double> f(grid.nodes);
  for (int j = 0; j < grid.nodes; ++j) {
    double e = std::exp(beta * grid.s(j));
    f[j] = 2.0 * beta * beta * e / ((1.0 + e) * (1.0 + e));
  }
  return RadialProfile::from_density(grid, std::move(f), {beta, beta});
}

std::vector<double> reference_density(const RadialGrid& grid, ConeData cone,
                                      double lambda) {
  double bmid = 0.5 * (cone.beta0 + cone.beta_inf);
  double amp = (cone.beta0 + cone.beta_inf) * (cone.beta0 + cone.beta_inf) /
               (2.0 * lambda);
  std::vector<double> f(grid.nodes);
  for (int j = 0; j < grid.nodes; ++j) {
    double s = grid.s(j);
    double e = std::exp(bmid * s);
    f[j] = amp * std::exp(cone.beta0 * s) / ((1.0 + e) * (1.0 + e));
  }
  return f;
}

}  // namespace klab
