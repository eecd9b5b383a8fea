#include "kahlerlab/fibration.hpp"

#include <cmath>
#include <map>
#include <memory>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/ma_solvers.hpp"

namespace klab {

namespace {

// Fiber-grid quadrature of the fundamental-domain euclidean area for
// w(x,y) = x + tau y; routed through finite differences of the sampled
// marking so the Hodge route never touches tau' analytically.
double fiber_area_quadrature(const FamilyDescriptor& fam, Complex tau) {
  const int m = fam.fiber_resolution;
  const double h = 1.0 / m;
  double area = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double x = (i + 0.5) * h, y = (j + 0.5) * h;
      Complex wx = (Complex(x + h, 0) + tau * y) - (Complex(x, 0) + tau * y);
      Complex wy = (Complex(x, 0) + tau * (y + h)) - (Complex(x, 0) + tau * y);
      area += std::abs(std::imag(std::conj(wx) * wy));
    }
  return area;
}

double log_hodge_norm(const FamilyDescriptor& fam, Complex s) {
  // log integral_fiber sqrt(-1) dw ^ dw_bar (= log 2 Im tau, via quadrature)
  return std::log(2.0 * fiber_area_quadrature(fam, fam.tau_at(s)));
}

// dd^c-type second difference of a real field: d_s d_sbar F, quarter of the
// real Laplacian, centered on a 3x3 stencil.
double dsdsbar(const std::function<double(Complex)>& F, Complex s, double h) {
  double lap = (F(s + Complex(h, 0)) + F(s - Complex(h, 0)) +
                F(s + Complex(0, h)) + F(s - Complex(0, h)) - 4.0 * F(s)) /
               (h * h);
  return 0.25 * lap;
}

Complex ds(const std::function<Complex(Complex)>& F, Complex s, double h) {
  Complex fx = (F(s + Complex(h, 0)) - F(s - Complex(h, 0))) / (2 * h);
  Complex fy = (F(s + Complex(0, h)) - F(s - Complex(0, h))) / (2 * h);
  return 0.5 * (fx - Complex(0, 1) * fy);
}

Complex dsbar(const std::function<Complex(Complex)>& F, Complex s, double h) {
  Complex fx = (F(s + Complex(h, 0)) - F(s - Complex(h, 0))) / (2 * h);
  Complex fy = (F(s + Complex(0, h)) - F(s - Complex(0, h))) / (2 * h);
  return 0.5 * (fx + Complex(0, 1) * fy);
}

void require_interior(const FamilyDescriptor& fam, Complex s, double margin) {
  if (std::abs(s.real() - fam.base.center.real()) + margin >
          fam.base.half_width ||
      std::abs(s.imag() - fam.base.center.imag()) + margin >
          fam.base.half_width)
    throw ValidationError(
        "fibration: base point too close to the patch boundary for the "
        "stencil");
}

// Ingredients of the semi-flat fiberwise-KE form at base point s:
// q = 1/Im tau (all through fiber quadratures), its first and dd^c
// derivatives over the stencil, and the Hodge-route WP density.
struct SemiFlatData {
  double q = 0.0;
  Complex q_s;
  double q_ssbar = 0.0;
  double wp_hodge = 0.0;
};

SemiFlatData semiflat_data(const FamilyDescriptor& fam, Complex s) {
  double h = fam.stencil_h();
  require_interior(fam, s, 2 * h);
  auto qf = [&](Complex z) {
    return 1.0 / fiber_area_quadrature(fam, fam.tau_at(z));
  };
  auto qc = [&](Complex z) { return Complex(qf(z), 0.0); };
  SemiFlatData d;
  d.q = qf(s);
  d.q_s = ds(qc, s, h);
  d.q_ssbar = dsdsbar(qf, s, h);
  d.wp_hodge = -dsdsbar([&](Complex z) { return log_hodge_norm(fam, z); }, s, h);
  return d;
}

// Horizontal Schur coefficient of the assembled omega_SKE at fiber point w:
// (chi_ssbar + wp) - |chi_swbar|^2 / g_fiber with chi = (Im w)^2 / Im tau.
double horizontal_schur(const SemiFlatData& d, Complex w) {
  double v = w.imag();
  double chi_ssbar = v * v * d.q_ssbar;
  Complex chi_swbar = Complex(0, 1) * v * d.q_s;
  double gf = 0.5 * d.q;
  return chi_ssbar + d.wp_hodge - std::norm(chi_swbar) / gf;
}

}  // namespace

FamilyKind family_kind_from_name(const std::string& name) {
  if (name == "torus_family" || name == "torus") return FamilyKind::kTorus;
  if (name == "isotrivial") return FamilyKind::kIsotrivial;
  if (name == "sphere_family" || name == "sphere") return FamilyKind::kSphere;
  throw ValidationError("fibration: unknown family kind '" + name + "'");
}

std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::kTorus: return "torus_family";
    case FamilyKind::kIsotrivial: return "isotrivial";
    case FamilyKind::kSphere: return "sphere_family";
  }
  return "?";
}

Complex FamilyDescriptor::tau_at(Complex s) const {
  if (kind == FamilyKind::kIsotrivial || kind == FamilyKind::kSphere)
    return tau.tau0;
  if (tau.mixed)
    return s.real() > 0 ? tau.tau0 + tau.slope * s * s : tau.tau0;
  return tau.tau0 + tau.slope * s;
}

FamilyDescriptor FamilyDescriptor::validated(FamilyDescriptor f) {
  if (f.fiber_resolution < 4)
    throw ValidationError("fibration: fiber resolution too small");
  if (f.base.samples < 3 || !(f.base.half_width > 0))
    throw ValidationError("fibration: base grid needs >= 3 samples and positive width");
  // Im tau > 0 across the patch (torus moduli), and discrete Cauchy-Riemann
  // residual of the parameter map at interior grid points.
  const int n = f.base.samples;
  double hg = 2 * f.base.half_width / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex s = f.base.center + Complex(-f.base.half_width + i * hg,
                                          -f.base.half_width + j * hg);
      if (f.kind != FamilyKind::kSphere && !(f.tau_at(s).imag() > 0))
        throw ValidationError("fibration: Im tau must stay positive on the patch");
      if (i == 0 || j == 0 || i == n - 1 || j == n - 1) continue;
      if (f.tau.mixed && std::abs(s.real()) < 1.5 * hg) continue;  // seam column
      Complex cr = dsbar([&](Complex z) { return f.tau_at(z); }, s, hg);
      if (std::abs(cr) > 1e-8)
        throw ValidationError(
            "fibration: parameter map fails the Cauchy-Riemann check");
    }
  return f;
}

SemiKEMetric fiberwise_ke(const FamilyDescriptor& fam) {
  FamilyDescriptor f = FamilyDescriptor::validated(fam);
  SemiKEMetric out;
  out.kind = f.kind;
  const int n = f.base.samples;
  double hg = 2 * f.base.half_width / (n - 1);

  if (f.kind == FamilyKind::kSphere) {
    SolveOptions opts;
    opts.grid = {6.0, 192};
    auto ke = ke_solve_radial({1.0, 1.0}, opts);
    out.sphere_profile = ke.profile;
    out.fiberwise_constant = ke.lambda;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Complex s = f.base.center + Complex(-f.base.half_width + i * hg,
                                            -f.base.half_width + j * hg);
        out.base_points.push_back(s);
        out.fiber_metric_density.push_back(ke.profile.density[opts.grid.nodes / 2]);
        out.fiber_residual.push_back(ke.residual);
        out.max_fiber_residual = std::max(out.max_fiber_residual, ke.residual);
      }
    if (out.max_fiber_residual > 1e-6)
      throw SolverError("fiberwise_ke: per-fiber KE residual exceeds 1e-6");
    return out;
  }

  out.fiberwise_constant = 0.0;  // flat fibers
  const int m = f.fiber_resolution;
  const double hf = 1.0 / m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex s = f.base.center + Complex(-f.base.half_width + i * hg,
                                          -f.base.half_width + j * hg);
      double density = 0.5 / fiber_area_quadrature(f, f.tau_at(s));
      // flatness residual: curvature of the sampled fiber metric, i.e.
      // second differences of log density across the fiber grid
      std::vector<double> logg(m, std::log(density));
      double res = 0.0;
      for (int k = 1; k + 1 < m; ++k)
        res = std::max(res, std::abs(logg[k - 1] - 2 * logg[k] + logg[k + 1]) /
                                (hf * hf));
      out.base_points.push_back(s);
      out.fiber_metric_density.push_back(density);
      out.fiber_residual.push_back(res);
      out.max_fiber_residual = std::max(out.max_fiber_residual, res);
    }
  if (out.max_fiber_residual > 1e-8)
    throw SolverError("fiberwise_ke: per-fiber flatness residual exceeds 1e-8");
  return out;
}

WPSample wp_via_ks_norm(const FamilyDescriptor& fam, Complex s) {
  FamilyDescriptor f = FamilyDescriptor::validated(fam);
  double h = f.stencil_h();
  require_interior(f, s, h);
  Complex tau = f.tau_at(s);
  Complex taup = ds([&](Complex z) { return f.tau_at(z); }, s, h);
  // harmonic Kodaira-Spencer representative: |A| = |tau'| / (2 Im tau)
  // pointwise; fiber quadrature of the constant against the unit area form
  const int m = f.fiber_resolution;
  double a2 = std::norm(taup) / (4.0 * tau.imag() * tau.imag());
  double integral = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) integral += a2 / (m * m);
  WPSample w;
  w.s = s;
  w.ks_norm = integral;
  w.wp_density = integral;
  if (w.wp_density < -1e-10)
    throw SolverError("wp_via_ks_norm: negative Weil-Petersson density");
  return w;
}

WPSample wp_fiber_integral(const FamilyDescriptor& fam, Complex s) {
  FamilyDescriptor f = FamilyDescriptor::validated(fam);
  SemiFlatData d = semiflat_data(f, s);
  Complex tau = f.tau_at(s);
  const int m = f.fiber_resolution;
  // fiber integral of the horizontal Schur coefficient of omega_SKE against
  // the unit fiber area form
  double integral = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double x = (i + 0.5) / m, y = (j + 0.5) / m;
      Complex w = Complex(x, 0) + tau * y;
      integral += horizontal_schur(d, w) / (m * m);
    }
  WPSample out;
  out.s = s;
  out.wp_density = integral;
  out.ks_norm = wp_via_ks_norm(f, s).ks_norm;
  if (out.wp_density < -1e-10)
    throw SolverError("wp_fiber_integral: negative Weil-Petersson density");
  double scale = std::max({out.wp_density, out.ks_norm, 1e-12});
  if (std::abs(out.wp_density - out.ks_norm) > 0.05 * scale)
    throw SolverError(
        "wp_fiber_integral: estimator cross-check beyond 5% tolerance");
  return out;
}

FoliationEntry foliation_rank(const FamilyDescriptor& fam, Complex s) {
  FamilyDescriptor f = FamilyDescriptor::validated(fam);
  FoliationEntry e;
  e.s = s;
  e.fiber_dim = 1;
  if (f.kind == FamilyKind::kSphere) {
    // constant family: the horizontal block vanishes identically
    e.null_rank = 1;
    e.full_rank_null = true;
    return e;
  }
  SemiFlatData d = semiflat_data(f, s);
  Complex tau = f.tau_at(s);
  const int m = f.fiber_resolution;
  double cmax = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double x = (i + 0.5) / m, y = (j + 0.5) / m;
      Complex w = Complex(x, 0) + tau * y;
      cmax = std::max(cmax, std::abs(horizontal_schur(d, w)));
    }
  e.null_rank = cmax < 1e-9 ? 1 : 0;
  e.full_rank_null = e.null_rank == e.fiber_dim;
  return e;
}

double relative_ke_residual(const TotalMetricSampler& total,
                            const ScalarField& base_density,
                            const ScalarField& wp_density,
                            const std::vector<PoleTerm>& poles,
                            CurvatureRegime regime, const ProductPatch& patch) {
  for (const auto& p : poles) {
    if (std::abs(p.center.real() - patch.s_center.real()) <=
            patch.s_half_width &&
        std::abs(p.center.imag() - patch.s_center.imag()) <=
            patch.s_half_width)
      throw ValidationError(
          "relative_ke_residual: patch touches a declared singular locus");
  }
  const int ns = patch.s_samples, nw = patch.w_samples;
  if (ns < 5 || nw < 5)
    throw ValidationError("relative_ke_residual: patch needs >= 5 samples per axis");
  const double hs = 2 * patch.s_half_width / (ns - 1);
  const double hw = 2 * patch.w_half_width / (nw - 1);
  double sign = regime == CurvatureRegime::kFanoBase ? 1.0 : -1.0;

  auto logdet = [&](Complex s, Complex w) {
    HermitianMatrix g = total(s, w);
    double det = (g.at(0, 0) * g.at(1, 1) - g.at(0, 1) * g.at(1, 0)).real();
    if (!(det > 0))
      throw SolverError("relative_ke_residual: total metric is not positive");
    return std::log(det);
  };

  double worst = 0.0;
  for (int is = 1; is + 1 < ns; ++is)
    for (int js = 1; js + 1 < ns; ++js)
      for (int iw = 1; iw + 1 < nw; ++iw)
        for (int jw = 1; jw + 1 < nw; ++jw) {
          Complex s = patch.s_center +
                      Complex(-patch.s_half_width + is * hs,
                              -patch.s_half_width + js * hs);
          Complex w = patch.w_center +
                      Complex(-patch.w_half_width + iw * hw,
                              -patch.w_half_width + jw * hw);
          auto Fs = [&](Complex z) { return logdet(z, w); };
          auto Fw = [&](Complex z) { return logdet(s, z); };
          double ric_ss = -dsdsbar(Fs, s, hs);
          double ric_ww = -dsdsbar(Fw, w, hw);
          // mixed component d_s d_wbar via crossed central differences
          auto cross = [&](double as, double bs, double aw, double bw) {
            return logdet(s + Complex(as, bs), w + Complex(aw, bw));
          };
          double Axx = (cross(hs, 0, hw, 0) - cross(hs, 0, -hw, 0) -
                        cross(-hs, 0, hw, 0) + cross(-hs, 0, -hw, 0)) /
                       (4 * hs * hw);
          double Axy = (cross(hs, 0, 0, hw) - cross(hs, 0, 0, -hw) -
                        cross(-hs, 0, 0, hw) + cross(-hs, 0, 0, -hw)) /
                       (4 * hs * hw);
          double Ayx = (cross(0, hs, hw, 0) - cross(0, hs, -hw, 0) -
                        cross(0, -hs, hw, 0) + cross(0, -hs, -hw, 0)) /
                       (4 * hs * hw);
          double Ayy = (cross(0, hs, 0, hw) - cross(0, hs, 0, -hw) -
                        cross(0, -hs, 0, hw) + cross(0, -hs, 0, -hw)) /
                       (4 * hs * hw);
          Complex ric_sw = -0.25 * Complex(Axx + Ayy, Axy - Ayx);
          double target_ss = sign * base_density(s) + wp_density(s);
          double r = std::abs(ric_ss - target_ss);
          r = std::max(r, std::abs(ric_sw));
          r = std::max(r, std::abs(ric_ww));
          worst = std::max(worst, r);
        }
  return worst;
}

double torus_family_relative_residual(const FamilyDescriptor& fam,
                                      const ProductPatch& patch) {
  FamilyDescriptor f = FamilyDescriptor::validated(fam);
  // total = pi*(hyperbolic g_can) + semi-flat fiberwise-flat form;
  // continuum identity: Ric(total) = -(g_can + 2 wp) + wp
  auto g_can = [](Complex s) {
    double r2 = std::norm(s);
    if (r2 >= 0.9) throw ValidationError("torus patch: |s| must stay below 0.95");
    return 2.0 / ((1.0 - r2) * (1.0 - r2));
  };
  // the residual scan revisits each base point ~nw^2 times; memoize
  auto cache = std::make_shared<std::map<std::pair<double, double>, SemiFlatData>>();
  auto cached_semiflat = [&f, cache](Complex s) {
    auto key = std::make_pair(s.real(), s.imag());
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    SemiFlatData d = semiflat_data(f, s);
    (*cache)[key] = d;
    return d;
  };
  auto total = [&, cached_semiflat](Complex s, Complex w) {
    SemiFlatData d = cached_semiflat(s);
    double v = w.imag();
    HermitianMatrix g(2);
    g.at(0, 0) = g_can(s) + v * v * d.q_ssbar;
    g.at(0, 1) = Complex(0, 1) * v * d.q_s;
    g.at(1, 0) = std::conj(g.at(0, 1));
    g.at(1, 1) = 0.5 * d.q;
    return g;
  };
  auto base = [&](Complex s) {
    return g_can(s) + 2.0 * wp_via_ks_norm(f, s).wp_density;
  };
  auto wp = [&](Complex s) { return wp_via_ks_norm(f, s).wp_density; };
  return relative_ke_residual(total, base, wp, {},
                              CurvatureRegime::kGeneralTypeBase, patch);
}

double product_relative_residual(const ProductPatch& patch) {
  // flat KE factors: Ric = 0, base and wp identically zero
  auto total = [](Complex, Complex) {
    HermitianMatrix g(2);
    g.at(0, 0) = 1.0;
    g.at(1, 1) = 0.5;
    return g;
  };
  auto zero = [](Complex) { return 0.0; };
  return relative_ke_residual(total, zero, zero, {},
                              CurvatureRegime::kGeneralTypeBase, patch);
}

double horizontal_c_residual(const FamilyDescriptor& fam, Complex s) {
  FamilyDescriptor f = FamilyDescriptor::validated(fam);
  SemiFlatData d = semiflat_data(f, s);
  Complex tau = f.tau_at(s);
  const int m = f.fiber_resolution;
  double h = f.stencil_h();
  Complex taup = ds([&](Complex z) { return f.tau_at(z); }, s, h);
  double a2 = std::norm(taup) / (4.0 * tau.imag() * tau.imag());

  // c from the literal (n+1)-form ratio against ds ^ dsbar; that ordering
  // is the opposite orientation to sqrt(-1) ds ^ dsbar, so c carries the
  // negative of the geometric Schur coefficient
  auto c_at = [&](double x, double y) {
    Complex w = Complex(x, 0) + tau * y;
    return -horizontal_schur(d, w);
  };
  // fiber Laplacian of c in w = x + tau y coordinates:
  // d_w d_wbar = |a|^2 Fxx + 2 Re(a conj(b)) Fxy + |b|^2 Fyy with
  // a = dx/dw, b = dy/dw
  Complex b = 1.0 / (Complex(0, 2) * tau.imag());
  Complex a = 1.0 - tau * b;
  const double hf = 1.0 / m;
  double worst = 0.0;
  for (int i = 1; i + 1 < m; ++i)
    for (int j = 1; j + 1 < m; ++j) {
      double x = (i + 0.5) / m, y = (j + 0.5) / m;
      double Fxx = (c_at(x + hf, y) - 2 * c_at(x, y) + c_at(x - hf, y)) / (hf * hf);
      double Fyy = (c_at(x, y + hf) - 2 * c_at(x, y) + c_at(x, y - hf)) / (hf * hf);
      double Fxy = (c_at(x + hf, y + hf) - c_at(x + hf, y - hf) -
                    c_at(x - hf, y + hf) + c_at(x - hf, y - hf)) /
                   (4 * hf * hf);
      double dwdwbar = std::norm(a) * Fxx + 2 * std::real(a * std::conj(b)) * Fxy +
                       std::norm(b) * Fyy;
      double lap = dwdwbar / (0.5 * d.q);  // Laplacian of omega_t
      double res = std::abs(-lap - c_at(x, y) - a2);
      worst = std::max(worst, res);
    }
  double scale = std::max(a2, 1e-12);
  return worst / scale;
}

VolumeDensity berndtsson_fiber_density(const FamilyDescriptor& fam) {
  FamilyDescriptor f = FamilyDescriptor::validated(fam);
  double q = 1.0 / fiber_area_quadrature(f, f.tau_at(f.base.center));
  return [q](const CPoint&) { return 0.5 * q; };
}

}  // namespace klab
