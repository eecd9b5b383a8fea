#include "kahlerlab/psh.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kahlerlab/errors.hpp"

namespace klab {

namespace {

constexpr double kPi = std::numbers::pi;

double sqr(double x) { return x * x; }

double dist2(const CPoint& a, const CPoint& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += sqr(a[i] - b[i]);
  return s;
}

double abs2(const CPoint& z) {
  double s = 0;
  for (double c : z) s += c * c;
  return s;
}

// 16-point Gauss-Legendre rule mapped to [0,1].
struct GL16 {
  double x[16], w[16];
  GL16() {
    static const double nodes[16] = {
        -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
        -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
        -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
        0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
        0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
        0.9894009349916499};
    static const double weights[16] = {
        0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
        0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
        0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
        0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
        0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
        0.0271524594117541};
    for (int i = 0; i < 16; ++i) {
      x[i] = 0.5 * (nodes[i] + 1.0);
      w[i] = 0.5 * weights[i];
    }
  }
};

const GL16& gl16() {
  static GL16 g;
  return g;
}

}  // namespace

SmoothPreset smooth_preset_from_name(const std::string& name) {
  if (name == "zero" || name.empty()) return SmoothPreset::kZero;
  if (name == "quadratic") return SmoothPreset::kQuadratic;
  if (name == "re") return SmoothPreset::kRe;
  if (name == "gauss") return SmoothPreset::kGauss;
  if (name == "log1p") return SmoothPreset::kLogOnePlus;
  throw ValidationError("psh: unknown smooth preset '" + name + "'");
}

std::string to_string(SmoothPreset p) {
  switch (p) {
    case SmoothPreset::kZero: return "zero";
    case SmoothPreset::kQuadratic: return "quadratic";
    case SmoothPreset::kRe: return "re";
    case SmoothPreset::kGauss: return "gauss";
    case SmoothPreset::kLogOnePlus: return "log1p";
  }
  return "?";
}

PshWeight PshWeight::validated(PshWeight w) {
  if (w.dim != 1 && w.dim != 2)
    throw ValidationError("psh: dimension must be 1 or 2");
  if (w.domain_radius <= 0)
    throw ValidationError("psh: domain radius must be > 0");
  for (const auto& p : w.poles) {
    if (static_cast<int>(p.center.size()) != 2 * w.dim)
      throw ValidationError("psh: pole center has wrong dimension");
    if (p.lambda < 0) throw ValidationError("psh: pole coefficient must be >= 0");
  }
  if (w.algebraic) {
    if (w.dim != 1)
      throw ValidationError("psh: algebraic part supported in dimension 1 only");
    if (w.algebraic->m < 1) throw ValidationError("psh: algebraic m must be >= 1");
    if (w.algebraic->monomial_orders.empty())
      throw ValidationError("psh: algebraic part needs at least one monomial");
    for (int a : w.algebraic->monomial_orders)
      if (a < 0) throw ValidationError("psh: monomial orders must be >= 0");
  }
  return w;
}

namespace {

double smooth_value(SmoothPreset p, double scale, const CPoint& z) {
  double t = abs2(z);
  switch (p) {
    case SmoothPreset::kZero: return 0.0;
    case SmoothPreset::kQuadratic: return scale * t;
    case SmoothPreset::kRe: return scale * z[0];
    case SmoothPreset::kGauss: return scale * std::exp(-t);
    case SmoothPreset::kLogOnePlus: return scale * std::log1p(t);
  }
  return 0.0;
}

double smooth_hessian_trace(SmoothPreset p, double scale, int n, const CPoint& z) {
  double t = abs2(z);
  switch (p) {
    case SmoothPreset::kZero: return 0.0;
    case SmoothPreset::kQuadratic: return scale * n;
    case SmoothPreset::kRe: return 0.0;
    case SmoothPreset::kGauss: return scale * std::exp(-t) * (t - n);
    case SmoothPreset::kLogOnePlus:
      return scale * (n + (n - 1) * t) / sqr(1.0 + t);
  }
  return 0.0;
}

int min_order(const AlgebraicPart& a) {
  int amin = a.monomial_orders[0];
  for (int o : a.monomial_orders) amin = std::min(amin, o);
  return amin;
}

}  // namespace

double PshWeight::value(const CPoint& z) const {
  double v = 0;
  for (const auto& p : poles) v += p.lambda * std::log(dist2(z, p.center));
  if (algebraic) {
    double t = abs2(z);
    double s = 0;
    for (int a : algebraic->monomial_orders) s += std::pow(t, a);
    v += std::log(s) / algebraic->m;
  }
  v += smooth_value(smooth, smooth_scale, z);
  return v;
}

double PshWeight::smooth_trace_hessian(const CPoint& z) const {
  double h = smooth_hessian_trace(smooth, smooth_scale, dim, z);
  if (algebraic) {
    // (1/m) d2/dz dzbar log g(|z|^2), g(t) = sum_a t^a; the minimal-order
    // log atom is harmonic off the origin and carries no density here
    double t = abs2(z);
    if (t > 0) {
      double g = 0, g1 = 0, g2 = 0;
      for (int a : algebraic->monomial_orders) {
        double ta = std::pow(t, a);
        g += ta;
        if (a >= 1) g1 += a * ta / t;
        if (a >= 2) g2 += a * (a - 1) * ta / (t * t);
      }
      h += ((g2 * t + g1) * g - g1 * g1 * t) / (g * g) / algebraic->m;
    }
  }
  return h;
}

double PshWeight::atom_at(const CPoint& p) const {
  double a = 0;
  for (const auto& pole : poles)
    if (dist2(p, pole.center) == 0) a += pole.lambda;
  if (algebraic && abs2(p) == 0)
    a += static_cast<double>(min_order(*algebraic)) / algebraic->m;
  return a;
}

namespace {

// Integral of the non-atomic trace-Hessian density over the r-ball about p.
// In dimension 2 a log pole is an integrable density (n-1)*lambda/|z-c|^2
// rather than an atom; poles centered exactly at p are excluded here because
// mass_ratio credits them analytically (their mass ratio is lambda for every
// r by homogeneity).
double ball_density_integral(const PshWeight& w, const CPoint& p, double r) {
  const auto& g = gl16();
  auto density = [&](const CPoint& z) {
    double h = w.smooth_trace_hessian(z);
    if (w.dim == 2) {
      for (const auto& pole : w.poles) {
        if (dist2(pole.center, p) == 0) continue;
        double d2 = dist2(z, pole.center);
        if (d2 > 0) h += pole.lambda / d2;
      }
    }
    return h;
  };
  double total = 0;
  if (w.dim == 1) {
    const int kAngles = 48;
    CPoint z(2);
    for (int i = 0; i < 16; ++i) {
      double rho = r * g.x[i];
      double ring = 0;
      for (int a = 0; a < kAngles; ++a) {
        double th = 2 * kPi * (a + 0.5) / kAngles;
        z[0] = p[0] + rho * std::cos(th);
        z[1] = p[1] + rho * std::sin(th);
        ring += density(z);
      }
      total += g.w[i] * r * ring * (2 * kPi / kAngles) * rho;
    }
    return total;
  }
  // dim 2, Hopf coordinates: dV = rho^3 sin(th)cos(th) drho dth dph1 dph2
  const int kTh = 8, kPh = 12;
  CPoint z(4);
  for (int i = 0; i < 16; ++i) {
    double rho = r * g.x[i];
    double shell = 0;
    for (int it = 0; it < kTh; ++it) {
      double th = (kPi / 2) * (it + 0.5) / kTh;
      double ct = std::cos(th), st = std::sin(th);
      for (int i1 = 0; i1 < kPh; ++i1) {
        double p1 = 2 * kPi * (i1 + 0.5) / kPh;
        for (int i2 = 0; i2 < kPh; ++i2) {
          double p2 = 2 * kPi * (i2 + 0.5) / kPh;
          z[0] = p[0] + rho * ct * std::cos(p1);
          z[1] = p[1] + rho * ct * std::sin(p1);
          z[2] = p[2] + rho * st * std::cos(p2);
          z[3] = p[3] + rho * st * std::sin(p2);
          shell += density(z) * st * ct;
        }
      }
    }
    double dOmega = (kPi / 2 / kTh) * sqr(2 * kPi / kPh);
    total += g.w[i] * r * shell * dOmega * rho * rho * rho;
  }
  return total;
}

}  // namespace

double mass_ratio(const PshWeight& w, const CPoint& p, double r) {
  if (r <= 0) throw ValidationError("mass_ratio: radius must be positive");
  if (std::sqrt(abs2(p)) + r > w.domain_radius + 1e-12)
    throw ValidationError("mass_ratio: ball exceeds the weight's domain");
  double atoms = 0;
  if (w.dim == 1) {
    for (const auto& pole : w.poles)
      if (dist2(p, pole.center) < r * r) atoms += pole.lambda;
    if (w.algebraic && abs2(p) < r * r)
      atoms += static_cast<double>(min_order(*w.algebraic)) / w.algebraic->m;
  } else {
    // a pole centered at p contributes exactly lambda for every r
    // (homogeneity of log|z|); off-center poles sit in the density term
    for (const auto& pole : w.poles)
      if (dist2(p, pole.center) == 0) atoms += pole.lambda;
  }
  double density = ball_density_integral(w, p, r) / std::pow(kPi, w.dim);
  double norm = w.dim == 1 ? 1.0 : r * r;
  return atoms + density / norm;
}

LelongEstimate lelong_number(const PshWeight& w, const CPoint& p) {
  const int kSteps = 9;  // r_j = r0 * 2^{-j}
  LelongEstimate est;
  double r0 = std::min(0.2 * w.domain_radius, 0.5);
  std::vector<double> masses;
  for (int j = 0; j < kSteps; ++j) {
    double r = r0 * std::pow(2.0, -j);
    est.r_schedule.push_back(r);
    masses.push_back(mass_ratio(w, p, r));
  }
  double tail_move = std::abs(masses[8] - masses[7]);
  double prev_move = std::abs(masses[7] - masses[6]);
  if (tail_move > 0.05 * (1.0 + std::abs(masses[8])) && tail_move > 2 * prev_move)
    throw EstimateUnstableError("lelong_number: mass-ratio schedule did not settle");

  // log-pole convergence is logarithmic: extrapolate linearly in 1/log(1/r)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int kFit = 4;
  for (int j = kSteps - kFit; j < kSteps; ++j) {
    double x = 1.0 / std::log(1.0 / est.r_schedule[j]);
    sx += x;
    sy += masses[j];
    sxx += x * x;
    sxy += x * masses[j];
  }
  double denom = kFit * sxx - sx * sx;
  est.value = (sy * sxx - sx * sxy) / denom;
  if (est.value < 0 && est.value > -1e-8) est.value = 0;

  // sup-slope estimator: least squares of sphere means against log r^2
  double tx = 0, ty = 0, txx = 0, txy = 0;
  for (int j = 0; j < kSteps; ++j) {
    double r = est.r_schedule[j];
    double mean = 0;
    if (w.dim == 1) {
      const int kAngles = 64;
      CPoint z(2);
      for (int a = 0; a < kAngles; ++a) {
        double th = 2 * kPi * (a + 0.5) / kAngles;
        z[0] = p[0] + r * std::cos(th);
        z[1] = p[1] + r * std::sin(th);
        mean += w.value(z);
      }
      mean /= kAngles;
    } else {
      CPoint z(4);
      double acc = 0, wsum = 0;
      for (int it = 0; it < 8; ++it) {
        double th = (kPi / 2) * (it + 0.5) / 8;
        double sc = std::sin(th) * std::cos(th);
        for (int i1 = 0; i1 < 8; ++i1)
          for (int i2 = 0; i2 < 8; ++i2) {
            double p1 = 2 * kPi * (i1 + 0.5) / 8;
            double p2 = 2 * kPi * (i2 + 0.5) / 8;
            z[0] = p[0] + r * std::cos(th) * std::cos(p1);
            z[1] = p[1] + r * std::cos(th) * std::sin(p1);
            z[2] = p[2] + r * std::sin(th) * std::cos(p2);
            z[3] = p[3] + r * std::sin(th) * std::sin(p2);
            acc += w.value(z) * sc;
            wsum += sc;
          }
      }
      mean = acc / wsum;
    }
    double x = std::log(r * r);
    tx += x;
    ty += mean;
    txx += x * x;
    txy += x * mean;
  }
  double d2 = kSteps * txx - tx * tx;
  est.slope_value = (kSteps * txy - tx * ty) / d2;
  if (est.slope_value < 0 && est.slope_value > -1e-8) est.slope_value = 0;
  return est;
}

namespace {

struct SingularCenter {
  CPoint c;
  double near_radius;
};

// One dyadic shell of int e^{-alpha(w - wsup)} ref dV about a center,
// log-radius midpoint quadrature.
double shell_integral(const PshWeight& w, const VolumeDensity& ref, double wsup,
                      double alpha, const CPoint& c, double router,
                      double rinner) {
  const int kR = 4;
  double total = 0;
  double lro = std::log(router), lri = std::log(rinner);
  if (w.dim == 1) {
    const int kA = 24;
    CPoint z(2);
    for (int i = 0; i < kR; ++i) {
      double rho = std::exp(lri + (lro - lri) * (i + 0.5) / kR);
      for (int a = 0; a < kA; ++a) {
        double th = 2 * kPi * (a + 0.5) / kA;
        z[0] = c[0] + rho * std::cos(th);
        z[1] = c[1] + rho * std::sin(th);
        double f = std::exp(-alpha * (w.value(z) - wsup));
        if (ref) f *= ref(z);
        total += f * rho * rho;  // rho dV, rho dlog
      }
    }
    return total * (lro - lri) / kR * (2 * kPi / kA);
  }
  const int kTh = 6, kPh = 8;
  CPoint z(4);
  for (int i = 0; i < kR; ++i) {
    double rho = std::exp(lri + (lro - lri) * (i + 0.5) / kR);
    double shell = 0;
    for (int it = 0; it < kTh; ++it) {
      double th = (kPi / 2) * (it + 0.5) / kTh;
      for (int i1 = 0; i1 < kPh; ++i1)
        for (int i2 = 0; i2 < kPh; ++i2) {
          double p1 = 2 * kPi * (i1 + 0.5) / kPh;
          double p2 = 2 * kPi * (i2 + 0.5) / kPh;
          z[0] = c[0] + rho * std::cos(th) * std::cos(p1);
          z[1] = c[1] + rho * std::cos(th) * std::sin(p1);
          z[2] = c[2] + rho * std::sin(th) * std::cos(p2);
          z[3] = c[3] + rho * std::sin(th) * std::sin(p2);
          double f = std::exp(-alpha * (w.value(z) - wsup));
          if (ref) f *= ref(z);
          shell += f * std::sin(th) * std::cos(th);
        }
    }
    total += shell * rho * rho * rho * rho * (kPi / 2 / kTh) * sqr(2 * kPi / kPh);
  }
  return total * (lro - lri) / kR;
}

}  // namespace

ThresholdEstimate integrability_threshold(const PshWeight& w,
                                          const VolumeDensity& reference,
                                          const ThresholdOptions& opts) {
  PshWeight wv = PshWeight::validated(w);

  std::vector<SingularCenter> centers;
  CPoint origin(2 * wv.dim, 0.0);
  for (const auto& pole : wv.poles)
    if (pole.lambda > 0) centers.push_back({pole.center, 0.0});
  if (wv.algebraic && min_order(*wv.algebraic) > 0) {
    bool have_origin = false;
    for (auto& sc : centers)
      if (dist2(sc.c, origin) == 0) have_origin = true;
    if (!have_origin) centers.push_back({origin, 0.0});
  }
  for (size_t i = 0; i < centers.size(); ++i) {
    double near = 0.25 * wv.domain_radius;
    for (size_t j = 0; j < centers.size(); ++j)
      if (j != i) {
        double d = std::sqrt(dist2(centers[i].c, centers[j].c));
        if (d > 0) near = std::min(near, 0.45 * d);
      }
    centers[i].near_radius = near;
  }

  // sup over a deterministic grid; only the normalization shift needs it
  double wsup = -std::numeric_limits<double>::infinity();
  if (wv.dim == 1) {
    const int kG = 32;
    CPoint z(2);
    for (int i = 0; i < kG; ++i)
      for (int j = 0; j < kG; ++j) {
        z[0] = wv.domain_radius * (2.0 * (i + 0.5) / kG - 1.0);
        z[1] = wv.domain_radius * (2.0 * (j + 0.5) / kG - 1.0);
        if (abs2(z) > sqr(wv.domain_radius)) continue;
        wsup = std::max(wsup, wv.value(z));
      }
  } else {
    const int kG = 10;
    CPoint z(4);
    for (int i = 0; i < kG; ++i)
      for (int j = 0; j < kG; ++j)
        for (int k = 0; k < kG; ++k)
          for (int l = 0; l < kG; ++l) {
            z[0] = wv.domain_radius * (2.0 * (i + 0.5) / kG - 1.0);
            z[1] = wv.domain_radius * (2.0 * (j + 0.5) / kG - 1.0);
            z[2] = wv.domain_radius * (2.0 * (k + 0.5) / kG - 1.0);
            z[3] = wv.domain_radius * (2.0 * (l + 0.5) / kG - 1.0);
            if (abs2(z) > sqr(wv.domain_radius)) continue;
            wsup = std::max(wsup, wv.value(z));
          }
  }

  auto masked = [&](const CPoint& z) {
    for (const auto& sc : centers)
      if (dist2(z, sc.c) < sqr(sc.near_radius)) return true;
    return false;
  };

  // far field: bounded integrand, coarse fixed-grid quadrature is enough
  // for the finiteness decision
  auto far_field = [&](double alpha) {
    double total = 0;
    if (wv.dim == 1) {
      const int kR = 24, kA = 24;
      CPoint z(2);
      for (int i = 0; i < kR; ++i) {
        double rho = wv.domain_radius * (i + 0.5) / kR;
        for (int a = 0; a < kA; ++a) {
          double th = 2 * kPi * (a + 0.5) / kA;
          z[0] = rho * std::cos(th);
          z[1] = rho * std::sin(th);
          if (masked(z)) continue;
          double f = std::exp(-alpha * (wv.value(z) - wsup));
          if (reference) f *= reference(z);
          total += f * rho;
        }
      }
      return total * (wv.domain_radius / kR) * (2 * kPi / kA);
    }
    const int kR = 10, kTh = 6, kPh = 8;
    CPoint z(4);
    for (int i = 0; i < kR; ++i) {
      double rho = wv.domain_radius * (i + 0.5) / kR;
      for (int it = 0; it < kTh; ++it) {
        double th = (kPi / 2) * (it + 0.5) / kTh;
        for (int i1 = 0; i1 < kPh; ++i1)
          for (int i2 = 0; i2 < kPh; ++i2) {
            double p1 = 2 * kPi * (i1 + 0.5) / kPh;
            double p2 = 2 * kPi * (i2 + 0.5) / kPh;
            z[0] = rho * std::cos(th) * std::cos(p1);
            z[1] = rho * std::cos(th) * std::sin(p1);
            z[2] = rho * std::sin(th) * std::cos(p2);
            z[3] = rho * std::sin(th) * std::sin(p2);
            if (masked(z)) continue;
            double f = std::exp(-alpha * (wv.value(z) - wsup));
            if (reference) f *= reference(z);
            total += f * rho * rho * rho * std::sin(th) * std::cos(th);
          }
      }
    }
    return total * (wv.domain_radius / kR) * (kPi / 2 / kTh) * sqr(2 * kPi / kPh);
  };

  auto truncated = [&](double alpha, int depth) {
    double total = far_field(alpha);
    for (const auto& sc : centers) {
      double router = sc.near_radius;
      for (int j = 0; j < depth; ++j) {
        double rinner = router / 2;
        total += shell_integral(wv, reference, wsup, alpha, sc.c, router, rinner);
        router = rinner;
      }
    }
    return total;
  };

  // divergence = the dyadic shells keep adding mass under two successive
  // refinements of the cutoff depth
  auto divergent = [&](double alpha) {
    if (centers.empty()) return false;
    const int kDepth = 120;
    double i0 = truncated(alpha, kDepth);
    double i1 = truncated(alpha, kDepth + 20);
    double i2 = truncated(alpha, kDepth + 40);
    return i1 > opts.divergence_ratio * i0 || i2 > opts.divergence_ratio * i1;
  };

  ThresholdEstimate est;
  double lo = 0.0, hi = 0.5;
  while (!divergent(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > opts.alpha_max) {
      est.threshold = opts.alpha_max;
      est.lower = opts.alpha_max;
      est.upper = std::numeric_limits<double>::infinity();
      est.open_bracket = true;
      return est;
    }
  }
  while ((lo == 0.0 || hi - lo > opts.bracket_rel_width * lo) && hi - lo > 1e-9) {
    double mid = 0.5 * (lo + hi);
    if (divergent(mid))
      hi = mid;
    else
      lo = mid;
  }
  est.lower = lo;
  est.upper = hi;
  est.threshold = 0.5 * (lo + hi);
  return est;
}

AlphaReport alpha_over_family(const std::vector<PshWeight>& weights,
                              const VolumeDensity& reference, AlphaMode mode,
                              int fiber_dim, const ThresholdOptions& opts) {
  if (weights.empty())
    throw ValidationError("alpha_over_family: empty weight family");
  AlphaReport rep;
  rep.mode = mode;
  rep.fiber_dim = fiber_dim;
  bool first = true;
  for (const auto& w : weights) {
    ThresholdEstimate e = integrability_threshold(w, reference, opts);
    if (first || e.threshold < rep.estimate.threshold) rep.estimate = e;
    first = false;
  }
  if (mode == AlphaMode::kRelative) {
    rep.criterion_evaluated = true;
    double bound = static_cast<double>(fiber_dim) / (fiber_dim + 1);
    rep.criterion_holds =
        rep.estimate.open_bracket || rep.estimate.threshold > bound;
  }
  return rep;
}

}  // namespace klab
