#include "kahlerlab/ma_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kahlerlab/errors.hpp"

namespace klab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Linear system with band rows 0..N-2 (row 0 spans cols 0..2, interior rows
// span cols j-1..j+1) and a dense last row (gauge functional). Gaussian
// elimination with partial pivoting between adjacent band rows; fill stays
// inside a 4-wide window. The dense row is eliminated progressively and
// supplies the final pivot, which is what keeps the near-null translation
// mode harmless.
class BandGaugeSolver {
 public:
  explicit BandGaugeSolver(int n)
      : n_(n), start_(n - 1), w_(4 * (n - 1), 0.0), dense_(n, 0.0) {}

  void set_band_entry(int row, int col, double v) {
    if (col < start_at(row) || col >= start_at(row) + 4)
      throw SolverError("band solver: entry outside window");
    w_[4 * row + (col - start_at(row))] = v;
  }
  void set_dense_entry(int col, double v) { dense_[col] = v; }

  // Solves in place; rhs has size n (band rows then the dense row's value).
  std::vector<double> solve(std::vector<double> rhs) {
    for (int c = 0; c + 1 < n_; ++c) {
      int below = c + 1;  // next band row with a col-c entry
      if (below <= n_ - 2) {
        if (std::abs(entry(below, c)) > std::abs(entry(c, c))) {
          swap_rows(c, below);
          std::swap(rhs[c], rhs[below]);
        }
      }
      double piv = entry(c, c);
      if (piv == 0.0) throw SolverError("band solver: zero pivot");
      if (below <= n_ - 2 && entry(below, c) != 0.0) {
        double m = entry(below, c) / piv;
        set_exact_zero(below, c);  // keep eliminated slots exact for realign
        for (int k = c + 1; k < std::min(n_, c + 4); ++k)
          add_entry(below, k, -m * entry(c, k));
        rhs[below] -= m * rhs[c];
      }
      if (dense_[c] != 0.0) {
        double m = dense_[c] / piv;
        dense_[c] = 0.0;
        for (int k = c + 1; k < std::min(n_, c + 4); ++k)
          dense_[k] -= m * entry(c, k);
        rhs[n_ - 1] -= m * rhs[c];
      }
    }
    std::vector<double> x(n_, 0.0);
    if (dense_[n_ - 1] == 0.0)
      throw SolverError("band solver: singular gauge pivot");
    x[n_ - 1] = rhs[n_ - 1] / dense_[n_ - 1];
    for (int r = n_ - 2; r >= 0; --r) {
      double sum = rhs[r];
      for (int k = r + 1; k < std::min(n_, r + 4); ++k)
        sum -= entry(r, k) * x[k];
      x[r] = sum / entry(r, r);
    }
    return x;
  }

 private:
  int start_at(int row) const { return start_[row]; }
  double entry(int row, int col) const {
    int off = col - start_[row];
    if (off < 0 || off >= 4) return 0.0;
    return w_[4 * row + off];
  }
  void add_entry(int row, int col, double v) {
    int off = col - start_[row];
    if (off < 0 || off >= 4) {
      if (v == 0.0) return;
      realign(row, col);
      off = col - start_[row];
      if (off < 0 || off >= 4)
        throw SolverError("band solver: fill outside window");
    }
    w_[4 * row + off] += v;
  }
  void set_exact_zero(int row, int col) {
    int off = col - start_[row];
    if (off >= 0 && off < 4) w_[4 * row + off] = 0.0;
  }
  void realign(int row, int col) {
    // shift the window right when leading entries are already zero
    int s = start_[row];
    int need = col - 3;
    while (s < need) {
      if (w_[4 * row] != 0.0)
        throw SolverError("band solver: cannot realign nonzero entry");
      for (int k = 0; k < 3; ++k) w_[4 * row + k] = w_[4 * row + k + 1];
      w_[4 * row + 3] = 0.0;
      ++s;
    }
    start_[row] = s;
  }
  void swap_rows(int a, int b) {
    for (int k = 0; k < 4; ++k) std::swap(w_[4 * a + k], w_[4 * b + k]);
    std::swap(start_[a], start_[b]);
  }

  int n_;
  std::vector<int> start_;
  std::vector<double> w_;
  std::vector<double> dense_;

 public:
  void init_structure(const std::vector<int>& starts) { start_ = starts; }
};

// Residual and Jacobian assembly for the reduced KE / soliton equation
//   u'' + lambda e^u + a e^u u' = 0
// Rows: 0 = Robin at -S, 1..N-2 = Numerov (KE) or central (soliton),
// N-1 = area-centroid gauge. Robin at +S is a separate bordered equation in
// the soliton solve.
struct RadialSystem {
  RadialGrid grid;
  ConeData cone;
  double lambda = 1.0;
  bool numerov = true;  // soliton path uses the central scheme
  double gauge_scale = 1.0;

  int n() const { return grid.nodes; }

  std::vector<double> residual(const std::vector<double>& u, double a) const {
    const int N = n();
    const double h = grid.h();
    std::vector<double> F(N, 0.0);
    std::vector<double> e(N);
    for (int j = 0; j < N; ++j) e[j] = std::exp(u[j]);
    F[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h) - cone.beta0 +
           lambda * e[0] / cone.beta0 + a * e[0];
    for (int j = 1; j + 1 < N; ++j) {
      double lap = (u[j - 1] - 2 * u[j] + u[j + 1]) / (h * h);
      double src;
      if (numerov) {
        src = lambda * (e[j - 1] + 10 * e[j] + e[j + 1]) / 12.0;
      } else {
        double up = (u[j + 1] - u[j - 1]) / (2 * h);
        src = lambda * e[j] + a * e[j] * up;
      }
      F[j] = lap + src;
    }
    double g = 0;
    for (int j = 0; j < N; ++j) {
      double wj = (j == 0 || j == N - 1) ? 0.5 : 1.0;
      g += wj * grid.s(j) * e[j] * h;
    }
    F[N - 1] = gauge_scale * g;
    return F;
  }

  double robin_plus_residual(const std::vector<double>& u, double a) const {
    const int N = n();
    const double h = grid.h();
    double eN = std::exp(u[N - 1]);
    return (3 * u[N - 1] - 4 * u[N - 2] + u[N - 3]) / (2 * h) + cone.beta_inf -
           lambda * eN / cone.beta_inf + a * eN;
  }

  // Fills the band+gauge matrix with the Jacobian w.r.t. u.
  void jacobian(const std::vector<double>& u, double a,
                BandGaugeSolver& M) const {
    const int N = n();
    const double h = grid.h();
    std::vector<int> starts(N - 1);
    starts[0] = 0;
    for (int j = 1; j <= N - 2; ++j) starts[j] = j - 1;
    M.init_structure(starts);
    std::vector<double> e(N);
    for (int j = 0; j < N; ++j) e[j] = std::exp(u[j]);
    M.set_band_entry(0, 0,
                     -3 / (2 * h) + lambda * e[0] / cone.beta0 + a * e[0]);
    M.set_band_entry(0, 1, 4 / (2 * h));
    M.set_band_entry(0, 2, -1 / (2 * h));
    for (int j = 1; j + 1 < N; ++j) {
      double dm, dj, dp;
      if (numerov) {
        dm = 1 / (h * h) + lambda * e[j - 1] / 12.0;
        dj = -2 / (h * h) + lambda * 10 * e[j] / 12.0;
        dp = 1 / (h * h) + lambda * e[j + 1] / 12.0;
      } else {
        double up = (u[j + 1] - u[j - 1]) / (2 * h);
        dm = 1 / (h * h) - a * e[j] / (2 * h);
        dj = -2 / (h * h) + lambda * e[j] + a * e[j] * up;
        dp = 1 / (h * h) + a * e[j] / (2 * h);
      }
      M.set_band_entry(j, j - 1, dm);
      M.set_band_entry(j, j, dj);
      M.set_band_entry(j, j + 1, dp);
    }
    for (int j = 0; j < N; ++j) {
      double wj = (j == 0 || j == N - 1) ? 0.5 : 1.0;
      M.set_dense_entry(j, gauge_scale * wj * grid.s(j) * e[j] * h);
    }
  }

  std::vector<double> d_residual_da(const std::vector<double>& u) const {
    const int N = n();
    const double h = grid.h();
    std::vector<double> c(N, 0.0);
    c[0] = std::exp(u[0]);
    for (int j = 1; j + 1 < N; ++j) {
      if (!numerov) {
        double up = (u[j + 1] - u[j - 1]) / (2 * h);
        c[j] = std::exp(u[j]) * up;
      }
    }
    c[N - 1] = 0.0;  // gauge does not see a
    return c;
  }

  double d_robin_plus_da(const std::vector<double>& u) const {
    return std::exp(u[n() - 1]);
  }
};

double sup_norm(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct NewtonOutcome {
  std::vector<double> u;
  double a = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Damped Newton with Armijo backtracking on the sup-residual. With
// with_border the Robin condition at +S is appended and the soliton
// coefficient a becomes the bordered unknown.
NewtonOutcome newton_solve(const RadialSystem& sys, std::vector<double> u0,
                           double a0, bool with_border, double tol,
                           int max_iter, int max_restarts) {
  NewtonOutcome out;
  out.u = std::move(u0);
  out.a = a0;
  const int N = sys.n();
  auto total_residual = [&](const std::vector<double>& u, double a) {
    double r = sup_norm(sys.residual(u, a));
    if (with_border) r = std::max(r, std::abs(sys.robin_plus_residual(u, a)));
    return r;
  };
  out.residual = total_residual(out.u, out.a);
  for (int it = 0; it < max_iter; ++it) {
    if (out.residual <= tol) {
      out.converged = true;
      out.iterations = it;
      return out;
    }
    std::vector<double> F = sys.residual(out.u, out.a);
    for (double& v : F) v = -v;
    BandGaugeSolver M(N);
    sys.jacobian(out.u, out.a, M);
    std::vector<double> du;
    double da = 0.0;
    if (!with_border) {
      du = M.solve(F);
    } else {
      BandGaugeSolver M2(N);
      sys.jacobian(out.u, out.a, M2);
      std::vector<double> y = M.solve(F);
      std::vector<double> z = M2.solve(sys.d_residual_da(out.u));
      // bordered elimination for the +S Robin row
      const double h = sys.grid.h();
      double eN = std::exp(out.u[N - 1]);
      std::vector<double> r(N, 0.0);
      r[N - 1] = 3 / (2 * h) - sys.lambda * eN / sys.cone.beta_inf +
                 out.a * eN;
      r[N - 2] = -4 / (2 * h);
      r[N - 3] = 1 / (2 * h);
      double rd_y = 0, rd_z = 0;
      for (int j = N - 3; j < N; ++j) {
        rd_y += r[j] * y[j];
        rd_z += r[j] * z[j];
      }
      double Fs = -sys.robin_plus_residual(out.u, out.a);
      double dA = sys.d_robin_plus_da(out.u);
      double denom = dA - rd_z;
      if (denom == 0.0) throw SolverError("soliton: singular bordered system");
      da = (Fs - rd_y) / denom;
      du = y;
      for (int j = 0; j < N; ++j) du[j] -= da * z[j];
    }
    // Armijo backtracking on the sup-residual
    double step = 1.0;
    bool accepted = false;
    for (int restart = 0; restart <= max_restarts; ++restart) {
      std::vector<double> trial = out.u;
      for (int j = 0; j < N; ++j) trial[j] += step * du[j];
      double ta = out.a + step * da;
      double tr = total_residual(trial, ta);
      if (tr <= (1.0 - 1e-4 * step) * out.residual) {
        out.u = std::move(trial);
        out.a = ta;
        out.residual = tr;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.iterations = it + 1;
      out.converged = out.residual <= 100 * tol;  // round-off floor stall
      return out;
    }
  }
  out.iterations = max_iter;
  out.converged = out.residual <= tol;
  return out;
}

}  // namespace

KESolveResult ke_solve_radial(ConeData cone, const SolveOptions& opts) {
  if (!(cone.beta0 > 0 && cone.beta0 <= 1 && cone.beta_inf > 0 &&
        cone.beta_inf <= 1))
    throw ValidationError("ke_solve_radial: cone angles must lie in (0,1]");
  double natural_area = kTwoPi * (cone.beta0 + cone.beta_inf);
  double area = opts.total_area > 0 ? opts.total_area : natural_area;
  double lambda = natural_area / area;

  RadialSystem sys;
  sys.grid = opts.grid;
  sys.cone = cone;
  sys.lambda = lambda;
  sys.numerov = true;
  sys.gauge_scale = lambda / (opts.grid.S * (cone.beta0 + cone.beta_inf));

  std::vector<double> f0 = reference_density(opts.grid, cone, lambda);
  std::vector<double> u0(f0.size());
  for (size_t j = 0; j < f0.size(); ++j) u0[j] = std::log(f0[j]);

  NewtonOutcome nw = newton_solve(sys, std::move(u0), 0.0, false, opts.tol,
                                  opts.max_iter, opts.max_restarts);
  if (!nw.converged) {
    if (std::abs(cone.beta0 - cone.beta_inf) > 1e-12)
      throw ObstructionSuspectedError(
          "ke_solve_radial: no convergence for unequal cone angles "
          "(teardrop regime)");
    throw SolverError("ke_solve_radial: damped Newton failed to converge");
  }

  KESolveResult res;
  res.iterations = nw.iterations;
  res.residual = nw.residual;
  res.lambda = lambda;
  res.end_slope_error = std::abs(sys.robin_plus_residual(nw.u, 0.0));
  if (res.end_slope_error > 1e-3 * std::max(1.0, cone.beta_inf))
    throw ObstructionSuspectedError(
        "ke_solve_radial: converged profile misses the requested cone angle "
        "at infinity (teardrop regime): slope defect " +
        std::to_string(res.end_slope_error));
  std::vector<double> f(nw.u.size());
  for (size_t j = 0; j < nw.u.size(); ++j) f[j] = std::exp(nw.u[j]);
  res.profile = RadialProfile::from_density(opts.grid, std::move(f), cone);
  return res;
}

SolitonResult soliton_solve_radial(ConeData cone, bool coefficient_search,
                                   double fixed_coefficient,
                                   const SolveOptions& opts) {
  if (!(cone.beta0 > 0 && cone.beta0 <= 1 && cone.beta_inf > 0 &&
        cone.beta_inf <= 1))
    throw ValidationError("soliton_solve_radial: cone angles must lie in (0,1]");
  double natural_area = kTwoPi * (cone.beta0 + cone.beta_inf);
  double area = opts.total_area > 0 ? opts.total_area : natural_area;
  double lambda = natural_area / area;

  RadialSystem sys;
  sys.grid = opts.grid;
  sys.cone = cone;
  sys.lambda = lambda;
  sys.numerov = false;  // the a-term needs the central scheme
  sys.gauge_scale = lambda / (opts.grid.S * (cone.beta0 + cone.beta_inf));

  std::vector<double> f0 = reference_density(opts.grid, cone, lambda);
  std::vector<double> u0(f0.size());
  for (size_t j = 0; j < f0.size(); ++j) u0[j] = std::log(f0[j]);

  NewtonOutcome nw =
      newton_solve(sys, std::move(u0), fixed_coefficient, coefficient_search,
                   opts.tol, opts.max_iter, opts.max_restarts);
  if (!nw.converged) {
    if (std::abs(cone.beta0 - cone.beta_inf) > 1e-12)
      throw ObstructionSuspectedError(
          "soliton_solve_radial: no convergence for unequal cone angles");
    throw SolverError("soliton_solve_radial: damped Newton failed to converge");
  }
  if (!coefficient_search) {
    double defect = std::abs(sys.robin_plus_residual(nw.u, nw.a));
    if (defect > 1e-3 * std::max(1.0, cone.beta_inf))
      throw ObstructionSuspectedError(
          "soliton_solve_radial: fixed-coefficient profile misses the cone "
          "angle at infinity: slope defect " + std::to_string(defect));
  }

  SolitonResult res;
  res.iterations = nw.iterations;
  res.residual = nw.residual;
  res.lambda = lambda;
  res.soliton.vector_field_coefficient = nw.a;
  std::vector<double> f(nw.u.size());
  for (size_t j = 0; j < nw.u.size(); ++j) f[j] = std::exp(nw.u[j]);
  // theta_X from the contraction identity i_X omega = sqrt(-1) dbar theta:
  // theta'(s) = a f(s), integrated by the trapezoid rule
  res.soliton.theta.assign(f.size(), 0.0);
  const double h = opts.grid.h();
  for (size_t j = 1; j < f.size(); ++j)
    res.soliton.theta[j] =
        res.soliton.theta[j - 1] + 0.5 * h * nw.a * (f[j] + f[j - 1]);
  res.profile = RadialProfile::from_density(opts.grid, std::move(f), cone);
  return res;
}

double soliton_equation_residual(const RadialProfile& p, double a,
                                 double lambda,
                                 const std::vector<double>& source) {
  const int N = p.grid.nodes;
  const double h = p.grid.h();
  if (!source.empty() && static_cast<int>(source.size()) != N)
    throw ValidationError("soliton_equation_residual: source size mismatch");
  std::vector<double> u = p.log_density();
  double worst = 0;
  for (int j = 1; j + 1 < N; ++j) {
    double lap = (u[j - 1] - 2 * u[j] + u[j + 1]) / (h * h);
    double up = (u[j + 1] - u[j - 1]) / (2 * h);
    double r = lap + lambda * p.density[j] + a * p.density[j] * up;
    if (!source.empty()) r -= source[j];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

ContinuityPath ContinuityPath::validated(ContinuityPath p, double base_beta0) {
  if (p.epsilon_schedule.empty())
    throw ValidationError("continuity path: empty epsilon schedule");
  for (size_t i = 0; i < p.epsilon_schedule.size(); ++i) {
    if (!(p.epsilon_schedule[i] > 0))
      throw ValidationError("continuity path: epsilons must be positive");
    if (i > 0 && !(p.epsilon_schedule[i] < p.epsilon_schedule[i - 1]))
      throw ValidationError("continuity path: schedule must be strictly decreasing");
  }
  double asum = 0, bsum = 0;
  for (double a : p.psi_plus_poles) {
    if (!(a > 0))
      throw ValidationError("continuity path: psi_plus pole coefficients must be > 0");
    asum += a;
  }
  for (double b : p.psi_minus_poles) {
    if (!(b > 0 && b < 1))
      throw ValidationError(
          "continuity path: psi_minus pole coefficients must satisfy the klt "
          "bound 0 < b < 1");
    bsum += b;
  }
  if (base_beta0 + asum - bsum <= 0)
    throw ValidationError(
        "continuity path: limit cone angle at the origin would be nonpositive");
  return p;
}

std::vector<double> ContinuityPath::default_schedule() {
  std::vector<double> eps;
  for (int k = 1; k <= 6; ++k) eps.push_back(std::pow(10.0, -k));
  return eps;
}

ContinuityResult continuity_path_run(const ContinuityPath& path,
                                     const RadialProfile& initial) {
  ContinuityPath p = ContinuityPath::validated(path, initial.cone.beta0);
  const RadialGrid grid = initial.grid;
  const int N = grid.nodes;
  const double h = grid.h();
  double asum = 0, bsum = 0;
  for (double a : p.psi_plus_poles) asum += a;
  for (double b : p.psi_minus_poles) bsum += b;

  ContinuityResult out;
  out.effective_angle_at_origin = initial.cone.beta0 + asum - bsum;

  std::vector<double> psi(N, 0.0);  // warm start across the schedule
  std::vector<double> prev_f = initial.density;
  bool have_prev = false;

  for (size_t step = 0; step < p.epsilon_schedule.size(); ++step) {
    double eps = p.epsilon_schedule[step];
    // twisted density e^{psi_+ - psi_-} f_ref with smoothed poles
    std::vector<double> target(N);
    for (int j = 0; j < N; ++j) {
      double reg = std::log(std::exp(grid.s(j)) + eps);
      double tw = (asum - bsum) * reg;
      target[j] = std::exp(tw) * initial.density[j];
    }
    // compatibility defect m = int (target - f_ref) ds, split between ends
    double m = 0;
    for (int j = 0; j < N; ++j) {
      double wj = (j == 0 || j == N - 1) ? 0.5 : 1.0;
      m += wj * (target[j] - initial.density[j]) * h;
    }

    // damped Newton on G(psi) = psi'' - (target - f_ref); the equation is
    // linear so a full step converges immediately, but the machinery is
    // shared with the nonlinear solvers (warm start matters for timing only)
    auto residual = [&](const std::vector<double>& q) {
      std::vector<double> F(N, 0.0);
      F[0] = (-3 * q[0] + 4 * q[1] - q[2]) / (2 * h) - (-m / 2);
      for (int j = 1; j + 1 < N; ++j)
        F[j] = (q[j - 1] - 2 * q[j] + q[j + 1]) / (h * h) -
               (target[j] - initial.density[j]);
      F[N - 1] = q[N / 2];  // potential gauge
      return F;
    };
    int iterations = 0;
    double res = sup_norm(residual(psi));
    for (int it = 0; it < 10 && res > 1e-11; ++it) {
      std::vector<double> F = residual(psi);
      for (double& v : F) v = -v;
      BandGaugeSolver M(N);
      std::vector<int> starts(N - 1);
      starts[0] = 0;
      for (int j = 1; j <= N - 2; ++j) starts[j] = j - 1;
      M.init_structure(starts);
      M.set_band_entry(0, 0, -3 / (2 * h));
      M.set_band_entry(0, 1, 4 / (2 * h));
      M.set_band_entry(0, 2, -1 / (2 * h));
      for (int j = 1; j + 1 < N; ++j) {
        M.set_band_entry(j, j - 1, 1 / (h * h));
        M.set_band_entry(j, j, -2 / (h * h));
        M.set_band_entry(j, j + 1, 1 / (h * h));
      }
      M.set_dense_entry(N / 2, 1.0);
      std::vector<double> dq = M.solve(F);
      for (int j = 0; j < N; ++j) psi[j] += dq[j];
      res = sup_norm(residual(psi));
      ++iterations;
    }

    // reconstruct the density from the solved potential
    std::vector<double> f_eps(N);
    for (int j = 1; j + 1 < N; ++j)
      f_eps[j] = initial.density[j] +
                 (psi[j - 1] - 2 * psi[j] + psi[j + 1]) / (h * h);
    f_eps[0] = target[0];
    f_eps[N - 1] = target[N - 1];

    ContinuityStep st;
    st.epsilon = eps;
    st.newton_iterations = iterations;
    double density_res = 0;
    for (int j = 0; j < N; ++j)
      density_res = std::max(density_res, std::abs(f_eps[j] - target[j]));
    st.residual = density_res;
    st.c0_bound = sup_norm(psi);
    if (have_prev) {
      double d = 0;
      for (int j = 0; j < N; ++j)
        d = std::max(d, std::abs(f_eps[j] - prev_f[j]));
      st.sup_distance = d;
    }
    bool ok = res <= 1e-9 && density_res <= 1e-6 * (1 + sup_norm(target));
    for (double v : f_eps)
      if (!(v > 0) || !std::isfinite(v)) ok = false;
    out.steps.push_back(st);
    if (!ok) {
      out.converged_all = false;
      out.failure_index = static_cast<int>(step);
      break;
    }
    prev_f = f_eps;
    have_prev = true;
  }

  if (out.steps.empty() || !out.converged_all) {
    if (out.failure_index < 0) out.failure_index = 0;
    if (!have_prev)
      throw SolverError("continuity_path_run: first epsilon step failed");
  }
  out.final_profile =
      RadialProfile::from_density(grid, prev_f, initial.cone);
  return out;
}

}  // namespace klab
