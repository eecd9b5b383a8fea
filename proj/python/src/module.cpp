// Python bindings for the main operations: exact toric K-stability numbers,
// pluripotential estimators, the radial MA solvers and the fibration lab.
// Exact rationals cross the boundary as "p/q" strings.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/fibration.hpp"
#include "kahlerlab/flow.hpp"
#include "kahlerlab/jobs.hpp"
#include "kahlerlab/kstability.hpp"
#include "kahlerlab/ma_solvers.hpp"
#include "kahlerlab/metric_models.hpp"
#include "kahlerlab/polytope.hpp"
#include "kahlerlab/psh.hpp"
#include "kahlerlab/radial.hpp"

namespace py = pybind11;
using namespace klab;

namespace {

LatticePolytope polytope_of(const std::vector<LatticeVector>& vertices) {
  return LatticePolytope::from_vertices(vertices);
}

ToricTestConfiguration tc_of(const std::vector<LatticeVector>& vertices,
                             const std::vector<std::vector<std::string>>& gradients,
                             const std::vector<std::string>& offsets) {
  std::vector<AffinePiece> pieces;
  for (size_t i = 0; i < gradients.size(); ++i) {
    AffinePiece piece;
    for (const auto& g : gradients[i]) piece.gradient.push_back(Rational::parse(g));
    piece.offset = i < offsets.size() ? Rational::parse(offsets[i]) : Rational(0);
    pieces.push_back(std::move(piece));
  }
  return ToricTestConfiguration::make(polytope_of(vertices), std::move(pieces));
}

PshWeight weight_of(int dim, const std::vector<std::pair<CPoint, double>>& poles,
                    const std::string& smooth, double domain_radius) {
  PshWeight w;
  w.dim = dim;
  for (const auto& [c, lambda] : poles) w.poles.push_back({c, lambda});
  w.smooth = smooth_preset_from_name(smooth);
  w.domain_radius = domain_radius;
  return PshWeight::validated(w);
}

FamilyDescriptor family_of(const std::string& kind, Complex tau0, Complex slope,
                           bool mixed, double half_width, int samples,
                           int fiber_resolution) {
  FamilyDescriptor f;
  f.kind = family_kind_from_name(kind);
  f.tau.tau0 = tau0;
  f.tau.slope = slope;
  f.tau.mixed = mixed;
  f.base.half_width = half_width;
  f.base.samples = samples;
  f.fiber_resolution = fiber_resolution;
  return FamilyDescriptor::validated(f);
}

py::dict profile_dict(const RadialProfile& p) {
  py::dict d;
  std::vector<double> s(p.grid.nodes);
  for (int j = 0; j < p.grid.nodes; ++j) s[j] = p.grid.s(j);
  d["s"] = s;
  d["density"] = p.density;
  d["total_area"] = p.total_area;
  d["gauss_bonnet"] = gauss_bonnet(p);
  d["beta0"] = p.cone.beta0;
  d["beta_inf"] = p.cone.beta_inf;
  return d;
}

}  // namespace

PYBIND11_MODULE(_kahlerlab, m) {
  m.doc() = "K-stability and canonical Kahler metric computations";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ObstructionSuspectedError>(m, "ObstructionSuspectedError",
                                                    PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  // --- polytope_core ---------------------------------------------------
  m.def(
      "lattice_point_count",
      [](const std::vector<LatticeVector>& vertices, long long k) {
        return lattice_point_count(polytope_of(vertices), k);
      },
      py::arg("vertices"), py::arg("k"));

  m.def(
      "ehrhart_coefficients",
      [](const std::vector<LatticeVector>& vertices) {
        auto p = polytope_of(vertices);
        std::vector<long long> ks;
        for (long long k = 1; k <= p.dim + 3; ++k) ks.push_back(k);
        auto poly = ehrhart_fit(p, ks);
        std::vector<std::string> out;
        for (const auto& c : poly.coeffs) out.push_back(c.to_string());
        return out;
      },
      py::arg("vertices"), "Coefficients c_0..c_n as exact \"p/q\" strings.");

  m.def(
      "barycenter",
      [](const std::vector<LatticeVector>& vertices) {
        std::vector<std::string> out;
        for (const auto& c : barycenter(polytope_of(vertices)))
          out.push_back(c.to_string());
        return out;
      },
      py::arg("vertices"));

  m.def(
      "toric_degrees",
      [](const std::vector<LatticeVector>& vertices) {
        auto d = toric_degrees(polytope_of(vertices));
        return py::make_tuple(d.L_degree.to_string(),
                              d.anticanonical_degree.to_string());
      },
      py::arg("vertices"), "(L_degree, anticanonical_degree)");

  // --- kstability -------------------------------------------------------
  m.def(
      "donaldson_futaki",
      [](const std::vector<LatticeVector>& vertices,
         const std::vector<std::vector<std::string>>& gradients,
         const std::vector<std::string>& offsets) {
        auto r = donaldson_futaki(tc_of(vertices, gradients, offsets));
        py::dict d;
        d["futaki"] = r.futaki.to_string();
        d["verdict"] = to_string(r.verdict);
        d["a0"] = r.hilbert.a0.to_string();
        d["a1"] = r.hilbert.a1.to_string();
        d["b0"] = r.weight.b0.to_string();
        d["b1"] = r.weight.b1.to_string();
        return d;
      },
      py::arg("vertices"), py::arg("gradients"),
      py::arg("offsets") = std::vector<std::string>{});

  m.def(
      "eta_constant",
      [](const std::vector<LatticeVector>& vertices) {
        return eta_constant(polytope_of(vertices)).to_string();
      },
      py::arg("vertices"));

  m.def(
      "cm_degree",
      [](const std::string& relcanonical, const std::string& polarization,
         int n, const std::string& eta) {
        CMPushforwardData data{Rational::parse(relcanonical),
                               Rational::parse(polarization), n};
        return cm_degree(data, Rational::parse(eta)).to_string();
      },
      py::arg("relcanonical_term"), py::arg("polarization_term"), py::arg("n"),
      py::arg("eta"));

  // --- psh_lab ----------------------------------------------------------
  m.def(
      "lelong_number",
      [](int dim, const std::vector<std::pair<CPoint, double>>& poles,
         const std::string& smooth, const CPoint& point, double domain_radius) {
        auto est = lelong_number(weight_of(dim, poles, smooth, domain_radius),
                                 point);
        py::dict d;
        d["value"] = est.value;
        d["slope_value"] = est.slope_value;
        d["r_schedule"] = est.r_schedule;
        return d;
      },
      py::arg("dim"), py::arg("poles"), py::arg("smooth") = "zero",
      py::arg("point") = CPoint{0.0, 0.0}, py::arg("domain_radius") = 2.0);

  m.def(
      "integrability_threshold",
      [](int dim, const std::vector<std::pair<CPoint, double>>& poles,
         const std::string& smooth, double domain_radius) {
        auto est = integrability_threshold(
            weight_of(dim, poles, smooth, domain_radius));
        py::dict d;
        d["threshold"] = est.threshold;
        d["bracket"] = py::make_tuple(est.lower, est.upper);
        d["open_bracket"] = est.open_bracket;
        return d;
      },
      py::arg("dim"), py::arg("poles"), py::arg("smooth") = "zero",
      py::arg("domain_radius") = 2.0);

  // --- metric_models ------------------------------------------------------
  m.def(
      "eval_conical_model",
      [](double beta, int n, const std::vector<Complex>& z) {
        auto s = eval_conical_model({beta, n}, z);
        std::vector<std::vector<Complex>> rows(n, std::vector<Complex>(n));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) rows[i][j] = s.matrix.at(i, j);
        return rows;
      },
      py::arg("beta"), py::arg("n"), py::arg("z"));

  m.def(
      "eval_fibrewise_model",
      [](const std::string& kind, int n, Complex t, const std::vector<Complex>& z) {
        FibrewiseModelMetric mm;
        mm.kind = kind == "poincare" ? FibrewiseKind::kPoincare
                                     : FibrewiseKind::kConical;
        mm.n = n;
        mm.t = t;
        auto s = eval_fibrewise_model(mm, z);
        std::vector<std::vector<Complex>> rows(n, std::vector<Complex>(n));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) rows[i][j] = s.matrix.at(i, j);
        return rows;
      },
      py::arg("kind"), py::arg("n"), py::arg("t"), py::arg("z"));

  // --- ma_engine ----------------------------------------------------------
  m.def(
      "ke_solve",
      [](double beta0, double beta_inf, double S, int nodes, double total_area) {
        SolveOptions opts;
        opts.grid = {S, nodes};
        opts.total_area = total_area;
        auto res = ke_solve_radial({beta0, beta_inf}, opts);
        py::dict d = profile_dict(res.profile);
        d["lambda"] = res.lambda;
        d["residual"] = res.residual;
        d["iterations"] = res.iterations;
        return d;
      },
      py::arg("beta0"), py::arg("beta_inf"), py::arg("S") = 20.0,
      py::arg("nodes") = 2048, py::arg("total_area") = 0.0);

  m.def(
      "soliton_solve",
      [](double beta0, double beta_inf, bool search, double S, int nodes) {
        SolveOptions opts;
        opts.grid = {S, nodes};
        auto res = soliton_solve_radial({beta0, beta_inf}, search, 0.0, opts);
        py::dict d = profile_dict(res.profile);
        d["vector_field_coefficient"] = res.soliton.vector_field_coefficient;
        d["theta"] = res.soliton.theta;
        d["residual"] = res.residual;
        return d;
      },
      py::arg("beta0"), py::arg("beta_inf"), py::arg("search") = true,
      py::arg("S") = 20.0, py::arg("nodes") = 2048);

  m.def(
      "flow_run",
      [](double beta0, double beta_inf, double phi, double t_end,
         double perturb_amplitude, double S, int nodes) {
        SolveOptions opts;
        opts.grid = {S, nodes};
        ConeData cone{beta0, beta_inf};
        auto ke = ke_solve_radial(cone, opts);
        std::vector<double> f0 = ke.profile.density;
        for (int j = 0; j < opts.grid.nodes; ++j) {
          double s = opts.grid.s(j);
          f0[j] *= 1.0 + perturb_amplitude * std::exp(-s * s / 4.0);
        }
        double a = radial_area(opts.grid, f0);
        for (double& v : f0) v *= ke.profile.total_area / a;
        auto initial = RadialProfile::from_density(opts.grid, f0, cone);
        auto run = kr_flow_run(initial, phi, t_end,
                               flow_stable_dt(initial, phi), 40);
        double dist = 0;
        for (int j = 0; j < opts.grid.nodes; ++j)
          dist = std::max(dist, std::abs(run.final_profile.density[j] -
                                         ke.profile.density[j]));
        py::dict d = profile_dict(run.final_profile);
        d["final_residual"] = run.states.back().residual_norm;
        d["sup_distance_to_newton"] = dist;
        d["area_drift_per_unit_time"] = run.area_drift_per_unit_time;
        return d;
      },
      py::arg("beta0") = 1.0, py::arg("beta_inf") = 1.0, py::arg("phi") = 1.0,
      py::arg("t_end") = 8.0, py::arg("perturb_amplitude") = 0.1,
      py::arg("S") = 6.0, py::arg("nodes") = 256);

  m.def(
      "continuity_run",
      [](const std::vector<double>& psi_plus, const std::vector<double>& psi_minus,
         const std::vector<double>& epsilons, double S, int nodes) {
        RadialGrid grid{S, nodes};
        auto base = round_profile(grid);
        ContinuityPath path;
        path.epsilon_schedule =
            epsilons.empty() ? ContinuityPath::default_schedule() : epsilons;
        path.psi_plus_poles = psi_plus;
        path.psi_minus_poles = psi_minus;
        auto out = continuity_path_run(path, base);
        py::dict d = profile_dict(out.final_profile);
        d["converged_all"] = out.converged_all;
        d["effective_angle_at_origin"] = out.effective_angle_at_origin;
        std::vector<double> sup_distances;
        for (const auto& st : out.steps) sup_distances.push_back(st.sup_distance);
        d["sup_distances"] = sup_distances;
        return d;
      },
      py::arg("psi_plus") = std::vector<double>{},
      py::arg("psi_minus") = std::vector<double>{},
      py::arg("epsilons") = std::vector<double>{}, py::arg("S") = 14.0,
      py::arg("nodes") = 2048);

  // --- fibration_lab --------------------------------------------------------
  m.def(
      "wp_density",
      [](const std::string& kind, Complex tau0, Complex slope, Complex s,
         const std::string& estimator, int fiber_resolution) {
        auto fam = family_of(kind, tau0, slope, false, 0.25, 9, fiber_resolution);
        WPSample w = estimator == "ks" ? wp_via_ks_norm(fam, s)
                                       : wp_fiber_integral(fam, s);
        py::dict d;
        d["wp_density"] = w.wp_density;
        d["ks_norm"] = w.ks_norm;
        return d;
      },
      py::arg("kind") = "torus_family", py::arg("tau0") = Complex(0, 1),
      py::arg("slope") = Complex(1, 0), py::arg("s") = Complex(0, 0),
      py::arg("estimator") = "fiber_integral", py::arg("fiber_resolution") = 24);

  m.def(
      "foliation_rank",
      [](const std::string& kind, Complex tau0, Complex slope, Complex s,
         int fiber_resolution) {
        auto fam = family_of(kind, tau0, slope, false, 0.25, 9, fiber_resolution);
        auto e = foliation_rank(fam, s);
        py::dict d;
        d["null_rank"] = e.null_rank;
        d["fiber_dim"] = e.fiber_dim;
        d["full_rank_null"] = e.full_rank_null;
        return d;
      },
      py::arg("kind") = "torus_family", py::arg("tau0") = Complex(0, 1),
      py::arg("slope") = Complex(1, 0), py::arg("s") = Complex(0, 0),
      py::arg("fiber_resolution") = 24);

  m.def(
      "horizontal_c_residual",
      [](Complex tau0, Complex slope, Complex s, int fiber_resolution) {
        auto fam = family_of("torus_family", tau0, slope, false, 0.25, 9,
                             fiber_resolution);
        return horizontal_c_residual(fam, s);
      },
      py::arg("tau0") = Complex(0, 1), py::arg("slope") = Complex(1, 0),
      py::arg("s") = Complex(0, 0), py::arg("fiber_resolution") = 24);

  m.def(
      "relative_ke_residual_torus",
      [](Complex tau0, Complex slope, int fiber_resolution) {
        FamilyDescriptor f;
        f.kind = FamilyKind::kTorus;
        f.tau.tau0 = tau0;
        f.tau.slope = slope;
        f.base.half_width = 0.45;
        f.fiber_resolution = fiber_resolution;
        return torus_family_relative_residual(FamilyDescriptor::validated(f), {});
      },
      py::arg("tau0") = Complex(0, 1), py::arg("slope") = Complex(0.4, 0),
      py::arg("fiber_resolution") = 24);

  // --- jobs -------------------------------------------------------------
  m.def(
      "run_job",
      [](const std::string& config_json) {
        auto cfg = JobConfig::from_json(nlohmann::json::parse(config_json));
        auto rep = run_job(cfg);
        py::dict d;
        d["exit_code"] = rep.exit_code;
        d["config_hash"] = rep.config_hash;
        d["results"] = rep.results.dump();
        d["error"] = rep.error;
        return d;
      },
      py::arg("config_json"),
      "Runs a CLI job from its JSON config string; results as a JSON string.");

  m.attr("__version__") = "0.1.0";
}
