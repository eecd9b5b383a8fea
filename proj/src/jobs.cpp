#include "kahlerlab/jobs.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <semaphore>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/fibration.hpp"
#include "kahlerlab/flow.hpp"
#include "kahlerlab/kstability.hpp"
#include "kahlerlab/ma_solvers.hpp"
#include "kahlerlab/metric_models.hpp"
#include "kahlerlab/polytope.hpp"
#include "kahlerlab/psh.hpp"
#include "kahlerlab/radial.hpp"

namespace klab {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- JSON parsing helpers -------------------------------------------------

Rational rational_from(const json& j, const char* what) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw ValidationError(std::string(what) +
                        ": rationals must be integers or \"p/q\" strings");
}

LatticePolytope polytope_from(const json& j) {
  if (!j.contains("vertices") || !j["vertices"].is_array())
    throw ValidationError("polytope: missing \"vertices\" array");
  std::vector<LatticeVector> verts;
  for (const auto& row : j["vertices"]) {
    LatticeVector v;
    for (const auto& c : row) {
      if (!c.is_number_integer())
        throw ValidationError("polytope: vertex coordinates must be integers");
      v.push_back(c.get<long long>());
    }
    verts.push_back(std::move(v));
  }
  auto p = LatticePolytope::from_vertices(std::move(verts));
  if (j.contains("dilate")) {
    if (!j["dilate"].is_number_integer() || j["dilate"].get<long long>() < 1)
      throw ValidationError("polytope: dilate must be a positive integer");
    p = p.dilate(j["dilate"].get<long long>());
  }
  return p;
}

ToricTestConfiguration test_configuration_from(const json& j) {
  auto p = polytope_from(j.at("polytope"));
  if (!j.contains("weight") || !j["weight"].contains("affine_pieces"))
    throw ValidationError("test configuration: missing weight.affine_pieces");
  std::vector<AffinePiece> pieces;
  for (const auto& pj : j["weight"]["affine_pieces"]) {
    AffinePiece piece;
    for (const auto& g : pj.at("gradient"))
      piece.gradient.push_back(rational_from(g, "weight gradient"));
    piece.offset = pj.contains("offset") ? rational_from(pj["offset"], "weight offset")
                                         : Rational(0);
    pieces.push_back(std::move(piece));
  }
  return ToricTestConfiguration::make(std::move(p), std::move(pieces));
}

PshWeight weight_from(const json& j) {
  PshWeight w;
  w.dim = j.value("dim", 1);
  w.domain_radius = j.value("domain_radius", 2.0);
  if (j.contains("poles"))
    for (const auto& pj : j["poles"]) {
      LogPole pole;
      for (const auto& c : pj.at("center")) pole.center.push_back(c.get<double>());
      pole.lambda = pj.at("lambda").get<double>();
      w.poles.push_back(std::move(pole));
    }
  if (j.contains("algebraic") && !j["algebraic"].is_null()) {
    AlgebraicPart a;
    a.m = j["algebraic"].value("m", 1);
    for (const auto& o : j["algebraic"].at("monomial_orders"))
      a.monomial_orders.push_back(o.get<int>());
    w.algebraic = a;
  }
  w.smooth = smooth_preset_from_name(j.value("smooth", "zero"));
  w.smooth_scale = j.value("smooth_scale", 1.0);
  return PshWeight::validated(w);
}

RadialGrid grid_from(const json& j, RadialGrid def) {
  RadialGrid g = def;
  if (j.contains("grid")) {
    g.S = j["grid"].value("S", def.S);
    g.nodes = j["grid"].value("nodes", def.nodes);
  }
  if (!(g.S > 0) || g.nodes < 16)
    throw ValidationError("grid: S must be positive and nodes >= 16");
  return g;
}

ConeData cone_from(const json& j) {
  ConeData c;
  c.beta0 = j.value("beta0", 1.0);
  c.beta_inf = j.value("beta_inf", 1.0);
  return c;
}

FamilyDescriptor family_from(const json& j) {
  if (!j.contains("kind"))
    throw ValidationError("family: missing \"kind\"");
  FamilyDescriptor f;
  f.kind = family_kind_from_name(j["kind"].get<std::string>());
  if (j.contains("tau")) {
    const auto& t = j["tau"];
    auto cplx = [](const json& v) {
      return Complex(v.at(0).get<double>(), v.at(1).get<double>());
    };
    if (t.contains("tau0")) f.tau.tau0 = cplx(t["tau0"]);
    if (t.contains("slope")) f.tau.slope = cplx(t["slope"]);
    f.tau.mixed = t.value("mixed", false);
  }
  if (j.contains("base_grid")) {
    const auto& b = j["base_grid"];
    if (b.contains("center"))
      f.base.center = Complex(b["center"].at(0).get<double>(),
                              b["center"].at(1).get<double>());
    f.base.half_width = b.value("half_width", 0.25);
    f.base.samples = b.value("samples", 9);
  }
  f.fiber_resolution = j.value("fiber_resolution", 24);
  return FamilyDescriptor::validated(f);
}

// ---- CSV / artifact helpers ------------------------------------------------

struct ArtifactWriter {
  fs::path dir;
  std::vector<std::string>* artifacts;

  void write(const std::string& name, const std::string& content) const {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
    artifacts->push_back(name);
  }
};

std::string profile_csv(const RadialProfile& p) {
  auto curv = ricci_and_scal(p);
  std::string s = "s,f,ricci,scal\n";
  for (int j = 0; j < p.grid.nodes; ++j) {
    s += fmt17(p.grid.s(j)) + "," + fmt17(p.density[j]) + "," +
         fmt17(curv.ricci[j]) + "," + fmt17(curv.scal[j]) + "\n";
  }
  return s;
}

json profile_summary(const RadialProfile& p) {
  return json{{"total_area", p.total_area},
              {"gauss_bonnet", gauss_bonnet(p)},
              {"cone", {{"beta0", p.cone.beta0}, {"beta_inf", p.cone.beta_inf}}},
              {"grid", {{"S", p.grid.S}, {"nodes", p.grid.nodes}}}};
}

// ---- command handlers -------------------------------------------------------

json run_futaki(const json& in, const ArtifactWriter& aw) {
  auto tc = test_configuration_from(in);
  auto r = donaldson_futaki(tc);
  json out{{"futaki", r.futaki.to_string()},
           {"verdict", to_string(r.verdict)},
           {"a0", r.hilbert.a0.to_string()},
           {"a1", r.hilbert.a1.to_string()},
           {"b0", r.weight.b0.to_string()},
           {"b1", r.weight.b1.to_string()}};
  (void)aw;
  return out;
}

json run_ehrhart(const json& in, const ArtifactWriter& aw) {
  auto p = polytope_from(in.at("polytope"));
  std::vector<long long> ks;
  if (in.contains("k_range"))
    for (const auto& k : in["k_range"]) ks.push_back(k.get<long long>());
  else
    for (long long k = 1; k <= p.dim + 3; ++k) ks.push_back(k);
  auto poly = ehrhart_fit(p, ks);
  json coeffs = json::array();
  for (const auto& c : poly.coeffs) coeffs.push_back(c.to_string());
  std::string csv = "k,count\n";
  for (long long k = 1; k <= 8; ++k)
    csv += std::to_string(k) + "," + std::to_string(lattice_point_count(p, k)) + "\n";
  aw.write("counts.csv", csv);
  auto deg = toric_degrees(p);
  auto bc = barycenter(p);
  json bary = json::array();
  for (const auto& c : bc) bary.push_back(c.to_string());
  return json{{"coefficients", coeffs},
              {"volume", polytope_volume(p).to_string()},
              {"barycenter", bary},
              {"L_degree", deg.L_degree.to_string()},
              {"anticanonical_degree", deg.anticanonical_degree.to_string()}};
}

json run_cm(const json& in, const ArtifactWriter&) {
  CMPushforwardData data;
  data.relcanonical_term = rational_from(in.at("relcanonical_term"), "cm");
  data.polarization_term = rational_from(in.at("polarization_term"), "cm");
  data.n = in.value("n", 1);
  Rational eta = in.contains("eta")
                     ? rational_from(in["eta"], "cm eta")
                     : eta_constant(polytope_from(in.at("polytope")));
  return json{{"cm_degree", cm_degree(data, eta).to_string()},
              {"eta", eta.to_string()}};
}

json run_lelong(const json& in, const ArtifactWriter& aw) {
  auto w = weight_from(in.at("weight"));
  CPoint p(2 * w.dim, 0.0);
  if (in.contains("point")) {
    int i = 0;
    for (const auto& c : in["point"]) p[i++] = c.get<double>();
  }
  auto est = lelong_number(w, p);
  std::string csv = "r,mass_ratio\n";
  for (double r : est.r_schedule)
    csv += fmt17(r) + "," + fmt17(mass_ratio(w, p, r)) + "\n";
  aw.write("lelong.csv", csv);
  return json{{"value", est.value},
              {"slope_value", est.slope_value},
              {"estimator_gap", std::abs(est.value - est.slope_value)},
              {"tolerance", 1e-2}};
}

ThresholdOptions threshold_options_from(const json& tolerances) {
  ThresholdOptions opts;
  if (tolerances.contains("alpha_max"))
    opts.alpha_max = tolerances["alpha_max"].get<double>();
  if (tolerances.contains("bracket_rel_width"))
    opts.bracket_rel_width = tolerances["bracket_rel_width"].get<double>();
  if (!(opts.alpha_max > 0) || !(opts.bracket_rel_width > 0))
    throw ValidationError("tolerances: overrides must be positive");
  return opts;
}

json run_threshold(const json& in, const ArtifactWriter&, const json& tol) {
  auto w = weight_from(in.at("weight"));
  auto opts = threshold_options_from(tol);
  auto est = integrability_threshold(w, {}, opts);
  return json{{"threshold", est.threshold},
              {"bracket", {est.lower, est.upper}},
              {"open_bracket", est.open_bracket},
              {"tolerance", opts.bracket_rel_width}};
}

json run_alpha(const json& in, const ArtifactWriter&, const json& tol) {
  std::vector<PshWeight> family;
  for (const auto& wj : in.at("weights")) family.push_back(weight_from(wj));
  AlphaMode mode = in.value("mode", std::string("absolute")) == "relative"
                       ? AlphaMode::kRelative
                       : AlphaMode::kAbsolute;
  int fiber_dim = in.value("fiber_dim", 1);
  VolumeDensity ref;
  if (mode == AlphaMode::kRelative && in.contains("family"))
    ref = berndtsson_fiber_density(family_from(in["family"]));
  auto opts = threshold_options_from(tol);
  auto rep = alpha_over_family(family, ref, mode, fiber_dim, opts);
  json out{{"threshold", rep.estimate.threshold},
           {"bracket", {rep.estimate.lower, rep.estimate.upper}},
           {"open_bracket", rep.estimate.open_bracket},
           {"mode", mode == AlphaMode::kRelative ? "relative" : "absolute"},
           {"tolerance", opts.bracket_rel_width}};
  if (mode == AlphaMode::kRelative) {
    out["criterion_bound"] = static_cast<double>(fiber_dim) / (fiber_dim + 1);
    out["criterion_holds"] = rep.criterion_holds;
    out["reference_measure"] =
        in.contains("family") ? "fiberwise flat measure (kappa = fiber dim, unit section)"
                              : "lebesgue";
  }
  return out;
}

json run_model(const json& in, const ArtifactWriter& aw) {
  const auto& mj = in.at("model");
  std::string kind = mj.at("kind").get<std::string>();
  std::vector<std::vector<Complex>> points;
  if (in.contains("points"))
    for (const auto& pj : in["points"]) {
      std::vector<Complex> z;
      for (size_t i = 0; i + 1 < pj.size(); i += 2)
        z.push_back(Complex(pj[i].get<double>(), pj[i + 1].get<double>()));
      points.push_back(std::move(z));
    }

  json out;
  std::string csv = "point_re_im...,matrix_row_major_re_im...\n";
  auto sample_to_csv = [&](const MetricSample& s) {
    std::string row;
    for (const auto& z : s.point)
      row += fmt17(z.real()) + "," + fmt17(z.imag()) + ",";
    for (int i = 0; i < s.matrix.n; ++i)
      for (int j = 0; j < s.matrix.n; ++j)
        row += fmt17(s.matrix.at(i, j).real()) + "," +
               fmt17(s.matrix.at(i, j).imag()) + ",";
    row.pop_back();
    csv += row + "\n";
  };

  if (kind == "conical") {
    ConicalModelMetric m{mj.value("beta", 0.5), mj.value("n", 1)};
    json minors = json::array();
    for (const auto& z : points) {
      auto s = eval_conical_model(m, z);
      sample_to_csv(s);
      minors.push_back(s.matrix.leading_principal_minors());
    }
    out["kind"] = "conical";
    out["beta"] = m.beta;
    out["leading_principal_minors"] = minors;
  } else if (kind == "poincare" || kind == "fibrewise_conical") {
    FibrewiseModelMetric m;
    m.kind = kind == "poincare" ? FibrewiseKind::kPoincare : FibrewiseKind::kConical;
    m.n = mj.value("n", 1);
    if (mj.contains("t"))
      m.t = Complex(mj["t"].at(0).get<double>(), mj["t"].at(1).get<double>());
    json minors = json::array();
    for (const auto& z : points) {
      auto s = eval_fibrewise_model(m, z);
      sample_to_csv(s);
      minors.push_back(s.matrix.leading_principal_minors());
    }
    out["kind"] = kind;
    out["leading_principal_minors"] = minors;
  } else {
    throw ValidationError("model: unknown kind '" + kind + "'");
  }
  if (!points.empty()) aw.write("samples.csv", csv);

  if (in.contains("quasi_isometry")) {
    const auto& qj = in["quasi_isometry"];
    double scale = qj.value("candidate_scale", 1.0);
    SampleRegion region;
    region.n = mj.value("n", 1);
    region.abs_min = qj.value("abs_min", 0.05);
    region.abs_max = qj.value("abs_max", 0.8);
    region.samples_per_axis = qj.value("samples", 8);
    MetricSampler model;
    if (kind == "conical") {
      ConicalModelMetric m{mj.value("beta", 0.5), mj.value("n", 1)};
      model = [m](const std::vector<Complex>& z) {
        return eval_conical_model(m, z).matrix;
      };
    } else {
      FibrewiseModelMetric m;
      m.kind = kind == "poincare" ? FibrewiseKind::kPoincare : FibrewiseKind::kConical;
      m.n = mj.value("n", 1);
      if (mj.contains("t"))
        m.t = Complex(mj["t"].at(0).get<double>(), mj["t"].at(1).get<double>());
      model = [m](const std::vector<Complex>& z) {
        return eval_fibrewise_model(m, z).matrix;
      };
    }
    MetricSampler candidate = [model, scale](const std::vector<Complex>& z) {
      return model(z).scaled(scale);
    };
    auto qi = quasi_isometry_constants(model, candidate, region);
    out["quasi_isometry"] = {{"c_low", qi.c_low},
                             {"c_high", qi.c_high},
                             {"refinements", qi.refinements}};
  }
  return out;
}

json run_ke(const json& in, const ArtifactWriter& aw, const json& tol) {
  SolveOptions opts;
  opts.grid = grid_from(in, {26.0, 2048});
  opts.total_area = in.value("total_area", 0.0);
  if (tol.contains("newton_tol")) opts.tol = tol["newton_tol"].get<double>();
  auto res = ke_solve_radial(cone_from(in), opts);
  aw.write("profile.csv", profile_csv(res.profile));
  json out = profile_summary(res.profile);
  out["lambda"] = res.lambda;
  out["residual"] = res.residual;
  out["iterations"] = res.iterations;
  out["end_slope_error"] = res.end_slope_error;
  out["residual_tolerance"] = 1e-8;
  return out;
}

json run_soliton(const json& in, const ArtifactWriter& aw, const json& tol) {
  SolveOptions opts;
  opts.grid = grid_from(in, {26.0, 2048});
  if (tol.contains("newton_tol")) opts.tol = tol["newton_tol"].get<double>();
  bool search = in.value("search", true);
  double fixed = in.value("coefficient", 0.0);
  auto res = soliton_solve_radial(cone_from(in), search, fixed, opts);
  std::string csv = "s,f,theta\n";
  for (int j = 0; j < res.profile.grid.nodes; ++j)
    csv += fmt17(res.profile.grid.s(j)) + "," + fmt17(res.profile.density[j]) +
           "," + fmt17(res.soliton.theta[j]) + "\n";
  aw.write("soliton.csv", csv);
  json out = profile_summary(res.profile);
  out["vector_field_coefficient"] = res.soliton.vector_field_coefficient;
  out["residual"] = res.residual;
  out["iterations"] = res.iterations;
  return out;
}

json run_continuity(const json& in, const ArtifactWriter& aw) {
  RadialGrid grid = grid_from(in, {14.0, 2048});
  RadialProfile base;
  if (in.value("base", std::string("round")) == "round") {
    base = round_profile(grid);
  } else {
    SolveOptions opts;
    opts.grid = grid;
    base = ke_solve_radial(cone_from(in), opts).profile;
  }
  ContinuityPath path;
  if (in.contains("epsilons"))
    for (const auto& e : in["epsilons"]) path.epsilon_schedule.push_back(e.get<double>());
  else
    path.epsilon_schedule = ContinuityPath::default_schedule();
  if (in.contains("psi_plus"))
    for (const auto& a : in["psi_plus"]) path.psi_plus_poles.push_back(a.get<double>());
  if (in.contains("psi_minus"))
    for (const auto& b : in["psi_minus"]) path.psi_minus_poles.push_back(b.get<double>());
  auto out = continuity_path_run(path, base);
  if (!out.converged_all)
    throw SolverError("continuity: path failed at schedule index " +
                      std::to_string(out.failure_index));
  std::string csv = "epsilon,residual,c0_bound,sup_distance\n";
  for (const auto& st : out.steps)
    csv += fmt17(st.epsilon) + "," + fmt17(st.residual) + "," +
           fmt17(st.c0_bound) + "," + fmt17(st.sup_distance) + "\n";
  aw.write("continuity.csv", csv);
  aw.write("profile.csv", profile_csv(out.final_profile));
  json rep = profile_summary(out.final_profile);
  rep["effective_angle_at_origin"] = out.effective_angle_at_origin;
  json steps = json::array();
  for (const auto& st : out.steps)
    steps.push_back({{"epsilon", st.epsilon},
                     {"residual", st.residual},
                     {"c0_bound", st.c0_bound},
                     {"sup_distance", st.sup_distance}});
  rep["steps"] = steps;
  return rep;
}

json run_flow(const json& in, const ArtifactWriter& aw) {
  SolveOptions opts;
  opts.grid = grid_from(in, {6.0, 256});
  ConeData cone = cone_from(in);
  auto ke = ke_solve_radial(cone, opts);

  double amp = in.value("perturb_amplitude", 0.1);
  std::vector<double> f0 = ke.profile.density;
  for (int j = 0; j < opts.grid.nodes; ++j) {
    double s = opts.grid.s(j);
    f0[j] *= 1.0 + amp * std::exp(-s * s / 4.0);
  }
  double a = radial_area(opts.grid, f0);
  for (double& v : f0) v *= ke.profile.total_area / a;
  auto initial = RadialProfile::from_density(opts.grid, f0, cone);

  double phi = in.value("phi", 1.0);
  double dt = in.value("dt", 0.0);
  if (dt <= 0) dt = flow_stable_dt(initial, phi);
  double t_end = in.value("t_end", 8.0);
  auto run = kr_flow_run(initial, phi, t_end, dt, in.value("snapshots", 40));

  std::string csv = "time,residual,area\n";
  for (const auto& st : run.states) {
    double area = radial_area(opts.grid, st.density);
    csv += fmt17(st.time) + "," + fmt17(st.residual_norm) + "," + fmt17(area) + "\n";
  }
  aw.write("flow_trajectory.csv", csv);
  std::string long_csv = "time,s,f\n";
  for (const auto& st : run.states)
    for (int j = 0; j < opts.grid.nodes; ++j)
      long_csv += fmt17(st.time) + "," + fmt17(opts.grid.s(j)) + "," +
                  fmt17(st.density[j]) + "\n";
  aw.write("flow_states.csv", long_csv);
  aw.write("final_profile.csv", profile_csv(run.final_profile));

  double dist = 0;
  for (int j = 0; j < opts.grid.nodes; ++j)
    dist = std::max(dist,
                    std::abs(run.final_profile.density[j] - ke.profile.density[j]));
  bool monotone = true;
  for (size_t i = 2; i + 1 < run.states.size(); ++i)
    if (run.states[i + 1].residual_norm >
        run.states[i].residual_norm * (1 + 1e-9) + 1e-13)
      monotone = false;
  json rep = profile_summary(run.final_profile);
  rep["declared_stable_dt"] = flow_stable_dt(initial, phi);
  rep["dt"] = dt;
  rep["t_end"] = run.final_time;
  rep["final_residual"] = run.states.back().residual_norm;
  rep["sup_distance_to_newton"] = dist;
  rep["area_drift_per_unit_time"] = run.area_drift_per_unit_time;
  rep["residual_monotone_after_transient"] = monotone;
  return rep;
}

json run_wp(const json& in, const ArtifactWriter& aw) {
  auto fam = family_from(in.at("family"));
  std::string estimator = in.value("estimator", std::string("both"));
  std::vector<Complex> pts;
  if (in.contains("points"))
    for (const auto& pj : in["points"])
      pts.push_back(Complex(pj.at(0).get<double>(), pj.at(1).get<double>()));
  else
    pts.push_back(fam.base.center);

  std::string csv = "s_re,s_im,wp_density,ks_norm\n";
  json samples = json::array();
  for (const auto& s : pts) {
    WPSample w = estimator == "ks" ? wp_via_ks_norm(fam, s)
                                   : wp_fiber_integral(fam, s);
    csv += fmt17(s.real()) + "," + fmt17(s.imag()) + "," +
           fmt17(w.wp_density) + "," + fmt17(w.ks_norm) + "\n";
    samples.push_back({{"s", {s.real(), s.imag()}},
                       {"wp_density", w.wp_density},
                       {"ks_norm", w.ks_norm}});
  }
  aw.write("wp.csv", csv);
  return json{{"estimator", estimator},
              {"samples", samples},
              {"cross_check_tolerance", 0.05}};
}

json run_foliation(const json& in, const ArtifactWriter& aw) {
  auto fam = family_from(in.at("family"));
  std::vector<Complex> pts;
  if (in.contains("points"))
    for (const auto& pj : in["points"])
      pts.push_back(Complex(pj.at(0).get<double>(), pj.at(1).get<double>()));
  else
    pts.push_back(fam.base.center);
  std::string csv = "s_re,s_im,null_rank,fiber_dim,full_rank_null\n";
  json entries = json::array();
  bool leaf = true;
  for (const auto& s : pts) {
    auto e = foliation_rank(fam, s);
    csv += fmt17(s.real()) + "," + fmt17(s.imag()) + "," +
           std::to_string(e.null_rank) + "," + std::to_string(e.fiber_dim) +
           "," + (e.full_rank_null ? "1" : "0") + "\n";
    entries.push_back({{"s", {s.real(), s.imag()}},
                       {"null_rank", e.null_rank},
                       {"fiber_dim", e.fiber_dim},
                       {"full_rank_null", e.full_rank_null}});
    leaf = leaf && e.full_rank_null;
  }
  aw.write("foliation.csv", csv);
  return json{{"entries", entries}, {"leaf_indicator", leaf}};
}

json run_residual(const json& in, const ArtifactWriter&) {
  std::string kase = in.value("case", std::string("torus_family"));
  ProductPatch patch;
  if (in.contains("patch")) {
    const auto& pj = in["patch"];
    patch.s_half_width = pj.value("s_half_width", patch.s_half_width);
    patch.s_samples = pj.value("s_samples", patch.s_samples);
    patch.w_samples = pj.value("w_samples", patch.w_samples);
    patch.w_half_width = pj.value("w_half_width", patch.w_half_width);
  }
  if (kase == "product")
    return json{{"case", kase}, {"residual", product_relative_residual(patch)}};
  if (kase == "torus_family") {
    auto fam = in.contains("family")
                   ? family_from(in["family"])
                   : FamilyDescriptor::validated([] {
                       FamilyDescriptor f;
                       f.kind = FamilyKind::kTorus;
                       f.tau.slope = Complex(0.4, 0);
                       f.base.half_width = 0.45;
                       return f;
                     }());
    return json{{"case", kase},
                {"residual", torus_family_relative_residual(fam, patch)}};
  }
  if (kase == "horizontal") {
    auto fam = family_from(in.at("family"));
    Complex s = fam.base.center;
    if (in.contains("point"))
      s = Complex(in["point"].at(0).get<double>(), in["point"].at(1).get<double>());
    return json{{"case", kase},
                {"relative_residual", horizontal_c_residual(fam, s)}};
  }
  throw ValidationError("residual: unknown case '" + kase + "'");
}

}  // namespace

JobConfig JobConfig::from_json(const json& j) {
  JobConfig cfg;
  if (!j.contains("command") || !j["command"].is_string())
    throw ValidationError("job config: missing \"command\"");
  cfg.command = j["command"].get<std::string>();
  cfg.inputs = j.value("inputs", json::object());
  cfg.output_dir = j.value("output_dir", std::string());
  cfg.seed = j.value("seed", 0LL);
  cfg.tolerances = j.value("tolerances", json::object());
  return cfg;
}

json JobConfig::to_json() const {
  return json{{"command", command},
              {"inputs", inputs},
              {"output_dir", output_dir},
              {"seed", seed},
              {"tolerances", tolerances}};
}

std::string config_hash(const JobConfig& cfg) {
  // nlohmann::json keeps object keys sorted, so dump() is canonical
  json j{{"command", cfg.command},
         {"inputs", cfg.inputs},
         {"seed", cfg.seed},
         {"tolerances", cfg.tolerances}};
  std::string s = j.dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json convention_stamp() {
  return json{
      {"two_pi", "c1 integrals carry 1/(2 pi); areas are 2 pi * int f ds"},
      {"reduction", "omega = sqrt(-1) f(s) dz dzbar/|z|^2, s = log|z|^2, f = phi''"},
      {"L_degree", "n! * euclidean volume of the moment polytope"},
      {"anticanonical_degree", "(n-1)! * lattice surface measure of the boundary"},
      {"dd_c", "dd^c log|z - p|^2 has unit mass"},
      {"wp", "unit-area fibers; torus WP density = |tau'|^2 / (4 Im^2 tau)"},
      {"horizontal_c", "c read against ds ^ dsbar, the opposite orientation to sqrt(-1) ds ^ dsbar"}};
}

RunReport run_job(const JobConfig& cfg) {
  RunReport rep;
  rep.command = cfg.command;
  rep.config_hash = config_hash(cfg);
  rep.conventions = convention_stamp();
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (cfg.output_dir.empty())
      throw ValidationError("job config: missing output_dir");
    ArtifactWriter aw{fs::path(cfg.output_dir), &rep.artifacts};
    if (cfg.command == "futaki")
      rep.results = run_futaki(cfg.inputs, aw);
    else if (cfg.command == "ehrhart")
      rep.results = run_ehrhart(cfg.inputs, aw);
    else if (cfg.command == "cm")
      rep.results = run_cm(cfg.inputs, aw);
    else if (cfg.command == "lelong")
      rep.results = run_lelong(cfg.inputs, aw);
    else if (cfg.command == "threshold")
      rep.results = run_threshold(cfg.inputs, aw, cfg.tolerances);
    else if (cfg.command == "alpha")
      rep.results = run_alpha(cfg.inputs, aw, cfg.tolerances);
    else if (cfg.command == "model")
      rep.results = run_model(cfg.inputs, aw);
    else if (cfg.command == "ke")
      rep.results = run_ke(cfg.inputs, aw, cfg.tolerances);
    else if (cfg.command == "soliton")
      rep.results = run_soliton(cfg.inputs, aw, cfg.tolerances);
    else if (cfg.command == "continuity")
      rep.results = run_continuity(cfg.inputs, aw);
    else if (cfg.command == "flow")
      rep.results = run_flow(cfg.inputs, aw);
    else if (cfg.command == "wp")
      rep.results = run_wp(cfg.inputs, aw);
    else if (cfg.command == "foliation")
      rep.results = run_foliation(cfg.inputs, aw);
    else if (cfg.command == "residual")
      rep.results = run_residual(cfg.inputs, aw);
    else
      throw ValidationError("unknown command '" + cfg.command + "'");
    rep.exit_code = 0;
  } catch (const ValidationError& e) {
    rep.exit_code = 2;
    rep.error = std::string("validation: ") + e.what();
  } catch (const ObstructionSuspectedError& e) {
    rep.exit_code = 3;
    rep.error = std::string("obstruction-suspected: ") + e.what();
  } catch (const SolverError& e) {
    rep.exit_code = 3;
    rep.error = std::string("solver: ") + e.what();
  } catch (const json::exception& e) {
    rep.exit_code = 2;
    rep.error = std::string("validation: bad inputs: ") + e.what();
  } catch (const std::exception& e) {
    rep.exit_code = 4;
    rep.error = std::string("internal: ") + e.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  rep.wall_time_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();

  // persist: report.json (deterministic) + meta.json (wall time)
  if (!cfg.output_dir.empty()) {
    try {
      fs::create_directories(cfg.output_dir);
      json rj{{"command", rep.command},
              {"config_hash", rep.config_hash},
              {"conventions", rep.conventions},
              {"exit_code", rep.exit_code},
              {"results", rep.results}};
      if (!rep.error.empty()) rj["error"] = rep.error;
      std::ofstream(fs::path(cfg.output_dir) / "report.json", std::ios::binary)
          << rj.dump(2) << "\n";
      std::ofstream(fs::path(cfg.output_dir) / "meta.json", std::ios::binary)
          << json{{"wall_time_ms", rep.wall_time_ms}}.dump(2) << "\n";
    } catch (const std::exception& e) {
      if (rep.exit_code == 0) {
        rep.exit_code = 4;
        rep.error = std::string("internal: cannot write outputs: ") + e.what();
      }
    }
  }
  return rep;
}

std::vector<RunReport> sweep(const std::vector<JobConfig>& cfgs, int parallelism) {
  if (parallelism < 1)
    throw ValidationError("sweep: parallelism must be >= 1");
  std::vector<RunReport> reports(cfgs.size());
  std::counting_semaphore<256> slots(std::min(parallelism, 256));
  std::vector<std::future<void>> futures;
  futures.reserve(cfgs.size());
  for (size_t i = 0; i < cfgs.size(); ++i) {
    slots.acquire();
    futures.push_back(std::async(std::launch::async, [&, i] {
      reports[i] = run_job(cfgs[i]);
      slots.release();
    }));
  }
  for (auto& f : futures) f.get();
  return reports;
}

int aggregate_exit_code(const std::vector<RunReport>& reports) {
  int code = 0;
  for (const auto& r : reports) code = std::max(code, r.exit_code);
  return code;
}

}  // namespace klab
