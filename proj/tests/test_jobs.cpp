#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kahlerlab/jobs.hpp"

using namespace klab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "klab_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json p2_simplex_inputs() {
  return json{{"polytope", {{"vertices", {{-1, -1}, {2, -1}, {-1, 2}}}}},
              {"weight",
               {{"affine_pieces",
                 {{{"gradient", {"1", "0"}}, {"offset", "0"}}}}}}};
}

}  // namespace

TEST_CASE("futaki job on the P^2 simplex reports exact zero") {
  JobConfig cfg;
  cfg.command = "futaki";
  cfg.inputs = p2_simplex_inputs();
  cfg.output_dir = fresh_dir("futaki").string();
  auto rep = run_job(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.results["futaki"] == "0");
  CHECK(rep.results["verdict"] == "zero");
  CHECK(fs::exists(fs::path(cfg.output_dir) / "report.json"));
  CHECK(fs::exists(fs::path(cfg.output_dir) / "meta.json"));
}

TEST_CASE("malformed polytope exits with validation code 2") {
  JobConfig cfg;
  cfg.command = "futaki";
  cfg.inputs = json{{"polytope", {{"vertices", {{0, 0}, {1, 0}, {2, 0}}}}},
                    {"weight",
                     {{"affine_pieces",
                       {{{"gradient", {"1", "0"}}, {"offset", "0"}}}}}}};
  cfg.output_dir = fresh_dir("futaki_bad").string();
  auto rep = run_job(cfg);
  CHECK(rep.exit_code == 2);
  CHECK(rep.error.find("validation") == 0);
}

TEST_CASE("teardrop ke job exits with solver code 3") {
  JobConfig cfg;
  cfg.command = "ke";
  cfg.inputs = json{{"beta0", 1.0}, {"beta_inf", 0.5},
                    {"grid", {{"S", 10.0}, {"nodes", 512}}}};
  cfg.output_dir = fresh_dir("ke_teardrop").string();
  auto rep = run_job(cfg);
  CHECK(rep.exit_code == 3);
  CHECK(rep.error.find("obstruction-suspected") == 0);
}

TEST_CASE("ehrhart job writes counts and coefficients") {
  JobConfig cfg;
  cfg.command = "ehrhart";
  cfg.inputs = json{{"polytope", {{"vertices", {{0, 0}, {1, 0}, {0, 1}}}}}};
  cfg.output_dir = fresh_dir("ehrhart").string();
  auto rep = run_job(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.results["coefficients"][2] == "1/2");
  CHECK(rep.results["coefficients"][1] == "3/2");
  CHECK(rep.results["coefficients"][0] == "1");
  CHECK(fs::exists(fs::path(cfg.output_dir) / "counts.csv"));
}

TEST_CASE("unknown command is a validation failure") {
  JobConfig cfg;
  cfg.command = "nonsense";
  cfg.output_dir = fresh_dir("nonsense").string();
  auto rep = run_job(cfg);
  CHECK(rep.exit_code == 2);
}

TEST_CASE("identical configs produce bitwise-identical payloads") {
  JobConfig a;
  a.command = "lelong";
  a.inputs = json{{"weight", {{"poles", {{{"center", {0.0, 0.0}}, {"lambda", 1.0}}}}}}};
  a.output_dir = fresh_dir("det_a").string();
  JobConfig b = a;
  b.output_dir = fresh_dir("det_b").string();
  auto ra = run_job(a);
  auto rb = run_job(b);
  REQUIRE(ra.exit_code == 0);
  REQUIRE(rb.exit_code == 0);
  CHECK(ra.config_hash == rb.config_hash);
  CHECK(slurp(fs::path(a.output_dir) / "report.json") ==
        slurp(fs::path(b.output_dir) / "report.json"));
  CHECK(slurp(fs::path(a.output_dir) / "lelong.csv") ==
        slurp(fs::path(b.output_dir) / "lelong.csv"));
}

TEST_CASE("config hash is sensitive to inputs and seed") {
  JobConfig a;
  a.command = "threshold";
  a.inputs = json{{"weight", {{"poles", {{{"center", {0.0, 0.0}}, {"lambda", 1.0}}}}}}};
  JobConfig b = a;
  b.seed = 7;
  CHECK(config_hash(a) != config_hash(b));
  JobConfig c = a;
  c.inputs["weight"]["poles"][0]["lambda"] = 2.0;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("sweep of futaki over five weights preserves order") {
  std::vector<JobConfig> cfgs;
  for (int i = 0; i < 5; ++i) {
    JobConfig cfg;
    cfg.command = "futaki";
    cfg.inputs = p2_simplex_inputs();
    cfg.inputs["weight"]["affine_pieces"][0]["gradient"] = {std::to_string(i), "1"};
    if (i == 2)  // malformed: degenerate polytope
      cfg.inputs["polytope"]["vertices"] = {{0, 0}, {1, 0}, {2, 0}};
    cfg.output_dir = fresh_dir("sweep_" + std::to_string(i)).string();
    cfgs.push_back(cfg);
  }
  auto reports = sweep(cfgs, 4);
  REQUIRE(reports.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(reports[i].exit_code == (i == 2 ? 2 : 0));
    CHECK(reports[i].command == "futaki");
    if (i != 2) CHECK(reports[i].results["futaki"] == "0");
  }
  CHECK(aggregate_exit_code(reports) == 2);
}

TEST_CASE("sweep at parallelism 1 and 4 is bitwise identical") {
  auto build = [](const std::string& tag) {
    std::vector<JobConfig> cfgs;
    for (int i = 0; i < 3; ++i) {
      JobConfig cfg;
      cfg.command = "threshold";
      cfg.inputs = json{
          {"weight",
           {{"poles", {{{"center", {0.0, 0.0}}, {"lambda", 1.0 + i}}}}}}};
      cfg.output_dir =
          fresh_dir("sweep_par_" + tag + "_" + std::to_string(i)).string();
      cfgs.push_back(cfg);
    }
    return cfgs;
  };
  auto c1 = build("p1");
  auto c4 = build("p4");
  auto r1 = sweep(c1, 1);
  auto r4 = sweep(c4, 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(slurp(fs::path(c1[i].output_dir) / "report.json") ==
          slurp(fs::path(c4[i].output_dir) / "report.json"));
  }
}

TEST_CASE("cm job computes the pushforward degree") {
  JobConfig cfg;
  cfg.command = "cm";
  cfg.inputs = json{{"relcanonical_term", "1"},
                    {"polarization_term", "0"},
                    {"n", 1},
                    {"eta", "2"}};
  cfg.output_dir = fresh_dir("cm").string();
  auto rep = run_job(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.results["cm_degree"] == "8");
}

TEST_CASE("model job evaluates samples and quasi-isometry constants") {
  JobConfig cfg;
  cfg.command = "model";
  cfg.inputs = json{{"model", {{"kind", "conical"}, {"beta", 0.5}, {"n", 1}}},
                    {"points", {{0.25, 0.0}}},
                    {"quasi_isometry",
                     {{"candidate_scale", 2.0}, {"samples", 6}}}};
  cfg.output_dir = fresh_dir("model").string();
  auto rep = run_job(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.results["quasi_isometry"]["c_low"].get<double>() ==
        doctest::Approx(2.0));
  CHECK(fs::exists(fs::path(cfg.output_dir) / "samples.csv"));
}

TEST_CASE("wp job emits per-base-point csv") {
  JobConfig cfg;
  cfg.command = "wp";
  cfg.inputs = json{
      {"family",
       {{"kind", "torus_family"}, {"tau", {{"tau0", {0.0, 1.0}}, {"slope", {1.0, 0.0}}}}}},
      {"points", {{0.0, 0.0}}}};
  cfg.output_dir = fresh_dir("wp").string();
  auto rep = run_job(cfg);
  REQUIRE(rep.exit_code == 0);
  double wp = rep.results["samples"][0]["wp_density"].get<double>();
  CHECK(wp == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(fs::exists(fs::path(cfg.output_dir) / "wp.csv"));
}

TEST_CASE("cli binary round trip") {
  fs::path dir = fresh_dir("cli");
  fs::path cfg = dir / "futaki.json";
  std::ofstream(cfg) << p2_simplex_inputs().dump();
  std::string cmd = std::string(KLAB_CLI_PATH) + " futaki --config " +
                    cfg.string() + " --out " + (dir / "out").string() +
                    " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(rc) == 0);
  json rep = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(rep["results"]["futaki"] == "0");

  // validation failure propagates exit code 2
  fs::path bad = dir / "bad.json";
  auto bad_inputs = p2_simplex_inputs();
  bad_inputs["polytope"]["vertices"] = {{0, 0}, {1, 0}, {2, 0}};
  std::ofstream(bad) << bad_inputs.dump();
  std::string cmd2 = std::string(KLAB_CLI_PATH) + " futaki --config " +
                     bad.string() + " --out " + (dir / "out2").string() +
                     " > /dev/null 2>&1";
  int rc2 = std::system(cmd2.c_str());
  CHECK(WEXITSTATUS(rc2) == 2);
}

TEST_CASE("relative alpha with the fibration-supplied fiber measure") {
  JobConfig cfg;
  cfg.command = "alpha";
  cfg.inputs = json{
      {"weights",
       {{{"poles", {{{"center", {0.0, 0.0}}, {"lambda", 4.0 / 3.0}}}}}}},
      {"mode", "relative"},
      {"fiber_dim", 1},
      {"family",
       {{"kind", "torus_family"},
        {"tau", {{"tau0", {0.0, 1.0}}, {"slope", {1.0, 0.0}}}}}}};
  cfg.output_dir = (fs::temp_directory_path() / "klab_test" / "alpha_rel").string();
  auto rep = run_job(cfg);
  REQUIRE(rep.exit_code == 0);
  // a bounded positive reference density does not move the threshold
  CHECK(rep.results["threshold"].get<double>() == doctest::Approx(0.75).epsilon(0.03));
  CHECK(rep.results["criterion_holds"] == true);
  CHECK(rep.results["criterion_bound"].get<double>() == doctest::Approx(0.5));
  CHECK(rep.results["reference_measure"].get<std::string>().find("fiberwise") !=
        std::string::npos);
}

TEST_CASE("tolerance overrides are honored and hashed") {
  JobConfig cfg;
  cfg.command = "threshold";
  cfg.inputs = json{
      {"weight", {{"poles", {{{"center", {0.0, 0.0}}, {"lambda", 1.0}}}}}}};
  cfg.tolerances = json{{"bracket_rel_width", 0.1}};
  cfg.output_dir = (fs::temp_directory_path() / "klab_test" / "tol").string();
  auto rep = run_job(cfg);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.results["tolerance"].get<double>() == doctest::Approx(0.1));
  JobConfig no_tol = cfg;
  no_tol.tolerances = json::object();
  CHECK(config_hash(cfg) != config_hash(no_tol));
}

TEST_CASE("remaining commands dispatch and write their artifacts") {
  SUBCASE("soliton") {
    JobConfig cfg;
    cfg.command = "soliton";
    cfg.inputs = json{{"beta0", 1.0}, {"beta_inf", 1.0},
                      {"grid", {{"S", 10.0}, {"nodes", 512}}}};
    cfg.output_dir = fresh_dir("soliton").string();
    auto rep = run_job(cfg);
    REQUIRE(rep.exit_code == 0);
    CHECK(std::abs(rep.results["vector_field_coefficient"].get<double>()) <= 1e-6);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "soliton.csv"));
  }
  SUBCASE("continuity") {
    JobConfig cfg;
    cfg.command = "continuity";
    cfg.inputs = json{{"psi_minus", {0.5}},
                      {"grid", {{"S", 14.0}, {"nodes", 1024}}}};
    cfg.output_dir = fresh_dir("continuity").string();
    auto rep = run_job(cfg);
    REQUIRE(rep.exit_code == 0);
    CHECK(rep.results["effective_angle_at_origin"].get<double>() ==
          doctest::Approx(0.5));
    CHECK(rep.results["steps"].size() == 6);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "continuity.csv"));
  }
  SUBCASE("flow") {
    JobConfig cfg;
    cfg.command = "flow";
    cfg.inputs = json{{"grid", {{"S", 6.0}, {"nodes", 128}}},
                      {"t_end", 4.0},
                      {"perturb_amplitude", 0.05}};
    cfg.output_dir = fresh_dir("flow").string();
    auto rep = run_job(cfg);
    REQUIRE(rep.exit_code == 0);
    CHECK(rep.results["sup_distance_to_newton"].get<double>() <= 1e-3);
    CHECK(rep.results["residual_monotone_after_transient"] == true);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "flow_states.csv"));
  }
  SUBCASE("foliation") {
    JobConfig cfg;
    cfg.command = "foliation";
    cfg.inputs = json{{"family", {{"kind", "isotrivial"}}},
                      {"points", {{0.0, 0.0}, {0.05, 0.02}}}};
    cfg.output_dir = fresh_dir("foliation").string();
    auto rep = run_job(cfg);
    REQUIRE(rep.exit_code == 0);
    CHECK(rep.results["leaf_indicator"] == true);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "foliation.csv"));
  }
  SUBCASE("residual product and horizontal") {
    JobConfig cfg;
    cfg.command = "residual";
    cfg.inputs = json{{"case", "product"}};
    cfg.output_dir = fresh_dir("residual").string();
    auto rep = run_job(cfg);
    REQUIRE(rep.exit_code == 0);
    CHECK(rep.results["residual"].get<double>() <= 1e-6);

    JobConfig h;
    h.command = "residual";
    h.inputs = json{{"case", "horizontal"},
                    {"family",
                     {{"kind", "torus_family"},
                      {"tau", {{"tau0", {0.0, 1.0}}, {"slope", {1.0, 0.0}}}}}}};
    h.output_dir = fresh_dir("residual_h").string();
    auto hrep = run_job(h);
    REQUIRE(hrep.exit_code == 0);
    CHECK(hrep.results["relative_residual"].get<double>() <= 0.05);
  }
}
