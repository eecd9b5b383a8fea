// klab: job configs in, exact/numeric reports and plot-ready CSV out.
//
//   klab <command> --config path.json --out dir [--parallel N]
//
// Commands: futaki ehrhart cm lelong threshold alpha model ke soliton
//           continuity flow wp foliation residual sweep
// Exit codes: 0 ok, 2 validation failure, 3 solver non-convergence,
//             4 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/jobs.hpp"

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw klab::ValidationError("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

klab::JobConfig make_config(const std::string& command, const json& body,
                            const std::string& out_dir) {
  json j;
  if (body.contains("inputs")) {
    j = body;
    j["command"] = command;
  } else {
    j = json{{"command", command}, {"inputs", body}};
  }
  if (!out_dir.empty()) j["output_dir"] = out_dir;
  return klab::JobConfig::from_json(j);
}

int finish(const klab::RunReport& rep) {
  if (rep.exit_code != 0)
    std::cerr << "error " << rep.exit_code << ": " << rep.error << "\n";
  else
    std::cout << rep.command << " ok (hash " << rep.config_hash << ")\n";
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kahlerlab: K-stability and canonical-metric computations"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int parallel = 1;

  const char* commands[] = {"futaki", "ehrhart", "cm",       "lelong",
                            "threshold", "alpha", "model",   "ke",
                            "soliton", "continuity", "flow", "wp",
                            "foliation", "residual", "sweep"};
  for (const char* name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "job config JSON")->required();
    sub->add_option("--out", out_dir, "output directory");
    if (std::string(name) == "sweep")
      sub->add_option("--parallel", parallel, "concurrent jobs");
  }

  CLI11_PARSE(app, argc, argv);
  auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  try {
    json body = load_json(config_path);
    if (command == "sweep") {
      if (!body.contains("jobs") || !body["jobs"].is_array())
        throw klab::ValidationError("sweep config needs a \"jobs\" array");
      std::vector<klab::JobConfig> cfgs;
      int idx = 0;
      for (const auto& jj : body["jobs"]) {
        auto cfg = klab::JobConfig::from_json(jj);
        if (cfg.output_dir.empty() && !out_dir.empty()) {
          char sub_name[32];
          std::snprintf(sub_name, sizeof sub_name, "job_%03d", idx);
          cfg.output_dir = out_dir + "/" + sub_name;
        }
        cfgs.push_back(std::move(cfg));
        ++idx;
      }
      auto reports = klab::sweep(cfgs, parallel);
      for (const auto& r : reports) {
        if (r.exit_code != 0)
          std::cerr << "error " << r.exit_code << " [" << r.command
                    << "]: " << r.error << "\n";
      }
      std::cout << reports.size() << " jobs, aggregate exit "
                << klab::aggregate_exit_code(reports) << "\n";
      return klab::aggregate_exit_code(reports);
    }
    auto cfg = make_config(command, body, out_dir);
    return finish(klab::run_job(cfg));
  } catch (const klab::ValidationError& e) {
    std::cerr << "error 2: validation: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error 2: validation: bad config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error 4: internal: " << e.what() << "\n";
    return 4;
  }
}
