#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace klab {

/// A single CLI job: command name, command-specific inputs, output directory.
/// seed is accepted and hashed for reproducibility bookkeeping; every grid in
/// the library is deterministic, so it steers nothing today.
struct JobConfig {
  std::string command;
  nlohmann::json inputs;
  std::string output_dir;
  long long seed = 0;
  nlohmann::json tolerances;  // optional per-command overrides

  static JobConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RunReport {
  std::string command;
  std::string config_hash;
  nlohmann::json conventions;
  nlohmann::json results;
  std::vector<std::string> artifacts;  // files written under output_dir
  double wall_time_ms = 0.0;
  int exit_code = 0;          // 0 ok, 2 validation, 3 solver, 4 internal
  std::string error;          // one-line machine-parsable reason
};

/// FNV-1a over the canonical (sorted-key) serialization.
std::string config_hash(const JobConfig& cfg);

/// The convention stamp embedded in every report.
nlohmann::json convention_stamp();

/// Dispatches to the owning module, writes report.json + CSV artifacts under
/// cfg.output_dir (report.json and CSVs are bitwise deterministic; wall time
/// goes to meta.json). Never throws: failures are encoded in the report.
RunReport run_job(const JobConfig& cfg);

/// Runs jobs concurrently up to the given width; reports in input order;
/// one failure does not abort the others.
std::vector<RunReport> sweep(const std::vector<JobConfig>& cfgs, int parallelism);

int aggregate_exit_code(const std::vector<RunReport>& reports);

}  // namespace klab
