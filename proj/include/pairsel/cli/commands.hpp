#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pairsel/cli/report.hpp"
#include "pairsel/solver.hpp"

namespace pairsel::cli {

/// Everything needed to reproduce a run. The report header carries all of it
/// except the wall-clock timings, which go to a sidecar file so that reruns
/// produce byte-identical reports.
struct RunManifest {
  std::string command_line;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  bool seed_generated = false;
  std::string input_digest;  // sha256 of the input file, empty when there is none
  std::string version;
  std::vector<std::pair<std::string, double>> timings;

  void add(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
  void time(const std::string& phase, double seconds) { timings.emplace_back(phase, seconds); }
};

std::string software_version();

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Manifest entries for the report header.
void stamp_manifest(Report& report, const RunManifest& manifest);

/// JSON sidecar including the timings.
std::string manifest_json(const RunManifest& manifest);

struct DataArgs {
  std::string input;
  std::string response;
  std::vector<std::string> covariates;  // empty: every other column
  std::string na_marker = "NA";
};

struct FitArgs {
  DataArgs data;
  std::string penalty = "lasso";
  std::optional<double> lambda;
  bool cv = false;
  int folds = 5;
  int n_lambda = 100;
  double lambda_ratio = 0.01;
  double a = 0.0;  // 0 selects the default concavity
  bool standardize = false;  // fit on unit-RMS pair columns, report on the original scale
  SolverConfig solver;
};

struct SimulateArgs {
  std::string setting = "S1";
  double rho = 0.0;
  int reps = 1;
  std::vector<std::string> methods{"no_missing", "mar", "proposed"};
  std::vector<std::string> penalties{"lasso", "scad", "mcp"};
  int folds = 5;
  int n_lambda = 100;
  double lambda_ratio = 0.01;
  double a = 0.0;
  int threads = 0;
  SolverConfig solver;
};

/// Fits at --lambda, or at the CV-selected lambda with --cv.
Report cmd_fit(const FitArgs& args, RunManifest& manifest);

/// CV curve, chosen lambda and the refit at the chosen lambda.
Report cmd_cv(const FitArgs& args, RunManifest& manifest);

/// One summary row per (method, penalty). `raw` receives per-replication rows when non-null.
Report cmd_simulate(const SimulateArgs& args, RunManifest& manifest, Report* raw = nullptr);

}  // namespace pairsel::cli
