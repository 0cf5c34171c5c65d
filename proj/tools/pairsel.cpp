// pairsel: penalized pairwise pseudo-likelihood variable selection with
// incomplete data. Subcommands: fit, cv, simulate.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "pairsel/cli/commands.hpp"
#include "pairsel/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct Output {
  std::string out;
  std::string raw_out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_solver_options(CLI::App* app, pairsel::SolverConfig& s) {
  app->add_option("--cd-tol", s.cd_tol, "Coordinate-descent convergence tolerance")->capture_default_str();
  app->add_option("--cd-max-sweeps", s.cd_max_sweeps, "Coordinate-descent sweep budget per fit")->capture_default_str();
  app->add_option("--lla-tol", s.lla_tol, "LLA convergence tolerance (sup norm)")->capture_default_str();
  app->add_option("--lla-max-iter", s.lla_max_iter, "LLA iteration cap")->capture_default_str();
  app->add_option("--kkt-tol", s.kkt_tol, "KKT tolerance required at every solution")->capture_default_str();
  app->add_option("--newton-max-iter", s.newton_max_iter, "Proximal Newton step cap per fit")->capture_default_str();
}

void add_output_options(CLI::App* app, Output& o) {
  app->add_option("--out", o.out, "Report file (default: standard output)");
  app->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app->add_option("--seed", o.seed, "Random seed (generated and recorded when absent)");
  app->add_option("--threads", o.threads, "Worker threads (0: available parallelism)")->check(CLI::NonNegativeNumber);
}

void add_fit_options(CLI::App* app, pairsel::cli::FitArgs& a, bool with_lambda) {
  app->add_option("--input", a.data.input, "CSV file with a header row")->required();
  app->add_option("--response", a.data.response, "Response column name")->required();
  app->add_option("--covariates", a.data.covariates, "Covariate columns (default: all other columns)")->delimiter(',');
  app->add_option("--na-marker", a.data.na_marker, "Token marking a missing cell (empty cells are always missing)")
      ->capture_default_str();
  app->add_option("--penalty", a.penalty, "lasso, scad or mcp")
      ->check(CLI::IsMember({"lasso", "scad", "mcp"}, CLI::ignore_case))
      ->capture_default_str();
  if (with_lambda) {
    app->add_option("--lambda", a.lambda, "Penalty level");
    app->add_flag("--cv", a.cv, "Choose lambda by K-fold cross-validation");
  }
  app->add_option("--folds", a.folds, "Number of CV folds")->capture_default_str();
  app->add_option("--n-lambda", a.n_lambda, "Length of the lambda grid")->capture_default_str();
  app->add_option("--lambda-ratio", a.lambda_ratio, "Smallest grid lambda as a fraction of lambda_max")
      ->capture_default_str();
  app->add_option("--a", a.a, "Concavity (default: 3.7 for SCAD, 3 for MCP)");
  app->add_flag("--standardize", a.standardize, "Fit on unit-RMS pair-difference columns; coefficients are reported on the original scale");
  add_solver_options(app, a.solver);
}

std::uint64_t resolve_seed(const Output& o, pairsel::cli::RunManifest& manifest) {
  if (o.seed) return *o.seed;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  manifest.seed_generated = true;
  std::cerr << "pairsel: no --seed given, using seed " << seed << '\n';
  return seed;
}

void emit(const pairsel::cli::Report& report, const Output& o, const pairsel::cli::RunManifest& manifest) {
  const auto format = pairsel::cli::parse_report_format(o.format);
  if (o.out.empty()) {
    pairsel::cli::write_report(std::cout, report, format);
    std::cerr << pairsel::cli::manifest_json(manifest);
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw pairsel::DataError("cannot write '" + o.out + "'");
  pairsel::cli::write_report(f, report, format);
  std::ofstream m(o.out + ".manifest.json", std::ios::binary);
  if (!m) throw pairsel::DataError("cannot write '" + o.out + ".manifest.json'");
  m << pairsel::cli::manifest_json(manifest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse GLM variable selection when missingness depends on the response"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pairsel::cli::software_version());

  Output out;
  pairsel::cli::FitArgs fit_args;
  pairsel::cli::FitArgs cv_args;
  pairsel::cli::SimulateArgs sim_args;

  auto* fit = app.add_subcommand("fit", "Fit at a given lambda, or at the CV choice with --cv");
  add_fit_options(fit, fit_args, true);
  add_output_options(fit, out);

  auto* cv = app.add_subcommand("cv", "Cross-validation curve, chosen lambda and refit");
  add_fit_options(cv, cv_args, false);
  add_output_options(cv, out);

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo study for settings S1..S6");
  simulate->add_option("--setting", sim_args.setting, "S1..S6")
      ->check(CLI::IsMember({"S1", "S2", "S3", "S4", "S5", "S6"}))
      ->capture_default_str();
  simulate->add_option("--rho", sim_args.rho, "AR(1) covariate correlation")->capture_default_str();
  simulate->add_option("--reps", sim_args.reps, "Replications")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--methods", sim_args.methods, "no_missing, mar, proposed")->delimiter(',');
  simulate->add_option("--penalties", sim_args.penalties, "lasso, scad, mcp")->delimiter(',');
  simulate->add_option("--folds", sim_args.folds, "Number of CV folds")->capture_default_str();
  simulate->add_option("--n-lambda", sim_args.n_lambda, "Length of the lambda grid")->capture_default_str();
  simulate->add_option("--lambda-ratio", sim_args.lambda_ratio, "Smallest grid lambda / lambda_max")
      ->capture_default_str();
  simulate->add_option("--a", sim_args.a, "Concavity (default per penalty)");
  simulate->add_option("--raw-out", out.raw_out, "Per-replication FP/FN counts");
  add_solver_options(simulate, sim_args.solver);
  add_output_options(simulate, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  pairsel::cli::RunManifest manifest;
  for (int i = 0; i < argc; ++i) manifest.command_line += (i ? " " : "") + std::string(argv[i]);
  manifest.version = pairsel::cli::software_version();

  try {
#ifdef _OPENMP
    if (out.threads > 0) omp_set_num_threads(out.threads);
#endif
    manifest.seed = resolve_seed(out, manifest);
    manifest.add("threads", std::to_string(out.threads));
    if (fit->parsed()) {
      emit(pairsel::cli::cmd_fit(fit_args, manifest), out, manifest);
    } else if (cv->parsed()) {
      emit(pairsel::cli::cmd_cv(cv_args, manifest), out, manifest);
    } else {
      sim_args.threads = out.threads;
      pairsel::cli::Report raw;
      const auto report = pairsel::cli::cmd_simulate(sim_args, manifest, out.raw_out.empty() ? nullptr : &raw);
      if (!out.raw_out.empty()) {
        std::ofstream f(out.raw_out, std::ios::binary);
        if (!f) throw pairsel::DataError("cannot write '" + out.raw_out + "'");
        pairsel::cli::write_report(f, raw, pairsel::cli::parse_report_format(out.format));
      }
      emit(report, out, manifest);
    }
  } catch (const pairsel::Error& e) {
    std::cerr << "pairsel: " << e.what() << '\n';
    switch (e.kind()) {
      case pairsel::ErrorKind::Usage: return kExitUsage;
      case pairsel::ErrorKind::Data: return kExitData;
      case pairsel::ErrorKind::Numerical: return kExitNumerical;
    }
  } catch (const std::exception& e) {
    std::cerr << "pairsel: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
