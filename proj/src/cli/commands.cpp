#include "pairsel/cli/commands.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <memory>

#include "pairsel/cv.hpp"
#include "pairsel/error.hpp"
#include "pairsel/pairwise.hpp"
#include "pairsel/sim.hpp"
#include "pairsel/table.hpp"

#ifndef PAIRSEL_VERSION
#define PAIRSEL_VERSION "0.0.0"
#endif

namespace pairsel::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

void add_solver_config(RunManifest& manifest, const SolverConfig& s) {
  manifest.add("cd_tol", format_double(s.cd_tol));
  manifest.add("cd_max_sweeps", std::to_string(s.cd_max_sweeps));
  manifest.add("lla_tol", format_double(s.lla_tol));
  manifest.add("lla_max_iter", std::to_string(s.lla_max_iter));
  manifest.add("kkt_tol", format_double(s.kkt_tol));
  manifest.add("newton_max_iter", std::to_string(s.newton_max_iter));
}

void add_fit_config(RunManifest& manifest, const FitArgs& args, PenaltyKind kind) {
  manifest.add("input", args.data.input);
  manifest.add("response", args.data.response);
  manifest.add("covariates", join(args.data.covariates, ";"));
  manifest.add("na_marker", args.data.na_marker);
  manifest.add("penalty", std::string(to_string(kind)));
  manifest.add("a", format_double(args.a > 0.0 ? args.a : default_concavity(kind)));
  manifest.add("lambda", args.lambda ? format_double(*args.lambda) : "");
  manifest.add("cv", args.cv ? "true" : "false");
  manifest.add("folds", std::to_string(args.folds));
  manifest.add("n_lambda", std::to_string(args.n_lambda));
  manifest.add("lambda_ratio", format_double(args.lambda_ratio));
  manifest.add("standardize", args.standardize ? "true" : "false");
  add_solver_config(manifest, args.solver);
}

struct Pipeline {
  CompleteCases cases;
  std::optional<PairwiseDesign> design;
  std::optional<CvResult> cv;
  std::vector<double> grid;
  double lambda = 0.0;
  double lambda_max = 0.0;
  PenaltySpec penalty;
  FitResult fit;
  Eigen::VectorXd scales;   // covariate j was divided by scales[j] before fitting
  Eigen::VectorXd gamma;    // on the original covariate scale
  bool standardized = false;
};

Pipeline run_pipeline(const FitArgs& args, RunManifest& manifest, bool need_cv) {
  const PenaltyKind kind = parse_penalty_kind(args.penalty);
  if (need_cv && args.lambda) throw InvalidArgument("--lambda cannot be combined with cross-validation");
  if (!need_cv && !args.lambda) throw InvalidArgument("give either --lambda or --cv");
  if (args.lambda && !(*args.lambda >= 0.0)) throw InvalidArgument("--lambda must be >= 0");
  if (args.a < 0.0) throw InvalidArgument("--a must be > 0");
  args.solver.validate();
  add_fit_config(manifest, args, kind);

  Pipeline run;
  auto t0 = Clock::now();
  manifest.input_digest = sha256_file(args.data.input);
  CsvOptions csv;
  csv.na_marker = args.data.na_marker;
  const Table table = read_csv_file(args.data.input, csv);
  run.cases = extract_complete_cases(table, args.data.response, args.data.covariates);
  if (run.cases.n() < 2) throw DataError("fewer than 2 complete cases");
  manifest.time("read", seconds_since(t0));

  t0 = Clock::now();
  run.design = build_pairwise(run.cases);
  if (run.design->m() == 0) throw DataError("every pair of complete cases has tied responses");
  run.scales = Eigen::VectorXd::Ones(run.cases.p());
  run.standardized = args.standardize;
  if (args.standardize) {
    run.scales = pair_column_scales(*run.design);
    run.cases.x = run.cases.x * run.scales.cwiseInverse().asDiagonal();
    run.design = build_pairwise(run.cases);
  }
  run.lambda_max = lambda_max(run.design->problem());
  manifest.time("design", seconds_since(t0));

  if (need_cv) {
    t0 = Clock::now();
    run.grid = lambda_path(*run.design, args.n_lambda, args.lambda_ratio);
    CvOptions opts;
    opts.folds = args.folds;
    opts.seed = manifest.seed;
    opts.a = args.a;
    opts.solver = args.solver;
    run.cv = cross_validate(run.cases, kind, run.grid, opts);
    run.lambda = run.cv->chosen_lambda;
    manifest.time("cv", seconds_since(t0));
  } else {
    run.lambda = *args.lambda;
  }

  t0 = Clock::now();
  run.penalty = make_penalty(kind, run.lambda, args.a);
  run.fit = fit_penalized(run.design->problem(), run.penalty, args.solver);
  run.gamma = run.fit.gamma.cwiseQuotient(run.scales);
  manifest.time("fit", seconds_since(t0));
  return run;
}

void fill_fit_report(Report& report, const Pipeline& run) {
  const CompleteCases& c = run.cases;
  report.set("n", static_cast<std::int64_t>(c.n()));
  report.set("N", static_cast<std::int64_t>(c.total_rows));
  report.set("m", static_cast<std::int64_t>(run.design->m()));
  report.set("p", static_cast<std::int64_t>(c.p()));
  report.set("observed_fraction", c.observed_fraction());
  report.set("lambda_max", run.lambda_max);
  report.set("lambda", run.lambda);
  report.set("objective", run.fit.objective);
  report.set("loss", run.fit.loss);
  report.set("kkt_residual", run.fit.kkt_residual);
  report.set("lla_iterations", static_cast<std::int64_t>(run.fit.lla_iterations));
  report.set("standardized", run.standardized ? "true" : "false");
  std::vector<std::string> names;
  for (Index j : run.fit.support) names.push_back(c.covariate_names[static_cast<std::size_t>(j)]);
  report.set("support", join(names, ";"));
  report.set("support_size", static_cast<std::int64_t>(run.fit.support.size()));

  ReportTable coef{"coefficients", {"covariate", "gamma", "selected", "scale"}, {}};
  for (Index j = 0; j < c.p(); ++j)
    coef.rows.push_back({c.covariate_names[static_cast<std::size_t>(j)], run.gamma[j],
                         static_cast<std::int64_t>(run.gamma[j] != 0.0), run.scales[j]});
  report.tables.push_back(std::move(coef));
}

}  // namespace

std::string software_version() { return PAIRSEL_VERSION; }

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error(ErrorKind::Data, "sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

void stamp_manifest(Report& report, const RunManifest& manifest) {
  report.set("command", manifest.command_line);
  report.set("version", manifest.version);
  report.set("seed", std::to_string(manifest.seed));
  report.set("seed_generated", manifest.seed_generated ? "true" : "false");
  if (!manifest.input_digest.empty()) report.set("input_sha256", manifest.input_digest);
  for (const auto& [k, v] : manifest.config) report.set("config." + k, v);
}

std::string manifest_json(const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["command"] = manifest.command_line;
  doc["version"] = manifest.version;
  doc["seed"] = manifest.seed;
  doc["seed_generated"] = manifest.seed_generated;
  doc["input_sha256"] = manifest.input_digest;
  doc["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : manifest.config) doc["config"][k] = v;
  doc["timings_seconds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : manifest.timings) doc["timings_seconds"][k] = v;
  return doc.dump(2) + "\n";
}

Report cmd_fit(const FitArgs& args, RunManifest& manifest) {
  const Pipeline run = run_pipeline(args, manifest, args.cv);
  Report report;
  stamp_manifest(report, manifest);
  report.set("lambda_source", args.cv ? "cv" : "given");
  fill_fit_report(report, run);
  return report;
}

Report cmd_cv(const FitArgs& args, RunManifest& manifest) {
  const Pipeline run = run_pipeline(args, manifest, true);
  Report report;
  stamp_manifest(report, manifest);
  report.set("lambda_source", "cv");
  report.set("chosen_lambda", run.cv->chosen_lambda);
  report.set("chosen_index", static_cast<std::int64_t>(run.cv->chosen_index));
  report.set("failed_fits", static_cast<std::int64_t>(run.cv->failed_fits));
  fill_fit_report(report, run);

  ReportTable curve{"cv_curve", {"lambda", "cv"}, {}};
  const auto k = run.cv->per_fold_values.rows();
  for (Index f = 0; f < k; ++f) curve.columns.push_back("fold_" + std::to_string(f + 1));
  for (std::size_t g = 0; g < run.grid.size(); ++g) {
    std::vector<Cell> row{run.grid[g], run.cv->cv_values[g]};
    for (Index f = 0; f < k; ++f) row.emplace_back(run.cv->per_fold_values(f, static_cast<Index>(g)));
    curve.rows.push_back(std::move(row));
  }
  report.tables.insert(report.tables.begin(), std::move(curve));
  return report;
}

Report cmd_simulate(const SimulateArgs& args, RunManifest& manifest, Report* raw) {
  const sim::SimSetting setting = sim::named_setting(args.setting, args.rho);
  std::vector<sim::Method> methods;
  for (const auto& m : args.methods) methods.push_back(sim::parse_method(m));
  std::vector<PenaltyKind> penalties;
  for (const auto& p : args.penalties) penalties.push_back(parse_penalty_kind(p));
  if (args.reps < 1) throw InvalidArgument("--reps must be >= 1");

  manifest.add("setting", args.setting);
  manifest.add("rho", format_double(args.rho));
  manifest.add("reps", std::to_string(args.reps));
  manifest.add("methods", join(args.methods, ";"));
  manifest.add("penalties", join(args.penalties, ";"));
  manifest.add("folds", std::to_string(args.folds));
  manifest.add("n_lambda", std::to_string(args.n_lambda));
  manifest.add("lambda_ratio", format_double(args.lambda_ratio));
  manifest.add("a", args.a > 0.0 ? format_double(args.a) : "default");
  add_solver_config(manifest, args.solver);

  sim::SimConfig config;
  config.n_lambda = args.n_lambda;
  config.lambda_ratio = args.lambda_ratio;
  config.folds = args.folds;
  config.a = args.a;
  config.solver = args.solver;
  config.threads = args.threads;

  const auto t0 = Clock::now();
  const sim::SimResult result = sim::run_replications(setting, methods, penalties, args.reps, manifest.seed, config);
  manifest.time("simulate", seconds_since(t0));

  Report report;
  stamp_manifest(report, manifest);
  report.set("family", setting.family == Family::Gaussian ? "gaussian" : "logistic");
  report.set("p", static_cast<std::int64_t>(setting.p()));
  report.set("N", static_cast<std::int64_t>(setting.N));
  report.set("s_star", static_cast<std::int64_t>(setting.s_star()));
  report.set("excluded_total", static_cast<std::int64_t>(result.exclusions.size()));

  ReportTable summary{"summary",
                      {"method", "penalty", "fp_mean", "fp_sd", "fn_mean", "fn_sd", "reps", "excluded",
                       "observed_fraction", "mean_fit_seconds"},
                      {}};
  for (const auto& s : result.summaries)
    summary.rows.push_back({std::string(sim::to_string(s.method)), std::string(to_string(s.penalty)), s.fp_mean,
                            s.fp_sd, s.fn_mean, s.fn_sd, static_cast<std::int64_t>(s.reps),
                            static_cast<std::int64_t>(s.excluded), s.mean_observed_fraction, s.mean_fit_seconds});
  report.tables.push_back(std::move(summary));

  if (!result.exclusions.empty()) {
    ReportTable excl{"exclusions", {"rep", "method", "penalty", "message"}, {}};
    for (const auto& e : result.exclusions)
      excl.rows.push_back({static_cast<std::int64_t>(e.rep), std::string(sim::to_string(e.method)),
                           std::string(to_string(e.penalty)), e.message});
    report.tables.push_back(std::move(excl));
  }

  if (raw) {
    raw->header = report.header;
    ReportTable rows{"replications", {"rep", "method", "penalty", "fp", "fn", "lambda", "seconds", "observed_fraction"}, {}};
    for (const auto& r : result.records)
      rows.rows.push_back({static_cast<std::int64_t>(r.rep), std::string(sim::to_string(r.method)),
                           std::string(to_string(r.penalty)), static_cast<std::int64_t>(r.fp),
                           static_cast<std::int64_t>(r.fn), r.lambda, r.seconds, r.observed_fraction});
    raw->tables.push_back(std::move(rows));
  }
  return report;
}

}  // namespace pairsel::cli
