#include "pairsel/sim.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>

#include "pairsel/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pairsel::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Cell {
  RepRecord record;
  bool ok = false;
  std::string message;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<char>& keep) {
  Index n = 0;
  for (char k : keep) n += k ? 1 : 0;
  Eigen::MatrixXd out(n, x.cols());
  Index r = 0;
  for (Index i = 0; i < x.rows(); ++i)
    if (keep[static_cast<std::size_t>(i)]) out.row(r++) = x.row(i);
  return out;
}

/// CV-tuned fit of one method, returning the refit at the chosen lambda.
std::pair<FitResult, double> tuned_fit(Method method, PenaltyKind kind, const SimSetting& setting,
                                       const SimData& data, const SimConfig& config, std::uint64_t cv_seed) {
  CvOptions cv;
  cv.folds = config.folds;
  cv.seed = cv_seed;
  cv.a = config.a;
  cv.solver = config.solver;
  cv.pairwise = config.pairwise;

  if (method == Method::Proposed) {
    const CompleteCases cases = data.complete_cases();
    const PairwiseDesign design = build_pairwise(cases, config.pairwise);
    const auto grid = lambda_path(design, config.n_lambda, config.lambda_ratio);
    const CvResult res = cross_validate(cases, kind, grid, cv);
    return {fit_penalized(design.problem(), make_penalty(kind, res.chosen_lambda, config.a), config.solver),
            res.chosen_lambda};
  }

  Eigen::VectorXd y = data.y;
  Eigen::MatrixXd x = data.x;
  if (method == Method::MarCompleteCase) {
    const CompleteCases cases = data.complete_cases();
    y = cases.y;
    x = cases.x;
  }
  const GlmProblem problem = make_glm_problem(setting.family, y, x);
  const auto grid = lambda_path(problem, config.n_lambda, config.lambda_ratio);
  const CvResult res = cross_validate_glm(setting.family, y, x, kind, grid, cv);
  return {fit_penalized(problem, make_penalty(kind, res.chosen_lambda, config.a), config.solver),
          res.chosen_lambda};
}

}  // namespace

double observation_probability(const MechanismSpec& mechanism, double y,
                               const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  switch (mechanism.kind) {
    case MechanismKind::TruncYAndX1:
      return (y > mechanism.gamma1 && x[0] > mechanism.gamma2) ? 1.0 : 0.0;
    case MechanismKind::X1GateTimesLinearY:
      return x[0] > mechanism.gamma1 ? (2.0 * y + 3.0) / 5.0 : 0.0;
    case MechanismKind::TruncYPlusX3AndX1:
      if (x.size() < 3) throw InvalidArgument("mechanism needs at least 3 covariates");
      return (y + 0.1 * x[2] > mechanism.gamma1 && x[0] > mechanism.gamma2) ? 1.0 : 0.0;
  }
  throw InvalidArgument("unknown missingness mechanism");
}

Index SimSetting::s_star() const { return static_cast<Index>(true_support().size()); }

std::vector<Index> SimSetting::true_support() const {
  std::vector<Index> s;
  for (Index j = 0; j < beta_star.size(); ++j)
    if (beta_star[j] != 0.0) s.push_back(j);
  return s;
}

void SimSetting::validate() const {
  if (beta_star.size() < 1) throw InvalidArgument("setting needs at least one covariate");
  if (!(phi > 0.0)) throw InvalidArgument("dispersion must be > 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in [0, 1)");
  if (N < 2) throw InvalidArgument("setting needs N >= 2");
  if (family == Family::Logistic && phi != 1.0) throw InvalidArgument("logistic dispersion is fixed at 1");
}

SimSetting named_setting(std::string_view name, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in [0, 1)");
  SimSetting s;
  s.name = std::string(name);
  s.rho = rho;
  const bool half = rho == 0.5;
  auto linear = [&](Index p, double g1_zero, double g1_half, MechanismKind kind) {
    s.family = Family::Gaussian;
    s.beta_star = Eigen::VectorXd::Zero(p);
    s.beta_star.head(3) << 3.0, 1.5, 0.5;
    s.N = 200;
    s.mechanism = {kind, half ? g1_half : g1_zero, half ? -0.3 : -0.4};
  };
  auto logistic = [&](Index p) {
    s.family = Family::Logistic;
    s.beta_star = Eigen::VectorXd::Zero(p);
    s.beta_star.head(4) << 2.0, -2.0, 1.0, -1.0;
    s.N = 500;
    s.mechanism = {MechanismKind::X1GateTimesLinearY, -0.7, 0.0};
  };
  if (name == "S1") linear(8, -3.3, -3.8, MechanismKind::TruncYAndX1);
  else if (name == "S2") linear(200, -2.8, -4.1, MechanismKind::TruncYAndX1);
  else if (name == "S3") logistic(8);
  else if (name == "S4") logistic(500);
  else if (name == "S5") linear(8, -3.3, -3.8, MechanismKind::TruncYPlusX3AndX1);
  else if (name == "S6") linear(200, -2.8, -4.1, MechanismKind::TruncYPlusX3AndX1);
  else throw InvalidArgument("unknown setting '" + std::string(name) + "' (expected S1..S6)");
  return s;
}

Eigen::MatrixXd gen_covariates(Index p, double rho, Index N, Rng& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in [0, 1)");
  if (p < 1 || N < 0) throw InvalidArgument("invalid covariate dimensions");
  std::normal_distribution<double> normal;
  const double innov = std::sqrt(1.0 - rho * rho);
  Eigen::MatrixXd x(N, p);
  for (Index i = 0; i < N; ++i) {
    x(i, 0) = normal(rng);
    for (Index j = 1; j < p; ++j) x(i, j) = rho * x(i, j - 1) + innov * normal(rng);
  }
  return x;
}

Eigen::VectorXd gen_response(const SimSetting& setting, const Eigen::MatrixXd& x, Rng& rng) {
  if (x.cols() != setting.p()) throw InvalidArgument("covariate matrix does not match the setting");
  const Eigen::VectorXd eta = (x * setting.beta_star).array() + setting.alpha;
  Eigen::VectorXd y(x.rows());
  if (setting.family == Family::Gaussian) {
    std::normal_distribution<double> normal(0.0, std::sqrt(setting.phi));
    for (Index i = 0; i < y.size(); ++i) y[i] = eta[i] + normal(rng);
  } else {
    std::uniform_real_distribution<double> unif;
    for (Index i = 0; i < y.size(); ++i) y[i] = unif(rng) < detail::psi1_unchecked(eta[i]) ? 1.0 : 0.0;
  }
  return y;
}

std::vector<char> apply_missingness(const MechanismSpec& mechanism, const Eigen::VectorXd& y,
                                    const Eigen::MatrixXd& x, Rng& rng) {
  if (y.size() != x.rows()) throw InvalidArgument("response and covariates have different row counts");
  std::uniform_real_distribution<double> unif;
  std::vector<char> r(static_cast<std::size_t>(y.size()));
  for (Index i = 0; i < y.size(); ++i) {
    const double prob = observation_probability(mechanism, y[i], x.row(i));
    if (!(prob >= 0.0 && prob <= 1.0))
      throw InvalidArgument("observation probability " + std::to_string(prob) + " outside [0, 1]");
    r[static_cast<std::size_t>(i)] = unif(rng) < prob ? 1 : 0;
  }
  return r;
}

double SimData::observed_fraction() const {
  if (observed.empty()) return 0.0;
  Index n = 0;
  for (char k : observed) n += k ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(observed.size());
}

CompleteCases SimData::complete_cases() const {
  Eigen::VectorXd yc(rows_of(y, observed));
  CompleteCases cases = make_complete_cases(std::move(yc), rows_of(x, observed));
  cases.total_rows = y.size();
  cases.source_rows.clear();
  for (Index i = 0; i < y.size(); ++i)
    if (observed[static_cast<std::size_t>(i)]) cases.source_rows.push_back(i);
  return cases;
}

SimData simulate(const SimSetting& setting, Rng& rng) {
  setting.validate();
  SimData d;
  d.x = gen_covariates(setting.p(), setting.rho, setting.N, rng);
  d.y = gen_response(setting, d.x, rng);
  d.observed = apply_missingness(setting.mechanism, d.y, d.x, rng);
  return d;
}

FitResult fit_reference_glm(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                            const PenaltySpec& penalty, const SolverConfig& config) {
  return fit_penalized(make_glm_problem(family, y, x), penalty, config);
}

std::pair<Index, Index> count_fp_fn(const std::vector<Index>& support_hat,
                                    const std::vector<Index>& support_true) {
  auto contains = [](const std::vector<Index>& s, Index j) { return std::find(s.begin(), s.end(), j) != s.end(); };
  Index fp = 0, fn = 0;
  for (Index j : support_hat) fp += contains(support_true, j) ? 0 : 1;
  for (Index j : support_true) fn += contains(support_hat, j) ? 0 : 1;
  return {fp, fn};
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::NoMissing: return "no_missing";
    case Method::MarCompleteCase: return "mar";
    case Method::Proposed: return "proposed";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "no_missing" || s == "nomissing" || s == "full") return Method::NoMissing;
  if (s == "mar" || s == "complete_case" || s == "cc") return Method::MarCompleteCase;
  if (s == "proposed" || s == "pairwise") return Method::Proposed;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::uint64_t replication_seed(std::uint64_t base_seed, int rep) {
  std::uint64_t state = base_seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(rep + 1));
  return splitmix64(state);
}

SimResult run_replications(const SimSetting& setting, const std::vector<Method>& methods,
                           const std::vector<PenaltyKind>& penalties, int reps, std::uint64_t base_seed,
                           const SimConfig& config) {
  setting.validate();
  config.solver.validate();
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  if (methods.empty() || penalties.empty()) throw InvalidArgument("at least one method and one penalty are required");
  const std::vector<Index> truth = setting.true_support();
  const std::size_t ncell = methods.size() * penalties.size();
  std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(reps), std::vector<Cell>(ncell));
  std::vector<std::exception_ptr> fatal(static_cast<std::size_t>(reps));

#ifdef _OPENMP
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#else
  const int threads = 1;
#endif
  (void)threads;
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (reps > 1)
  for (int rep = 0; rep < reps; ++rep) {
    try {
      std::uint64_t state = replication_seed(base_seed, rep);
      Rng rng(splitmix64(state));
      const std::uint64_t cv_seed = splitmix64(state);
      const SimData data = simulate(setting, rng);
      const double frac = data.observed_fraction();
      std::size_t c = 0;
      for (Method method : methods) {
        for (PenaltyKind kind : penalties) {
          Cell& cell = cells[static_cast<std::size_t>(rep)][c++];
          cell.record.rep = rep;
          cell.record.method = method;
          cell.record.penalty = kind;
          cell.record.observed_fraction = method == Method::NoMissing ? 1.0 : frac;
          try {
            const auto t0 = std::chrono::steady_clock::now();
            auto [fit, lambda] = tuned_fit(method, kind, setting, data, config, cv_seed);
            const auto t1 = std::chrono::steady_clock::now();
            const auto [fp, fn] = count_fp_fn(fit.support, truth);
            cell.record.fp = fp;
            cell.record.fn = fn;
            cell.record.lambda = lambda;
            cell.record.seconds = std::chrono::duration<double>(t1 - t0).count();
            cell.record.objective_trace = std::move(fit.objective_trace);
            cell.ok = true;
          } catch (const Error& e) {
            cell.message = e.what();
          }
        }
      }
    } catch (...) {
      fatal[static_cast<std::size_t>(rep)] = std::current_exception();
    }
  }
  for (const auto& e : fatal)
    if (e) std::rethrow_exception(e);

  SimResult result;
  for (std::size_t c = 0; c < ncell; ++c) {
    RepSummary s;
    s.method = methods[c / penalties.size()];
    s.penalty = penalties[c % penalties.size()];
    std::vector<double> fp, fn, frac, secs;
    for (int rep = 0; rep < reps; ++rep) {
      const Cell& cell = cells[static_cast<std::size_t>(rep)][c];
      if (!cell.ok) {
        ++s.excluded;
        result.exclusions.push_back({rep, s.method, s.penalty, cell.message});
        continue;
      }
      fp.push_back(static_cast<double>(cell.record.fp));
      fn.push_back(static_cast<double>(cell.record.fn));
      frac.push_back(cell.record.observed_fraction);
      secs.push_back(cell.record.seconds);
    }
    s.reps = static_cast<int>(fp.size());
    s.fp_mean = mean_of(fp);
    s.fp_sd = sd_of(fp);
    s.fn_mean = mean_of(fn);
    s.fn_sd = sd_of(fn);
    s.mean_observed_fraction = mean_of(frac);
    s.mean_fit_seconds = mean_of(secs);
    if (static_cast<double>(s.excluded) > 0.1 * reps)
      throw NumericalError(std::to_string(s.excluded) + " of " + std::to_string(reps) + " replications failed for " +
                           std::string(to_string(s.method)) + "/" + std::string(to_string(s.penalty)) +
                           "; first failure: " + result.exclusions.back().message);
    result.summaries.push_back(s);
  }
  for (int rep = 0; rep < reps; ++rep)
    for (std::size_t c = 0; c < ncell; ++c) {
      Cell& cell = cells[static_cast<std::size_t>(rep)][c];
      if (cell.ok) result.records.push_back(std::move(cell.record));
    }
  return result;
}

}  // namespace pairsel::sim
