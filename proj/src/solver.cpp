#include "pairsel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "pairsel/audit.hpp"
#include "pairsel/error.hpp"
#include "pairsel/kernels.hpp"

namespace pairsel {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxLineSearch = 60;
// Below this largest |dl/deta| every logistic observation is fit exactly: the data are separable.
constexpr double kSeparationResidual = 1e-6;

std::span<const double> cspan(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<double> mspan(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double soft_threshold(double u, double w) {
  if (std::fabs(u) <= w) return 0.0;
  return u > 0.0 ? u - w : u + w;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Per-coordinate KKT violation for a weighted-L1 stationarity condition.
double coordinate_violation(double value, double grad, double weight) {
  if (value != 0.0) return std::fabs(grad + weight * (value > 0.0 ? 1.0 : -1.0));
  return std::max(0.0, std::fabs(grad) - weight);
}

std::vector<Index> support_of(const Eigen::VectorXd& gamma) {
  std::vector<Index> s;
  for (Index j = 0; j < gamma.size(); ++j)
    if (gamma[j] != 0.0) s.push_back(j);
  return s;
}

void check_weights(const GlmProblem& problem, const Eigen::VectorXd& weights) {
  if (weights.size() != problem.dim())
    throw InvalidArgument("weight vector length does not match design dimension");
  for (Index j = 0; j < weights.size(); ++j)
    if (!std::isfinite(weights[j]) || weights[j] < 0.0)
      throw InvalidArgument("penalty weights must be finite and >= 0");
}

/// Working state of one weighted-L1 fit.
class ProximalNewton {
 public:
  ProximalNewton(const GlmProblem& problem, const Eigen::VectorXd& weights,
                 const SolverConfig& config)
      : problem_(problem),
        weights_(weights),
        config_(config),
        m_(problem.size()),
        p_(problem.dim()),
        labels_(*problem.labels),
        eta_(problem.size()),
        d_(problem.size()),
        h_(problem.size()) {}

  FitResult run(const std::optional<WarmStart>& init) {
    if (init) {
      if (init->gamma.size() != p_) throw InvalidArgument("warm start has wrong length");
      gamma_ = init->gamma;
      intercept_ = problem_.intercept ? init->intercept : 0.0;
    } else {
      gamma_ = Eigen::VectorXd::Zero(p_);
      intercept_ = null_intercept(problem_);
    }
    eta_ = linear_predictor(problem_, gamma_, intercept_);
    objective_ = objective_at(eta_, gamma_);
    if (!std::isfinite(objective_)) throw NumericalError("non-finite objective at the starting point");

    active_.assign(static_cast<std::size_t>(p_), 0);
    for (Index j = 0; j < p_; ++j)
      if (gamma_[j] != 0.0) active_[static_cast<std::size_t>(j)] = 1;

    Eigen::VectorXd g = full_gradient();
    add_violators(g);

    for (;;) {
      try {
        newton_on_active_set();
      } catch (const NumericalError&) {
        // A budget or cap failure near separation is reported as the separation it is.
        check_separation();
        throw;
      }
      g = full_gradient();
      const double kkt = full_kkt(g);
      if (!add_violators(g)) {
        if (kkt > config_.kkt_tol)
          throw NumericalError("weighted-L1 solver stalled above the KKT tolerance",
                               to_std(gamma_), kkt);
        check_separation();
        return finish(kkt);
      }
    }
  }

 private:
  double objective_at(const Eigen::VectorXd& eta, const Eigen::VectorXd& gamma) const {
    const double loss = problem_.scale * kernels::loss_sum(problem_.family, cspan(eta), cspan(labels_));
    return loss + problem_.offset + weights_.dot(gamma.cwiseAbs());
  }

  std::vector<Index> active_columns() const {
    std::vector<Index> cols;
    if (problem_.intercept) cols.push_back(kInterceptColumn);
    for (Index j = 0; j < p_; ++j)
      if (active_[static_cast<std::size_t>(j)]) cols.push_back(j);
    return cols;
  }

  Eigen::VectorXd full_gradient() {
    kernels::derivatives(problem_.family, cspan(eta_), cspan(labels_), mspan(d_), {});
    std::vector<Index> cols(static_cast<std::size_t>(p_));
    std::iota(cols.begin(), cols.end(), Index{0});
    Eigen::VectorXd g(p_);
    std::visit([&](const auto& rows) { kernels::weighted_column_sums(rows, cols, cspan(d_), mspan(g)); },
               problem_.rows);
    g *= problem_.scale;
    if (problem_.intercept) intercept_grad_ = problem_.scale * d_.sum();
    return g;
  }

  double full_kkt(const Eigen::VectorXd& g) const {
    double kkt = problem_.intercept ? std::fabs(intercept_grad_) : 0.0;
    for (Index j = 0; j < p_; ++j) kkt = std::max(kkt, coordinate_violation(gamma_[j], g[j], weights_[j]));
    return kkt;
  }

  bool add_violators(const Eigen::VectorXd& g) {
    bool added = false;
    for (Index j = 0; j < p_; ++j) {
      auto& flag = active_[static_cast<std::size_t>(j)];
      if (!flag && std::fabs(g[j]) > weights_[j]) {
        flag = 1;
        added = true;
      }
    }
    return added;
  }

  void newton_on_active_set() {
    const std::vector<Index> cols = active_columns();
    const auto a = static_cast<Index>(cols.size());
    if (a == 0) return;
    const double inner_tol = 0.1 * config_.kkt_tol;

    Eigen::VectorXd w(a), z0(a), ga(a), xdelta(m_);
    for (Index k = 0; k < a; ++k) w[k] = cols[k] < 0 ? 0.0 : weights_[cols[k]];
    Eigen::MatrixXd hess;

    for (;;) {
      kernels::derivatives(problem_.family, cspan(eta_), cspan(labels_), mspan(d_), mspan(h_));
      std::visit([&](const auto& rows) { kernels::weighted_column_sums(rows, cols, cspan(d_), mspan(ga)); },
                 problem_.rows);
      ga *= problem_.scale;
      for (Index k = 0; k < a; ++k) z0[k] = cols[k] < 0 ? intercept_ : gamma_[cols[k]];

      double kkt = 0.0;
      for (Index k = 0; k < a; ++k) kkt = std::max(kkt, coordinate_violation(z0[k], ga[k], w[k]));
      if (kkt <= inner_tol) return;
      if (newton_iterations_ >= config_.newton_max_iter)
        throw NumericalError("proximal Newton iteration cap reached", to_std(gamma_), kkt);

      std::visit([&](const auto& rows) { kernels::weighted_gram(rows, cols, cspan(h_), hess); },
                 problem_.rows);
      hess *= problem_.scale;

      const int budget = config_.cd_max_sweeps - cd_sweeps_;
      if (budget <= 0)
        throw NumericalError("coordinate-descent sweep budget exhausted", to_std(gamma_), kkt);
      QuadraticL1Result qp;
      try {
        qp = solve_quadratic_l1(hess, ga, z0, w, config_.cd_tol, budget);
      } catch (const NumericalError& e) {
        // CD stalls when the model is unbounded along a separating direction; check where it was heading.
        Eigen::VectorXd heading = gamma_;
        for (Index k = 0; k < a; ++k)
          if (cols[k] >= 0) heading[cols[k]] = e.last_iterate()[static_cast<std::size_t>(k)];
        check_free_separation(heading);
        throw;
      }
      cd_sweeps_ += qp.sweeps;

      const Eigen::VectorXd delta = qp.z - z0;
      if (delta.cwiseAbs().maxCoeff() == 0.0) return;
      const double decrease =
          ga.dot(delta) + w.dot(qp.z.cwiseAbs()) - w.dot(z0.cwiseAbs());
      if (!(decrease < 0.0)) return;

      std::visit([&](const auto& rows) {
        kernels::linear_predictor(rows, cols, cspan(delta), mspan(xdelta));
      }, problem_.rows);

      double t = 1.0;
      bool accepted = false;
      Eigen::VectorXd eta_try(m_);
      Eigen::VectorXd gamma_try = gamma_;
      for (int ls = 0; ls < kMaxLineSearch; ++ls) {
        eta_try = eta_ + t * xdelta;
        for (Index k = 0; k < a; ++k)
          if (cols[k] >= 0) gamma_try[cols[k]] = (t == 1.0) ? qp.z[k] : z0[k] + t * delta[k];
        const double f = objective_at(eta_try, gamma_try);
        if (std::isfinite(f) && f <= objective_ + kArmijo * t * decrease) {
          accepted = true;
          objective_ = f;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) return;

      eta_.swap(eta_try);
      gamma_ = gamma_try;
      for (Index k = 0; k < a; ++k)
        if (cols[k] < 0) intercept_ = (t == 1.0) ? qp.z[k] : z0[k] + t * delta[k];
      ++newton_iterations_;
      newton_trace_.push_back(objective_);
    }
  }

  void check_separation() const {
    if (problem_.family != Family::Logistic || m_ == 0) return;
    check_free_separation(gamma_);
    if (d_.cwiseAbs().maxCoeff() < kSeparationResidual)
      throw NumericalError(
          "every observation is fitted exactly: the data are separable and the "
          "minimizer does not exist (increase lambda)",
          to_std(gamma_), 0.0);
  }

  void check_free_separation(const Eigen::VectorXd& gamma) const {
    if (problem_.family != Family::Logistic || m_ == 0) return;
    // If the unpenalized coordinates alone classify every row strictly, scaling
    // them up drives the loss to 0 at no cost: no minimizer exists.
    Eigen::VectorXd free = Eigen::VectorXd::Zero(p_);
    bool any_free = false;
    for (Index j = 0; j < p_; ++j)
      if (weights_[j] == 0.0 && gamma[j] != 0.0) {
        free[j] = gamma[j];
        any_free = true;
      }
    if (any_free) {
      const Eigen::VectorXd eta = linear_predictor(problem_, free, intercept_);
      bool separated = true;
      for (Index r = 0; r < m_ && separated; ++r)
        separated = (labels_[r] > 0.5 ? eta[r] : -eta[r]) > 0.0;
      if (separated)
        throw NumericalError(
            "the unpenalized coordinates separate the data and the minimizer does not "
            "exist (use a positive penalty)",
            to_std(gamma), 0.0);
    }
  }

  FitResult finish(double kkt) {
    FitResult fit;
    fit.gamma = gamma_;
    fit.intercept = intercept_;
    fit.support = support_of(gamma_);
    fit.objective = objective_;
    fit.loss = objective_ - weights_.dot(gamma_.cwiseAbs());
    fit.kkt_residual = kkt;
    fit.newton_trace = std::move(newton_trace_);
    fit.newton_iterations = newton_iterations_;
    fit.cd_sweeps = cd_sweeps_;
    detail::audit_record_weighted_l1(kkt);
    return fit;
  }

  const GlmProblem& problem_;
  const Eigen::VectorXd& weights_;
  const SolverConfig& config_;
  Index m_;
  Index p_;
  const Eigen::VectorXd& labels_;

  Eigen::VectorXd gamma_;
  double intercept_ = 0.0;
  double intercept_grad_ = 0.0;
  Eigen::VectorXd eta_;
  Eigen::VectorXd d_;
  Eigen::VectorXd h_;
  double objective_ = 0.0;
  std::vector<char> active_;
  std::vector<double> newton_trace_;
  int newton_iterations_ = 0;
  int cd_sweeps_ = 0;
};

}  // namespace

void SolverConfig::validate() const {
  if (!(cd_tol > 0.0) || !(lla_tol > 0.0) || !(kkt_tol > 0.0))
    throw InvalidArgument("solver tolerances must be > 0");
  if (cd_max_sweeps < 1 || lla_max_iter < 1 || newton_max_iter < 1)
    throw InvalidArgument("solver iteration caps must be >= 1");
}

QuadraticL1Result solve_quadratic_l1(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad,
                                     const Eigen::VectorXd& z0, const Eigen::VectorXd& weights,
                                     double tol, int max_sweeps, bool record_objective) {
  const Index a = grad.size();
  QuadraticL1Result out;
  out.z = z0;
  Eigen::VectorXd r = grad;  // gradient of the smooth model at z: grad + H (z - z0)
  auto model = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd dz = z - z0;
    return grad.dot(dz) + 0.5 * dz.dot(hessian * dz) + weights.dot(z.cwiseAbs());
  };
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < a; ++j) {
      const double hjj = hessian(j, j);
      if (!(hjj > 0.0)) continue;
      const double zj = out.z[j];
      const double znew = soft_threshold(hjj * zj - r[j], weights[j]) / hjj;
      if (znew == zj) continue;
      const double diff = znew - zj;
      r.noalias() += diff * hessian.col(j);
      out.z[j] = znew;
      max_change = std::max(max_change, std::fabs(diff));
    }
    ++out.sweeps;
    if (record_objective) out.sweep_objective.push_back(model(out.z));
    if (max_change < tol) return out;
  }
  throw NumericalError("coordinate descent did not converge within the sweep budget",
                       to_std(out.z), 0.0);
}

FitResult fit_weighted_l1(const GlmProblem& problem, const Eigen::VectorXd& weights,
                          const SolverConfig& config, const std::optional<WarmStart>& init) {
  config.validate();
  check_weights(problem, weights);
  ProximalNewton solver(problem, weights, config);
  return solver.run(init);
}

FitResult fit_lasso(const GlmProblem& problem, double lambda, const SolverConfig& config,
                    const std::optional<WarmStart>& init) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  const Eigen::VectorXd weights = Eigen::VectorXd::Constant(problem.dim(), lambda);
  return fit_weighted_l1(problem, weights, config, init);
}

FitResult fit_lla(const GlmProblem& problem, const PenaltySpec& penalty, const SolverConfig& config,
                  const std::optional<WarmStart>& init) {
  penalty.validate();
  config.validate();
  if (penalty.kind == PenaltyKind::Lasso)
    throw InvalidArgument("fit_lla needs a SCAD or MCP penalty; use fit_lasso for LASSO");

  WarmStart start;
  if (init) {
    start = *init;
  } else {
    const FitResult lasso = fit_lasso(problem, penalty.lambda, config);
    start = {lasso.gamma, lasso.intercept};
  }
  if (start.gamma.size() != problem.dim()) throw InvalidArgument("warm start has wrong length");

  std::vector<double> trace{penalized_objective(problem, start.gamma, start.intercept, penalty)};
  std::vector<Eigen::VectorXd> weight_trace;
  std::vector<Eigen::VectorXd> iterate_trace;
  Eigen::VectorXd previous = start.gamma;
  double previous_intercept = start.intercept;
  FitResult last;
  bool converged = false;
  int iterations = 0;

  for (int it = 1; it <= config.lla_max_iter; ++it) {
    Eigen::VectorXd w(problem.dim());
    for (Index j = 0; j < w.size(); ++j) w[j] = penalty_deriv(penalty, std::fabs(previous[j]));
    // identical weights give back the previous solution
    if (!weight_trace.empty() && w == weight_trace.back()) {
      converged = true;
      break;
    }
    last = fit_weighted_l1(problem, w, config, WarmStart{previous, previous_intercept});
    ++iterations;
    weight_trace.push_back(std::move(w));
    iterate_trace.push_back(last.gamma);
    trace.push_back(penalized_objective(problem, last.gamma, last.intercept, penalty));
    const double change = (last.gamma - previous).cwiseAbs().maxCoeff();
    previous = last.gamma;
    previous_intercept = last.intercept;
    if (!(change > config.lla_tol)) {
      converged = true;
      break;
    }
  }

  double max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < trace.size(); ++i) max_increase = std::max(max_increase, trace[i] - trace[i - 1]);
  detail::audit_record_lla(max_increase);

  if (!converged)
    throw NumericalError("LLA did not converge within lla_max_iter iterations", to_std(last.gamma),
                         last.kkt_residual, trace);

  last.objective = trace.back();
  last.lla_iterations = iterations;
  last.objective_trace = std::move(trace);
  last.weight_trace = std::move(weight_trace);
  last.iterate_trace = std::move(iterate_trace);
  return last;
}

FitResult fit_penalized(const GlmProblem& problem, const PenaltySpec& penalty,
                        const SolverConfig& config, const std::optional<WarmStart>& init) {
  penalty.validate();
  if (penalty.kind == PenaltyKind::Lasso) return fit_lasso(problem, penalty.lambda, config, init);
  return fit_lla(problem, penalty, config, init);
}

double kkt_residual(const GlmProblem& problem, const Eigen::VectorXd& gamma, double intercept,
                    const Eigen::VectorXd& weights) {
  check_weights(problem, weights);
  const Eigen::VectorXd g = problem_gradient(problem, gamma, intercept);
  double kkt = std::fabs(problem_intercept_gradient(problem, gamma, intercept));
  for (Index j = 0; j < g.size(); ++j) kkt = std::max(kkt, coordinate_violation(gamma[j], g[j], weights[j]));
  return kkt;
}

double penalized_objective(const GlmProblem& problem, const Eigen::VectorXd& gamma, double intercept,
                           const PenaltySpec& penalty) {
  double pen = 0.0;
  for (Index j = 0; j < gamma.size(); ++j) pen += penalty_value(penalty, gamma[j]);
  return problem_loss(problem, gamma, intercept) + pen;
}

double null_intercept(const GlmProblem& problem) {
  if (!problem.intercept) return 0.0;
  const Eigen::VectorXd& y = *problem.labels;
  if (y.size() == 0) throw DataError("empty problem");
  const double mean = y.mean();
  if (problem.family == Family::Gaussian) return mean;
  if (!(mean > 0.0 && mean < 1.0))
    throw DataError("logistic response has a single class; the intercept is unbounded");
  return std::log(mean / (1.0 - mean));
}

double lambda_max(const GlmProblem& problem) {
  if (problem.size() == 0) throw DataError("degenerate design: no informative rows");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(problem.dim());
  const Eigen::VectorXd g = problem_gradient(problem, zero, null_intercept(problem));
  return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
}

std::vector<double> log_grid(double lmax, int n_lambda, double ratio) {
  if (n_lambda < 2) throw InvalidArgument("lambda grid needs at least 2 points");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("lambda ratio must lie in (0, 1)");
  if (!(lmax > 0.0) || !std::isfinite(lmax))
    throw DataError("degenerate design: lambda_max is zero");
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  const double step = std::log(ratio) / static_cast<double>(n_lambda - 1);
  for (int k = 0; k < n_lambda; ++k) grid[static_cast<std::size_t>(k)] = lmax * std::exp(step * k);
  grid.front() = lmax;
  grid.back() = lmax * ratio;
  return grid;
}

std::vector<double> lambda_path(const GlmProblem& problem, int n_lambda, double ratio) {
  if (n_lambda < 2) throw InvalidArgument("lambda grid needs at least 2 points");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("lambda ratio must lie in (0, 1)");
  return log_grid(lambda_max(problem), n_lambda, ratio);
}

}  // namespace pairsel
