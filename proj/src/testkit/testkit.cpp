#include "pairsel/testkit/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pairsel/error.hpp"

namespace pairsel::testkit {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

/// Calls visit(dy, dx) for every pair i < j.
template <class F>
void for_each_pair(const CompleteCases& cases, F&& visit) {
  Eigen::VectorXd dx(cases.p());
  for (Index i = 0; i < cases.n(); ++i)
    for (Index j = i + 1; j < cases.n(); ++j) {
      dx = (cases.x.row(i) - cases.x.row(j)).transpose();
      visit(cases.y[i] - cases.y[j], dx);
    }
}

double pair_count(const CompleteCases& cases) {
  if (cases.n() < 2) throw InvalidArgument("need at least 2 subjects");
  return 0.5 * static_cast<double>(cases.n()) * static_cast<double>(cases.n() - 1);
}

Eigen::VectorXd restrict(const Eigen::VectorXd& v, const std::vector<Index>& s) {
  Eigen::VectorXd out(static_cast<Index>(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) out[static_cast<Index>(k)] = v[s[k]];
  return out;
}

}  // namespace

double direct_loss(const CompleteCases& cases, const Eigen::VectorXd& gamma) {
  const double pairs = pair_count(cases);
  double s = 0.0;
  for_each_pair(cases, [&](double dy, const Eigen::VectorXd& dx) { s += softplus(-dy * dx.dot(gamma)); });
  return s / pairs;
}

Eigen::VectorXd direct_gradient(const CompleteCases& cases, const Eigen::VectorXd& gamma) {
  const double pairs = pair_count(cases);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(cases.p());
  for_each_pair(cases, [&](double dy, const Eigen::VectorXd& dx) {
    g -= dy * sigmoid(-dy * dx.dot(gamma)) * dx;
  });
  return g / pairs;
}

Eigen::MatrixXd direct_hessian(const CompleteCases& cases, const Eigen::VectorXd& gamma) {
  const double pairs = pair_count(cases);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(cases.p(), cases.p());
  for_each_pair(cases, [&](double dy, const Eigen::VectorXd& dx) {
    const double s = sigmoid(dy * dx.dot(gamma));
    h.noalias() += (dy * dy * s * (1.0 - s)) * dx * dx.transpose();
  });
  return h / pairs;
}

Eigen::VectorXd finite_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& gamma, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be > 0");
  Eigen::VectorXd g(gamma.size());
  Eigen::VectorXd x = gamma;
  for (Index j = 0; j < gamma.size(); ++j) {
    x[j] = gamma[j] + h;
    const double up = f(x);
    x[j] = gamma[j] - h;
    const double down = f(x);
    x[j] = gamma[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::VectorXd finite_diff_grad(const CompleteCases& cases, const Eigen::VectorXd& gamma, double h) {
  return finite_diff_grad([&](const Eigen::VectorXd& v) { return direct_loss(cases, v); }, gamma, h);
}

Eigen::MatrixXd finite_diff_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                                     const Eigen::VectorXd& gamma, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be > 0");
  Eigen::MatrixXd jac(gamma.size(), gamma.size());
  Eigen::VectorXd x = gamma;
  for (Index j = 0; j < gamma.size(); ++j) {
    x[j] = gamma[j] + h;
    const Eigen::VectorXd up = g(x);
    x[j] = gamma[j] - h;
    const Eigen::VectorXd down = g(x);
    x[j] = gamma[j];
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

OracleFit oracle_fit(const CompleteCases& cases, const std::vector<Index>& support) {
  const Index p = cases.p();
  std::vector<Index> s = support;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw InvalidArgument("support has duplicates");
  for (Index j : s)
    if (j < 0 || j >= p) throw InvalidArgument("support index out of range");

  OracleFit out;
  out.support = s;
  out.gamma_restricted = Eigen::VectorXd::Zero(p);
  double loss = direct_loss(cases, out.gamma_restricted);
  constexpr double kGradTol = 1e-10;
  constexpr int kMaxIter = 100;
  for (int it = 0; !s.empty(); ++it) {
    const Eigen::VectorXd g = restrict(direct_gradient(cases, out.gamma_restricted), s);
    if (g.lpNorm<Eigen::Infinity>() <= kGradTol) break;
    if (it == kMaxIter) throw NumericalError("oracle Newton iteration did not converge");
    const Eigen::MatrixXd full = direct_hessian(cases, out.gamma_restricted);
    Eigen::MatrixXd hs(static_cast<Index>(s.size()), static_cast<Index>(s.size()));
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = 0; b < s.size(); ++b) hs(static_cast<Index>(a), static_cast<Index>(b)) = full(s[a], s[b]);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hs);
    const double dmin = ldlt.vectorD().minCoeff();
    const double dmax = ldlt.vectorD().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(dmin > 1e-14 * std::max(dmax, 1.0)))
      throw NumericalError("restricted Hessian is singular");
    const Eigen::VectorXd step = ldlt.solve(g);
    double t = 1.0;
    for (;;) {
      Eigen::VectorXd trial = out.gamma_restricted;
      for (std::size_t k = 0; k < s.size(); ++k) trial[s[k]] -= t * step[static_cast<Index>(k)];
      const double trial_loss = direct_loss(cases, trial);
      // near the minimum the decrease drops below the rounding of an O(n^2)-term sum
      if (trial_loss <= loss + 1e-12 * (1.0 + loss)) {
        out.gamma_restricted = trial;
        loss = trial_loss;
        break;
      }
      t *= 0.5;
      if (t < 1e-12) throw NumericalError("oracle line search failed");
    }
  }
  if (!s.empty()) {
    // Every untied pair strictly ordered means the loss keeps falling along gamma: no finite minimizer.
    bool separated = true, informative = false;
    for_each_pair(cases, [&](double dy, const Eigen::VectorXd& dx) {
      if (dy == 0.0) return;
      informative = true;
      if (dy * dx.dot(out.gamma_restricted) <= 0.0) separated = false;
    });
    if (informative && separated) throw NumericalError("support separates every pair; no finite oracle fit");
  }
  out.loss_value = loss;
  out.objective = loss;
  return out;
}

OracleFit exhaustive_best_subset(const CompleteCases& cases, const PenaltySpec& penalty, Index max_size) {
  penalty.validate();
  const Index p = cases.p();
  if (p > kMaxEnumerationDim)
    throw InvalidArgument("exhaustive enumeration is limited to p <= " + std::to_string(kMaxEnumerationDim));
  OracleFit best;
  bool found = false;
  for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
    std::vector<Index> s;
    for (Index j = 0; j < p; ++j)
      if (mask & (1u << j)) s.push_back(j);
    if (static_cast<Index>(s.size()) > max_size) continue;
    OracleFit fit;
    try {
      fit = oracle_fit(cases, s);
    } catch (const NumericalError&) {
      continue;
    }
    double pen = 0.0;
    for (Index j = 0; j < p; ++j) pen += penalty_value(penalty, fit.gamma_restricted[j]);
    fit.objective = fit.loss_value + pen;
    const bool better = !found || fit.objective < best.objective ||
                        (fit.objective == best.objective &&
                         std::lexicographical_compare(s.begin(), s.end(), best.support.begin(), best.support.end()));
    if (better) {
      best = std::move(fit);
      found = true;
    }
  }
  if (!found) throw NumericalError("no support admitted an oracle fit");
  return best;
}

}  // namespace pairsel::testkit
