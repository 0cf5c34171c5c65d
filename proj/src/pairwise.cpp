#include "pairsel/pairwise.hpp"

#include <cmath>
#include <limits>

#include "pairsel/error.hpp"
#include "pairsel/penalty.hpp"

namespace pairsel {

CompleteCases make_complete_cases(Eigen::VectorXd y, Eigen::MatrixXd x) {
  if (y.size() != x.rows())
    throw InvalidArgument("response length " + std::to_string(y.size()) +
                          " does not match covariate rows " + std::to_string(x.rows()));
  if (!y.allFinite() || !x.allFinite()) throw DataError("complete cases must be finite");
  CompleteCases cases;
  cases.y = std::move(y);
  cases.x = std::move(x);
  cases.total_rows = cases.y.size();
  cases.source_rows.resize(static_cast<std::size_t>(cases.y.size()));
  for (Index i = 0; i < cases.y.size(); ++i) cases.source_rows[static_cast<std::size_t>(i)] = i;
  cases.covariate_names.reserve(static_cast<std::size_t>(cases.x.cols()));
  for (Index j = 0; j < cases.x.cols(); ++j) cases.covariate_names.push_back("x" + std::to_string(j + 1));
  return cases;
}

CompleteCases extract_complete_cases(const Table& table, const std::string& response,
                                     const std::vector<std::string>& covariates) {
  const std::size_t yc = table.column_index(response);
  std::vector<std::size_t> xc;
  std::vector<std::string> names;
  if (covariates.empty()) {
    for (std::size_t j = 0; j < table.names.size(); ++j) {
      if (j == yc) continue;
      xc.push_back(j);
      names.push_back(table.names[j]);
    }
  } else {
    for (const auto& name : covariates) {
      const std::size_t j = table.column_index(name);
      if (j == yc) throw InvalidArgument("response column '" + response + "' listed as covariate");
      xc.push_back(j);
      names.push_back(name);
    }
  }
  if (xc.empty()) throw DataError("no covariate columns");

  std::vector<Index> keep;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    bool complete = row[yc].has_value();
    for (std::size_t j : xc) complete = complete && row[j].has_value();
    if (complete) keep.push_back(static_cast<Index>(r));
  }
  if (keep.empty()) throw DataError("no complete cases: every row has a missing value");

  CompleteCases cases;
  const auto n = static_cast<Index>(keep.size());
  cases.y.resize(n);
  cases.x.resize(n, static_cast<Index>(xc.size()));
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];
    cases.y[i] = *row[yc];
    for (std::size_t j = 0; j < xc.size(); ++j) cases.x(i, static_cast<Index>(j)) = *row[xc[j]];
  }
  if (!cases.y.allFinite() || !cases.x.allFinite()) throw DataError("non-finite value in complete cases");
  cases.covariate_names = std::move(names);
  cases.source_rows = std::move(keep);
  cases.total_rows = static_cast<Index>(table.rows.size());
  return cases;
}

CompleteCases subset_cases(const CompleteCases& cases, std::span<const Index> indices) {
  CompleteCases out;
  const auto n = static_cast<Index>(indices.size());
  out.y.resize(n);
  out.x.resize(n, cases.p());
  out.source_rows.resize(indices.size());
  for (Index i = 0; i < n; ++i) {
    const Index src = indices[static_cast<std::size_t>(i)];
    if (src < 0 || src >= cases.n()) throw InvalidArgument("subset index out of range");
    out.y[i] = cases.y[src];
    out.x.row(i) = cases.x.row(src);
    out.source_rows[static_cast<std::size_t>(i)] = cases.source_rows[static_cast<std::size_t>(src)];
  }
  out.covariate_names = cases.covariate_names;
  out.total_rows = n;
  return out;
}

PairwiseDesign build_pairwise(const CompleteCases& cases, const PairwiseOptions& options) {
  const Index n = cases.n();
  const Index p = cases.p();
  if (n < 2) throw InvalidArgument("pairwise design needs at least 2 complete cases, got " + std::to_string(n));
  if (n > static_cast<Index>(std::numeric_limits<std::uint32_t>::max()))
    throw InvalidArgument("too many subjects for 32-bit pair indices");

  auto pairs = std::make_shared<PairRows::Pairs>();
  auto labels = std::make_shared<Eigen::VectorXd>();
  std::vector<double> u;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double dy = cases.y[i] - cases.y[j];
      // exact comparison: responses are data, ties are dropped
      if (cases.y[i] == cases.y[j]) continue;
      pairs->first.push_back(static_cast<std::uint32_t>(i));
      pairs->second.push_back(static_cast<std::uint32_t>(j));
      pairs->scale.push_back(std::fabs(dy));
      u.push_back(dy > 0.0 ? 1.0 : 0.0);
    }
  }
  const auto m = static_cast<Index>(u.size());
  *labels = Eigen::Map<const Eigen::VectorXd>(u.data(), m);

  PairwiseDesign design;
  design.n_ = n;
  design.m_ = m;
  design.p_ = p;
  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  design.c_ = static_cast<double>(m) / total_pairs;

  auto xr = std::make_shared<const RowMatrix>(cases.x);
  GlmProblem& problem = design.problem_;
  problem.family = Family::Logistic;
  problem.labels = labels;
  problem.intercept = false;
  problem.scale = 1.0 / total_pairs;
  problem.offset = (1.0 - design.c_) * std::log(2.0);

  const auto entries = static_cast<std::int64_t>(m) * static_cast<std::int64_t>(p);
  if (entries <= options.materialize_budget) {
    auto v = std::make_shared<RowMatrix>(m, p);
    const PairRows gen(xr, pairs);
    std::vector<Index> cols(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) cols[static_cast<std::size_t>(j)] = j;
    for (Index k = 0; k < m; ++k) gen.gather(k, cols, v->data() + k * p);
    problem.rows = DenseRows(std::move(v));
  } else {
    problem.rows = PairRows(xr, pairs);
  }
  design.pairs_ = std::move(pairs);
  return design;
}

Eigen::VectorXd PairwiseDesign::row(Index k) const {
  if (k < 0 || k >= m_) throw InvalidArgument("pair index out of range");
  Eigen::VectorXd v(p_);
  std::visit([&](const auto& rows) {
    for (Index j = 0; j < p_; ++j) v[j] = rows.value(k, j);
  }, problem_.rows);
  return v;
}

Eigen::VectorXd pair_column_scales(const PairwiseDesign& design) {
  if (design.m() == 0) throw DataError("no pairs with distinct responses");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(design.p());
  std::visit([&](const auto& rows) {
    for (Index k = 0; k < design.m(); ++k)
      for (Index j = 0; j < design.p(); ++j) {
        const double v = rows.value(k, j);
        s[j] += v * v;
      }
  }, design.problem().rows);
  s = (s / static_cast<double>(design.m())).cwiseSqrt();
  for (Index j = 0; j < s.size(); ++j)
    if (!(s[j] > 0.0)) throw DataError("covariate " + std::to_string(j + 1) + " is constant over all pairs");
  return s;
}

double pairwise_loss(const PairwiseDesign& design, const Eigen::VectorXd& gamma) {
  return problem_loss(design.problem(), gamma);
}

double reduced_logistic_loss(const PairwiseDesign& design, const Eigen::VectorXd& gamma) {
  if (gamma.size() != design.p()) throw InvalidArgument("gamma has wrong length");
  if (design.m() == 0) return std::log(2.0);
  const Eigen::VectorXd eta = linear_predictor(design.problem(), gamma);
  double s = 0.0;
  for (Index k = 0; k < design.m(); ++k) {
    const double w = design.u()[k] > 0.5 ? -1.0 : 1.0;
    s += detail::psi_unchecked(w * eta[k]);
  }
  return s / static_cast<double>(design.m());
}

Eigen::VectorXd pairwise_gradient(const PairwiseDesign& design, const Eigen::VectorXd& gamma) {
  return problem_gradient(design.problem(), gamma);
}

Eigen::MatrixXd pairwise_hessian(const PairwiseDesign& design, const Eigen::VectorXd& gamma,
                                 std::int64_t max_entries) {
  const auto entries = static_cast<std::int64_t>(design.p()) * design.p();
  if (entries > max_entries)
    throw InvalidArgument("Hessian of dimension " + std::to_string(design.p()) +
                          " exceeds the materialization budget; use pairwise_hessian_vector");
  Eigen::MatrixXd h = problem_hessian(design.problem(), gamma);
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd pairwise_hessian_vector(const PairwiseDesign& design, const Eigen::VectorXd& gamma,
                                        const Eigen::VectorXd& v) {
  return problem_hessian_vector(design.problem(), gamma, v);
}

}  // namespace pairsel
