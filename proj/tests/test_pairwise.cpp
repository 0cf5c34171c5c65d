#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "pairsel/error.hpp"
#include "pairsel/pairwise.hpp"
#include "pairsel/penalty.hpp"
#include "pairsel/table.hpp"
#include "pairsel/testkit/testkit.hpp"
#include "support.hpp"

using namespace pairsel;
using pairsel::test::random_cases;
using pairsel::test::random_vector;

namespace {

const double kLog2 = std::log(2.0);

CompleteCases cases_of(std::vector<double> y, std::vector<std::vector<double>> x) {
  Eigen::VectorXd yy = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Index>(y.size()));
  Eigen::MatrixXd xx(static_cast<Index>(x.size()), static_cast<Index>(x.front().size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x[i].size(); ++j) xx(static_cast<Index>(i), static_cast<Index>(j)) = x[i][j];
  return make_complete_cases(yy, xx);
}

// Single pair with y_i - y_j = 1 and x_i - x_j = (1, 0).
CompleteCases single_pair() { return cases_of({1.0, 0.0}, {{1.0, 0.0}, {0.0, 0.0}}); }

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-8, b.cwiseAbs().maxCoeff());
}

}  // namespace

// ---------------------------------------------------------------------------
// complete-case extraction

TEST(ExtractCompleteCases, DropsRowsWithMissingEntriesInOrder) {
  std::istringstream in("y,a,b\n1,2,3\nNA,1,1\n4,5,6\n7,,8\n9,10,11\n");
  const auto table = read_csv(in);
  const auto cases = extract_complete_cases(table, "y");
  EXPECT_EQ(cases.n(), 3);
  EXPECT_EQ(cases.total_rows, 5);
  EXPECT_EQ(cases.source_rows, (std::vector<Index>{0, 2, 4}));
  EXPECT_EQ(cases.y, Eigen::Vector3d(1, 4, 9));
  EXPECT_EQ(cases.x(1, 1), 6.0);
  EXPECT_EQ(cases.covariate_names, (std::vector<std::string>{"a", "b"}));
}

TEST(ExtractCompleteCases, IdentityWithoutMissingCells) {
  std::istringstream in("a,y\n1,2\n3,4\n5,6\n");
  const auto cases = extract_complete_cases(read_csv(in), "y");
  EXPECT_EQ(cases.n(), 3);
  EXPECT_EQ(cases.total_rows, 3);
  EXPECT_DOUBLE_EQ(cases.observed_fraction(), 1.0);
  EXPECT_EQ(cases.x.col(0), Eigen::Vector3d(1, 3, 5));
}

TEST(ExtractCompleteCases, MissingOnlyInUnusedColumnIsIgnored) {
  std::istringstream in("y,a,b\n1,2,NA\n2,3,4\n");
  const auto cases = extract_complete_cases(read_csv(in), "y", {"a"});
  EXPECT_EQ(cases.n(), 2);
  EXPECT_EQ(cases.p(), 1);
}

TEST(ExtractCompleteCases, MelanomaShape) {
  // 286 subjects, six covariates, two of them with missing cells on 52 rows.
  std::mt19937_64 rng(286);
  std::normal_distribution<double> normal;
  std::ostringstream csv;
  csv << "time,age,sex,thick,ulcer,nodes1,logbreslow\n";
  for (int i = 0; i < 286; ++i) {
    csv << normal(rng) << ',' << normal(rng) << ',' << (i % 2) << ',' << normal(rng) << ',' << (i % 3 == 0);
    const bool miss = i % 11 < 2 && i < 286;  // 2 of every 11 rows
    const bool first = i % 2 == 0;
    csv << ',' << (miss && first ? std::string("NA") : std::to_string(normal(rng)));
    csv << ',' << (miss && !first ? std::string("") : std::to_string(normal(rng))) << '\n';
  }
  std::istringstream in(csv.str());
  const auto cases = extract_complete_cases(read_csv(in), "time");
  EXPECT_EQ(cases.total_rows, 286);
  EXPECT_EQ(cases.n(), 234);
  EXPECT_EQ(cases.p(), 6);
}

TEST(ExtractCompleteCases, ZeroCompleteRowsIsAnError) {
  std::istringstream in("y,a\nNA,1\n2,NA\n");
  EXPECT_THROW(extract_complete_cases(read_csv(in), "y"), DataError);
}

TEST(ExtractCompleteCases, UnknownColumnIsAnError) {
  std::istringstream in("y,a\n1,2\n");
  EXPECT_THROW(extract_complete_cases(read_csv(in), "z"), DataError);
}

TEST(ReadCsv, ParseErrorNamesLineAndColumn) {
  std::istringstream in("y,a\n1,2\n3,abc\n");
  try {
    read_csv(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("'a'"), std::string::npos) << what;
  }
}

TEST(ReadCsv, NaMarkerIsCaseSensitiveAndConfigurable) {
  std::istringstream in1("y,a\n1,na\n");
  EXPECT_THROW(read_csv(in1), DataError);
  std::istringstream in2("y,a\n1,.\n2,3\n");
  CsvOptions opt;
  opt.na_marker = ".";
  const auto t = read_csv(in2, opt);
  EXPECT_FALSE(t.rows[0][1].has_value());
  EXPECT_EQ(*t.rows[1][1], 3.0);
}

TEST(ReadCsv, RoundTripKeepsEveryBit) {
  Table t;
  t.names = {"a", "b"};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 50; ++i) t.rows.push_back({normal(rng) * 1e-7, i % 7 ? std::optional<double>(normal(rng) * 1e9) : std::nullopt});
  t.rows.push_back({0.1, 1.0 / 3.0});
  std::ostringstream out;
  write_csv(out, t);
  std::istringstream in(out.str());
  const auto back = read_csv(in);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(back.rows[i][j], t.rows[i][j]);
  EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
  EXPECT_FALSE(parse_double("1.5x").has_value());
}

TEST(MakeCompleteCases, RejectsNonFiniteAndShapeMismatch) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
  EXPECT_THROW(make_complete_cases(Eigen::Vector3d(1, 2, 3), x), InvalidArgument);
  x(0, 0) = std::nan("");
  EXPECT_THROW(make_complete_cases(Eigen::Vector2d(1, 2), x), DataError);
}

// ---------------------------------------------------------------------------
// design construction

TEST(BuildPairwise, ContinuousDistinctGivesAllPairs) {
  const auto d = build_pairwise(cases_of({3, 1, 2}, {{1}, {2}, {3}}));
  EXPECT_EQ(d.m(), 3);
  EXPECT_DOUBLE_EQ(d.c(), 1.0);
}

TEST(BuildPairwise, BinaryGivesCrossPairsOnly) {
  const auto d = build_pairwise(cases_of({1, 0, 1}, {{1}, {2}, {3}}));
  EXPECT_EQ(d.m(), 2);
  EXPECT_DOUBLE_EQ(d.c(), 2.0 / 3.0);
  const auto cases = random_cases(60, 3, 9, true);
  const Index n1 = static_cast<Index>(cases.y.sum());
  EXPECT_EQ(build_pairwise(cases).m(), n1 * (60 - n1));
}

TEST(BuildPairwise, AllTiedGivesEmptyDesignAndLog2Loss) {
  const auto cases = cases_of({2, 2, 2}, {{1, 0}, {2, 5}, {3, -1}});
  const auto d = build_pairwise(cases);
  EXPECT_EQ(d.m(), 0);
  EXPECT_EQ(d.c(), 0.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto g = random_vector(2, s, 3.0);
    EXPECT_EQ(pairwise_loss(d, g), kLog2);
    EXPECT_EQ(pairwise_gradient(d, g), Eigen::Vector2d::Zero());
  }
  EXPECT_EQ(pairwise_hessian(d, Eigen::Vector2d(1, 1)), Eigen::Matrix2d::Zero());
}

TEST(BuildPairwise, RowsAndLabelsFollowStoredOrientation) {
  const auto cases = random_cases(9, 3, 4);
  const auto d = build_pairwise(cases);
  for (Index k = 0; k < d.m(); ++k) {
    const auto i = d.first()[static_cast<std::size_t>(k)], j = d.second()[static_cast<std::size_t>(k)];
    EXPECT_LT(i, j);
    const double dy = cases.y[i] - cases.y[j];
    const Eigen::VectorXd expected = (cases.x.row(i) - cases.x.row(j)).transpose() * std::fabs(dy);
    EXPECT_LE((d.row(k) - expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(d.u()[k], dy > 0 ? 1.0 : 0.0);
  }
}

TEST(BuildPairwise, RequiresTwoSubjects) {
  EXPECT_THROW(build_pairwise(cases_of({1}, {{1}})), InvalidArgument);
}

// ---------------------------------------------------------------------------
// loss, gradient, Hessian

TEST(PairwiseLoss, Examples) {
  const auto d = build_pairwise(single_pair());
  EXPECT_NEAR(pairwise_loss(d, Eigen::Vector2d(1, 0)), std::log1p(std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(pairwise_loss(d, Eigen::Vector2d(1, 0)), 0.313262, 1e-6);
  const auto r = build_pairwise(random_cases(10, 3, 1));
  EXPECT_NEAR(pairwise_loss(r, Eigen::Vector3d::Zero()), kLog2, 1e-14);  // summation rounding only
}

TEST(PairwiseLoss, DimensionMismatchIsRejected) {
  const auto d = build_pairwise(random_cases(5, 3, 1));
  EXPECT_THROW(pairwise_loss(d, Eigen::Vector2d(1, 0)), InvalidArgument);
  EXPECT_THROW(pairwise_gradient(d, Eigen::VectorXd::Zero(4)), InvalidArgument);
}

TEST(PairwiseLoss, MatchesDirectDoubleLoop) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto cases = random_cases(8, 3, 100 + s, s % 2 == 1);
    const auto d = build_pairwise(cases);
    const auto g = random_vector(3, 200 + s);
    EXPECT_NEAR(pairwise_loss(d, g), testkit::direct_loss(cases, g), 1e-12);
    EXPECT_GT(pairwise_loss(d, g), 0.0);
  }
}

TEST(PairwiseLoss, ReductionIdentity) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto cases = random_cases(4 + static_cast<Index>(s % 9), 1 + static_cast<Index>(s % 5), 300 + s, s % 3 == 0);
    const auto d = build_pairwise(cases);
    const auto g = random_vector(cases.p(), 400 + s, 2.0);
    const double rhs = d.c() * reduced_logistic_loss(d, g) + (1.0 - d.c()) * kLog2;
    EXPECT_NEAR(pairwise_loss(d, g), rhs, 1e-12);
  }
}

TEST(PairwiseGradient, Examples) {
  const auto d = build_pairwise(single_pair());
  const auto g = pairwise_gradient(d, Eigen::Vector2d::Zero());
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_NEAR((testkit::finite_diff_grad(single_pair(), Eigen::Vector2d::Zero(), 1e-5) - g).cwiseAbs().maxCoeff(),
              0.0, 1e-8);

  // At zero the gradient is -(1/2) * 2/(n(n-1)) * sum_{i<j} (y_i - y_j)(x_i - x_j).
  const auto cases = random_cases(8, 3, 2);
  Eigen::Vector3d expected = Eigen::Vector3d::Zero();
  for (Index i = 0; i < 8; ++i)
    for (Index j = i + 1; j < 8; ++j)
      expected -= 0.5 * (2.0 / 56.0) * (cases.y[i] - cases.y[j]) * (cases.x.row(i) - cases.x.row(j)).transpose();
  EXPECT_LE((pairwise_gradient(build_pairwise(cases), Eigen::Vector3d::Zero()) - expected).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(PairwiseGradient, MatchesFiniteDifferencesAndDirectLoop) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto cases = random_cases(8, 3, 500 + s, s % 2 == 0);
    const auto d = build_pairwise(cases);
    const auto g = random_vector(3, 600 + s, 0.5);
    const auto grad = pairwise_gradient(d, g);
    EXPECT_LE(max_rel(grad, testkit::finite_diff_grad(cases, g, 1e-5)), 1e-6);
    EXPECT_LE((grad - testkit::direct_gradient(cases, g)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PairwiseHessian, Examples) {
  const auto h = pairwise_hessian(build_pairwise(single_pair()), Eigen::Vector2d::Zero());
  EXPECT_DOUBLE_EQ(h(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(h(1, 1), 0.0);
}

TEST(PairwiseHessian, MatchesFiniteDifferencesSymmetricPsd) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto cases = random_cases(8, 4, 700 + s, s % 2 == 1);
    const auto d = build_pairwise(cases);
    const auto g = random_vector(4, 800 + s, 0.5);
    const auto h = pairwise_hessian(d, g);
    const auto fd = testkit::finite_diff_jacobian([&](const Eigen::VectorXd& v) { return pairwise_gradient(d, v); },
                                                  g, 1e-5);
    EXPECT_LE((h - fd).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LE((h - testkit::direct_hessian(cases, g)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ(h, h.transpose());
    const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff(), -1e-10);
    const auto v = random_vector(4, 900 + s);
    EXPECT_LE((pairwise_hessian_vector(d, g, v) - h * v).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(PairwiseHessian, BudgetPointsToHessianVectorProducts) {
  const auto d = build_pairwise(random_cases(6, 5, 3));
  try {
    pairwise_hessian(d, Eigen::VectorXd::Zero(5), 24);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("hessian_vector"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(pairwise_hessian(d, Eigen::VectorXd::Zero(5), 25));
}

// ---------------------------------------------------------------------------
// invariances

TEST(PairwiseInvariance, SubjectPermutation) {
  const auto cases = random_cases(11, 3, 17);
  std::vector<Index> perm(11);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  const auto permuted = subset_cases(cases, perm);
  const auto g = random_vector(3, 18);
  EXPECT_NEAR(pairwise_loss(build_pairwise(permuted), g), pairwise_loss(build_pairwise(cases), g), 1e-14);
  EXPECT_LE((pairwise_gradient(build_pairwise(permuted), g) - pairwise_gradient(build_pairwise(cases), g))
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
}

TEST(PairwiseInvariance, OrientationOfAPairDoesNotMatter) {
  // Reversing subject order reverses every stored orientation.
  const auto cases = random_cases(7, 2, 21);
  std::vector<Index> rev(7);
  std::iota(rev.rbegin(), rev.rend(), 0);
  const auto reversed = subset_cases(cases, rev);
  const auto g = random_vector(2, 22);
  const auto a = build_pairwise(cases), b = build_pairwise(reversed);
  EXPECT_NEAR(pairwise_loss(a, g), pairwise_loss(b, g), 1e-14);
  EXPECT_LE((pairwise_hessian(a, g) - pairwise_hessian(b, g)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PairwiseInvariance, TiedSubjectChangesOnlyTheConstants) {
  auto cases = random_cases(8, 2, 31);
  const auto base = build_pairwise(cases);
  Eigen::VectorXd y(9);
  y << cases.y, cases.y[0];
  Eigen::MatrixXd x(9, 2);
  x << cases.x, Eigen::RowVector2d(0.3, -0.7);
  const auto tied = make_complete_cases(y, x);
  const auto d = build_pairwise(tied);
  EXPECT_EQ(d.m(), base.m() + 7);
  const auto g = random_vector(2, 32);
  EXPECT_NEAR(pairwise_loss(d, g), testkit::direct_loss(tied, g), 1e-12);
  // the tied pair contributes log 2 to the sum and nothing to the gradient
  Eigen::VectorXd y2 = tied.y;
  Eigen::MatrixXd x2 = tied.x;
  const auto only_tie = make_complete_cases(Eigen::Vector2d(y2[0], y2[8]),
                                            (Eigen::MatrixXd(2, 2) << x2.row(0), x2.row(8)).finished());
  EXPECT_EQ(build_pairwise(only_tie).m(), 0);
  EXPECT_EQ(pairwise_gradient(build_pairwise(only_tie), g), Eigen::Vector2d::Zero());
}

TEST(PairwiseDesignModes, StreamingMatchesMaterialized) {
  const auto cases = random_cases(40, 4, 41, false);
  PairwiseOptions streaming;
  streaming.materialize_budget = 0;
  const auto a = build_pairwise(cases);
  const auto b = build_pairwise(cases, streaming);
  EXPECT_TRUE(a.materialized());
  EXPECT_FALSE(b.materialized());
  const auto g = random_vector(4, 42);
  EXPECT_EQ(pairwise_loss(a, g), pairwise_loss(b, g));
  EXPECT_EQ(pairwise_gradient(a, g), pairwise_gradient(b, g));
  EXPECT_LE((pairwise_hessian(a, g) - pairwise_hessian(b, g)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PairColumnScales, RootMeanSquareOfPairColumns) {
  const auto cases = random_cases(12, 3, 51);
  const auto d = build_pairwise(cases);
  const auto s = pair_column_scales(d);
  for (Index j = 0; j < 3; ++j) {
    double ss = 0.0;
    for (Index k = 0; k < d.m(); ++k) ss += d.row(k)[j] * d.row(k)[j];
    EXPECT_NEAR(s[j], std::sqrt(ss / static_cast<double>(d.m())), 1e-13);
  }
  auto constant = cases;
  constant.x.col(1).setConstant(2.0);
  EXPECT_THROW(pair_column_scales(build_pairwise(constant)), DataError);
}
