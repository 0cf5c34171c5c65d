#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "pairsel/error.hpp"
#include "pairsel/penalty.hpp"

using namespace pairsel;

namespace {

// Adaptive Simpson quadrature, used as an oracle for the closed-form penalty values.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-13, 50);
}

double quadrature_value(const PenaltySpec& spec, double t) {
  // split at the breakpoints so the integrand is smooth on each piece
  const double l = spec.lambda, al = spec.a * spec.lambda;
  auto f = [&](double s) { return penalty_deriv(spec, s); };
  double total = 0.0, lo = 0.0;
  for (double bp : {l, al, std::fabs(t)}) {
    const double hi = std::min(bp, std::fabs(t));
    if (hi > lo) {
      total += integrate(f, lo, hi);
      lo = hi;
    }
  }
  return total;
}

}  // namespace

TEST(Psi, ValuesAtZero) {
  EXPECT_NEAR(psi(0.0), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(psi1(0.0), 0.5);
  EXPECT_DOUBLE_EQ(psi2(0.0), 0.25);
}

TEST(Psi, StableAtLargeArguments) {
  EXPECT_NEAR(psi(40.0), 40.0, 1e-12);
  EXPECT_NEAR(psi(700.0), 700.0, 1e-12);
  EXPECT_GE(psi(-700.0), 0.0);
  EXPECT_LT(psi(-700.0), 1e-300);
  EXPECT_TRUE(std::isfinite(psi2(700.0)));
  EXPECT_GT(psi1(-700.0), -1e-300);
  EXPECT_LE(psi1(700.0), 1.0);
}

TEST(Psi, RejectsNonFinite) {
  EXPECT_THROW(psi(std::numeric_limits<double>::infinity()), InvalidArgument);
  EXPECT_THROW(psi1(std::nan("")), InvalidArgument);
  EXPECT_THROW(psi2(-std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST(Psi, CurvatureAndThirdDerivativeBounds) {
  const double h = 1e-4;
  for (double t = -50.0; t <= 50.0; t += 0.01) {
    EXPECT_GT(psi2(t), 0.0 - 1e-300);
    EXPECT_LE(psi2(t), 0.25);
    const double third = (psi2(t + h) - psi2(t - h)) / (2 * h);
    EXPECT_LE(std::fabs(third), 0.1 + 1e-6) << "t=" << t;
  }
}

TEST(Psi, DerivativesMatchFiniteDifferences) {
  const double h = 1e-5;
  for (double t = -20.0; t <= 20.0; t += 0.37) {
    EXPECT_NEAR((psi(t + h) - psi(t - h)) / (2 * h), psi1(t), 1e-9);
    EXPECT_NEAR((psi1(t + h) - psi1(t - h)) / (2 * h), psi2(t), 1e-9);
  }
}

TEST(PenaltyDeriv, PublishedExamples) {
  EXPECT_DOUBLE_EQ(penalty_deriv(PenaltySpec::scad(1.0, 3.7), 0.5), 1.0);
  EXPECT_DOUBLE_EQ(penalty_deriv(PenaltySpec::mcp(1.0, 3.0), 3.0), 0.0);
  EXPECT_NEAR(penalty_deriv(PenaltySpec::scad(1.0, 3.7), 2.0), 1.7 / 2.7, 1e-15);
  EXPECT_NEAR(penalty_deriv(PenaltySpec::scad(1.0, 3.7), 2.0), 0.629630, 1e-6);
  EXPECT_DOUBLE_EQ(penalty_deriv(PenaltySpec::lasso(0.7), 12.0), 0.7);
}

TEST(PenaltyDeriv, RejectsNegativeArgument) {
  EXPECT_THROW(penalty_deriv(PenaltySpec::scad(1.0), -0.1), InvalidArgument);
  EXPECT_THROW(q_deriv(PenaltySpec::mcp(1.0), -1.0), InvalidArgument);
}

TEST(PenaltyDeriv, NonnegativeNonincreasingAndZeroBeyondALambda) {
  for (const auto& spec : {PenaltySpec::scad(0.8, 3.7), PenaltySpec::mcp(0.8, 3.0), PenaltySpec::scad(2.0, 2.5)}) {
    double prev = penalty_deriv(spec, 0.0);
    for (double t = 0.0; t <= 10.0; t += 0.01) {
      const double d = penalty_deriv(spec, t);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, prev + 1e-15);
      if (t >= spec.a * spec.lambda) {
        EXPECT_EQ(d, 0.0);
      }
      prev = d;
    }
  }
}

TEST(PenaltySpecTest, Validation) {
  EXPECT_THROW(PenaltySpec::lasso(-1.0).validate(), InvalidArgument);
  EXPECT_THROW(PenaltySpec::scad(1.0, 2.0).validate(), InvalidArgument);
  EXPECT_THROW(PenaltySpec::mcp(1.0, 0.0).validate(), InvalidArgument);
  EXPECT_NO_THROW(PenaltySpec::scad(0.0, 2.01).validate());
  EXPECT_NO_THROW(PenaltySpec::mcp(1.0, 0.5).validate());
  EXPECT_DOUBLE_EQ(default_concavity(PenaltyKind::Scad), 3.7);
  EXPECT_DOUBLE_EQ(default_concavity(PenaltyKind::Mcp), 3.0);
}

TEST(PenaltySpecTest, ParseKind) {
  EXPECT_EQ(parse_penalty_kind("SCAD"), PenaltyKind::Scad);
  EXPECT_EQ(parse_penalty_kind("mcp"), PenaltyKind::Mcp);
  EXPECT_EQ(parse_penalty_kind("Lasso"), PenaltyKind::Lasso);
  EXPECT_THROW(parse_penalty_kind("ridge"), InvalidArgument);
}

TEST(PenaltyValue, PublishedExamples) {
  EXPECT_DOUBLE_EQ(penalty_value(PenaltySpec::lasso(2.0), 1.5), 3.0);
  EXPECT_NEAR(penalty_value(PenaltySpec::mcp(1.0, 3.0), 5.0), 1.5, 1e-15);
  EXPECT_NEAR(penalty_value(PenaltySpec::scad(1.0, 3.7), 10.0), 2.35, 1e-15);
  EXPECT_NEAR(quadrature_value(PenaltySpec::mcp(1.0, 3.0), 5.0), 1.5, 1e-10);
  EXPECT_NEAR(quadrature_value(PenaltySpec::scad(1.0, 3.7), 10.0), 2.35, 1e-10);
}

TEST(PenaltyValue, MatchesQuadratureSymmetricAndZeroAtOrigin) {
  for (const auto& spec : {PenaltySpec::lasso(0.6), PenaltySpec::scad(0.6, 3.7), PenaltySpec::mcp(0.6, 3.0),
                           PenaltySpec::scad(1.3, 2.2), PenaltySpec::mcp(1.3, 0.7)}) {
    EXPECT_EQ(penalty_value(spec, 0.0), 0.0);
    for (double t = 0.013; t <= 6.0; t += 0.117) {
      EXPECT_NEAR(penalty_value(spec, t), quadrature_value(spec, t), 1e-10) << to_string(spec.kind) << " t=" << t;
      EXPECT_EQ(penalty_value(spec, t), penalty_value(spec, -t));
    }
  }
}

TEST(PenaltyValue, DerivativeMatchesFiniteDifferences) {
  const double h = 1e-6;
  for (const auto& spec : {PenaltySpec::lasso(0.6), PenaltySpec::scad(0.6, 3.7), PenaltySpec::mcp(0.6, 3.0)}) {
    for (double t = 0.05; t <= 4.0; t += 0.0731) {
      const double fd = (penalty_value(spec, t + h) - penalty_value(spec, t - h)) / (2 * h);
      const double d = penalty_deriv(spec, t);
      if (d == 0.0) {
        EXPECT_NEAR(fd, 0.0, 1e-8);
      } else {
        EXPECT_LE(std::fabs(fd - d) / d, 1e-6) << to_string(spec.kind) << " t=" << t;
      }
    }
  }
}

TEST(QDeriv, Examples) {
  EXPECT_EQ(q_deriv(PenaltySpec::lasso(0.4), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(q_deriv(PenaltySpec::mcp(1.0, 3.0), 3.0), -1.0);
  const auto scad = PenaltySpec::scad(1.0, 3.7);
  const double slope = (q_deriv(scad, 2.5) - q_deriv(scad, 1.5)) / 1.0;
  EXPECT_NEAR(slope, -1.0 / 2.7, 1e-12);
  EXPECT_NEAR(slope, -0.370370, 1e-6);
}

TEST(QDeriv, AssumptionsOnGrid) {
  for (const auto& spec : {PenaltySpec::scad(0.9, 3.7), PenaltySpec::mcp(0.9, 3.0), PenaltySpec::lasso(0.9)}) {
    const double zeta = concavity_bound(spec);
    EXPECT_EQ(q_deriv(spec, 0.0), 0.0);
    double prev_t = 0.0, prev = 0.0;
    for (double t = 0.01; t <= 8.0; t += 0.01) {
      const double q = q_deriv(spec, t);
      EXPECT_LE(std::fabs(q), spec.lambda + 1e-15);
      EXPECT_LE(q, prev + 1e-15);
      EXPECT_GE((q - prev) / (t - prev_t), -zeta - 1e-9);
      prev_t = t;
      prev = q;
    }
  }
  EXPECT_NEAR(concavity_bound(PenaltySpec::scad(1.0, 3.7)), 1.0 / 2.7, 1e-15);
  EXPECT_NEAR(concavity_bound(PenaltySpec::mcp(1.0, 3.0)), 1.0 / 3.0, 1e-15);
}
