#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace pairsel {

// ---------------------------------------------------------------------------
// Softplus family. psi(t) = log(1 + e^t), psi1 = psi', psi2 = psi''.
// The checked versions reject non-finite input; the *_unchecked forms are
// used inside the hot kernels where inputs are already known to be finite.

namespace detail {

inline double psi_unchecked(double t) noexcept {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double psi1_unchecked(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double psi2_unchecked(double t) noexcept {
  const double e = std::exp(-std::fabs(t));
  const double d = 1.0 + e;
  return e / (d * d);
}

}  // namespace detail

double psi(double t);
double psi1(double t);
double psi2(double t);

// ---------------------------------------------------------------------------
// Penalties, defined through their derivative p'_lambda(t) for t >= 0.

enum class PenaltyKind { Lasso, Scad, Mcp };

inline constexpr double kDefaultScadA = 3.7;
inline constexpr double kDefaultMcpA = 3.0;

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Lasso;
  double lambda = 0.0;
  double a = kDefaultScadA;  // unused for Lasso

  static PenaltySpec lasso(double lambda) { return {PenaltyKind::Lasso, lambda, 0.0}; }
  static PenaltySpec scad(double lambda, double a = kDefaultScadA) {
    return {PenaltyKind::Scad, lambda, a};
  }
  static PenaltySpec mcp(double lambda, double a = kDefaultMcpA) {
    return {PenaltyKind::Mcp, lambda, a};
  }

  /// Throws InvalidArgument when lambda < 0, SCAD a <= 2, or MCP a <= 0.
  void validate() const;
};

/// Default concavity for a family: 3.7 for SCAD, 3 for MCP, 0 for LASSO.
double default_concavity(PenaltyKind kind);

std::string_view to_string(PenaltyKind kind);
/// Accepts "lasso", "scad", "mcp" (case-insensitive).
PenaltyKind parse_penalty_kind(std::string_view name);

/// p'_lambda(t), t >= 0.
double penalty_deriv(const PenaltySpec& spec, double t);

/// p_lambda(|t|), the integral of p'_lambda from 0 to |t|, in closed form.
double penalty_value(const PenaltySpec& spec, double t);

/// q'_lambda(t) = p'_lambda(t) - lambda, t >= 0.
double q_deriv(const PenaltySpec& spec, double t);

/// Lower bound on the slope of q' (zeta_minus): 1/(a-1) for SCAD, 1/a for MCP, 0 for LASSO.
double concavity_bound(const PenaltySpec& spec);

}  // namespace pairsel
