#include "pairsel/penalty.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "pairsel/error.hpp"

namespace pairsel {

namespace {

void require_finite(double t, const char* fn) {
  if (!std::isfinite(t)) throw InvalidArgument(std::string(fn) + ": non-finite argument");
}

void require_nonnegative(double t, const char* fn) {
  if (!(t >= 0.0)) throw InvalidArgument(std::string(fn) + ": argument must be >= 0");
}

}  // namespace

double psi(double t) {
  require_finite(t, "psi");
  return detail::psi_unchecked(t);
}

double psi1(double t) {
  require_finite(t, "psi1");
  return detail::psi1_unchecked(t);
}

double psi2(double t) {
  require_finite(t, "psi2");
  return detail::psi2_unchecked(t);
}

void PenaltySpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("penalty: lambda must be a finite value >= 0");
  if (kind == PenaltyKind::Scad && !(a > 2.0))
    throw InvalidArgument("penalty: SCAD requires a > 2");
  if (kind == PenaltyKind::Mcp && !(a > 0.0))
    throw InvalidArgument("penalty: MCP requires a > 0");
}

double default_concavity(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Scad: return kDefaultScadA;
    case PenaltyKind::Mcp: return kDefaultMcpA;
    case PenaltyKind::Lasso: break;
  }
  return 0.0;
}

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Lasso: return "lasso";
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::Mcp: return "mcp";
  }
  return "unknown";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "lasso") return PenaltyKind::Lasso;
  if (lower == "scad") return PenaltyKind::Scad;
  if (lower == "mcp") return PenaltyKind::Mcp;
  throw InvalidArgument("unknown penalty '" + std::string(name) + "' (expected lasso|scad|mcp)");
}

double penalty_deriv(const PenaltySpec& spec, double t) {
  require_nonnegative(t, "penalty_deriv");
  const double lam = spec.lambda;
  const double a = spec.a;
  switch (spec.kind) {
    case PenaltyKind::Lasso:
      return lam;
    case PenaltyKind::Scad:
      if (t <= lam) return lam;
      return std::max(a * lam - t, 0.0) / (a - 1.0);
    case PenaltyKind::Mcp:
      return std::max(a * lam - t, 0.0) / a;
  }
  return 0.0;
}

double penalty_value(const PenaltySpec& spec, double t) {
  const double x = std::fabs(t);
  const double lam = spec.lambda;
  const double a = spec.a;
  switch (spec.kind) {
    case PenaltyKind::Lasso:
      return lam * x;
    case PenaltyKind::Scad:
      if (x <= lam) return lam * x;
      if (x <= a * lam) return (2.0 * a * lam * x - x * x - lam * lam) / (2.0 * (a - 1.0));
      return 0.5 * (a + 1.0) * lam * lam;
    case PenaltyKind::Mcp:
      if (x <= a * lam) return lam * x - x * x / (2.0 * a);
      return 0.5 * a * lam * lam;
  }
  return 0.0;
}

double q_deriv(const PenaltySpec& spec, double t) {
  require_nonnegative(t, "q_deriv");
  return penalty_deriv(spec, t) - spec.lambda;
}

double concavity_bound(const PenaltySpec& spec) {
  switch (spec.kind) {
    case PenaltyKind::Scad: return 1.0 / (spec.a - 1.0);
    case PenaltyKind::Mcp: return 1.0 / spec.a;
    case PenaltyKind::Lasso: break;
  }
  return 0.0;
}

}  // namespace pairsel
