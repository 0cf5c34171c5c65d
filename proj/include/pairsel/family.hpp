#pragma once

#include <string_view>

#include "pairsel/penalty.hpp"

namespace pairsel {

/// Canonical-link GLM families: b(eta) = eta^2/2 (Gaussian) or log(1 + e^eta) (Logistic).
enum class Family { Gaussian, Logistic };

std::string_view to_string(Family family);

/// Per-observation negative log-likelihood (up to constants), its first and
/// second derivatives in eta.
inline double unit_loss(Family f, double eta, double y) noexcept {
  if (f == Family::Logistic) return detail::psi_unchecked(eta) - y * eta;
  const double r = y - eta;
  return 0.5 * r * r;
}

inline double unit_deriv(Family f, double eta, double y) noexcept {
  if (f == Family::Logistic) return detail::psi1_unchecked(eta) - y;
  return eta - y;
}

inline double unit_curvature(Family f, double eta) noexcept {
  if (f == Family::Logistic) return detail::psi2_unchecked(eta);
  return 1.0;
}

}  // namespace pairsel
