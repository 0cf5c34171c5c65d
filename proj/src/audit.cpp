#include "pairsel/audit.hpp"

#include <algorithm>
#include <mutex>

namespace pairsel {

namespace {

std::mutex& audit_mutex() {
  static std::mutex m;
  return m;
}

AuditSnapshot& audit_state() {
  static AuditSnapshot state;
  return state;
}

}  // namespace

AuditSnapshot audit_snapshot() {
  std::lock_guard lock(audit_mutex());
  return audit_state();
}

void audit_reset() {
  std::lock_guard lock(audit_mutex());
  audit_state() = AuditSnapshot{};
}

namespace detail {

void audit_record_weighted_l1(double kkt_residual) {
  std::lock_guard lock(audit_mutex());
  auto& s = audit_state();
  ++s.weighted_l1_fits;
  s.max_kkt_residual = std::max(s.max_kkt_residual, kkt_residual);
}

void audit_record_lla(double max_trace_increase) {
  std::lock_guard lock(audit_mutex());
  auto& s = audit_state();
  ++s.lla_fits;
  s.max_trace_increase = std::max(s.max_trace_increase, max_trace_increase);
}

}  // namespace detail

}  // namespace pairsel
