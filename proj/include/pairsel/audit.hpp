#pragma once

#include <cstdint>
#include <limits>

namespace pairsel {

/// Process-wide tallies of solver certificates, so that a test run can assert
/// properties over every fit it triggered.
struct AuditSnapshot {
  std::int64_t weighted_l1_fits = 0;
  double max_kkt_residual = 0.0;
  std::int64_t lla_fits = 0;
  double max_trace_increase = -std::numeric_limits<double>::infinity();  // largest objective_trace[i] - objective_trace[i-1]
};

AuditSnapshot audit_snapshot();
void audit_reset();

namespace detail {
void audit_record_weighted_l1(double kkt_residual);
void audit_record_lla(double max_trace_increase);
}  // namespace detail

}  // namespace pairsel
