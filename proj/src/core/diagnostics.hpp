#pragma once

#include <span>
#include <string>
#include <vector>

#include "core/numkit.hpp"

namespace semibandit {

// Per-round measurements taken at selection time, i.e. against the state
// B(t), mu_hat(t) *before* that round's update.
struct AuditRecord {
  long long t = 0;
  double width_chosen = 0.0;       // s^c_{t,a(t)}: centered width of the pulled arm
  double log_det_precision = 0.0;  // log det B(t)
  double trace_precision = 0.0;    // trace B(t)
  double estimate_error = 0.0;     // ||mu_hat(t) - mu||_2 (simulation only)
  int coverage_violations = 0;     // arms breaching the confidence event at t
};

// One replication's audit trail for a regression-based policy.
struct RunAudit {
  std::string policy;
  int replication = 0;
  int n_arms = 0;
  int dim = 0;
  double noise_scale = 0.0;  // R used for the confidence width
  double delta = 0.1;
  double final_min_eigenvalue = 0.0;  // lambda_min of B after the last round
  std::vector<AuditRecord> records;
};

struct CheckResult {
  bool pass = false;
  double lhs = 0.0;    // observed quantity
  double bound = 0.0;  // asserted bound
  std::string detail;
};

// Confidence width multiplier l(t) = (2R + 6) sqrt(d log(6 t^3 / delta)) + 1.
double confidence_width_scale(double noise_scale, int dim, long long t,
                              double delta);

// Asserts the rescaled elliptical-potential bound
//   sum_t (s^c_{t,a(t)})^2 <= 8 d log(1 + 2T/d),
// which is valid for centered contexts of norm up to 2. The detail string
// additionally reports whether the unrescaled form
//   sum_t s^c_{t,a(t)} <= sqrt(2 d T log(1 + T/d))
// held empirically (not asserted: it presumes unit-norm increments).
CheckResult check_potential_bound(const RunAudit& audit);

// Fraction of rounds where any arm breached
//   |(b_i - b_bar)^T (mu_hat - mu)| <= l(t) s^c_{t,i};
// passes when the rate is at most delta.
CheckResult check_coverage(const RunAudit& audit, double delta);

// Per-round determinant-trace inequality log det B(t) <= d log(trace B(t)/d)
// together with the trace growth bound trace B(t) <= d + 8(t-1).
CheckResult check_det_trace(const RunAudit& audit);

// Side-file round trip. Format: a comment header line followed by
// policy,replication,n_arms,dim,R,delta,final_min_eig,t,s_c,log_det_B,trace_B,est_err,violations
void write_audit_csv(std::span<const RunAudit> audits, const std::string& path);
std::vector<RunAudit> read_audit_csv(const std::string& path);

}  // namespace semibandit
