#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "core/runner.hpp"

using namespace semibandit;

namespace {

ExperimentConfig audited_config(NuCase nu_case, long long horizon, int reps) {
  ExperimentConfig cfg;
  cfg.environment.n_arms = 2;
  cfg.environment.dim = 10;
  cfg.environment.mu = default_mu10();
  cfg.environment.sigma = 0.01;
  cfg.environment.nu_case = nu_case;
  cfg.horizon = horizon;
  cfg.replications = reps;
  cfg.base_seed = 7;
  cfg.record_audit = true;
  NamedPolicyConfig semits;
  semits.name = "semits";
  semits.config.kind = PolicyKind::semits;
  semits.config.v = 0.1;
  cfg.policies.push_back(semits);
  return cfg;
}

RunAudit flat_audit(int dim, std::vector<AuditRecord> records) {
  RunAudit audit;
  audit.policy = "semits";
  audit.dim = dim;
  audit.n_arms = 2;
  audit.noise_scale = 0.01;
  audit.delta = 0.1;
  audit.final_min_eigenvalue = 1.0;
  audit.records = std::move(records);
  return audit;
}

}  // namespace

TEST_CASE("confidence width scale") {
  // l(t) = (2R + 6) sqrt(d log(6 t^3 / delta)) + 1
  const double l1 = confidence_width_scale(0.01, 10, 1, 0.1);
  CHECK(l1 == doctest::Approx(6.02 * std::sqrt(10.0 * std::log(60.0)) + 1.0));
  CHECK(confidence_width_scale(0.01, 10, 50, 0.1) > l1);   // grows with t
  CHECK(confidence_width_scale(1.0, 10, 1, 0.1) > l1);     // grows with R
  CHECK_THROWS_AS(confidence_width_scale(0.01, 10, 0, 0.1), Error);
}

TEST_CASE("potential bound on a single round holds trivially") {
  // s_c <= 2 always, and 8 d log(1 + 2/d) >= 4 for every d >= 1
  for (int d : {1, 2, 10}) {
    AuditRecord rec;
    rec.t = 1;
    rec.width_chosen = 2.0;
    rec.log_det_precision = 0.0;
    rec.trace_precision = d;
    const CheckResult out = check_potential_bound(flat_audit(d, {rec}));
    CHECK(out.pass);
  }
}

TEST_CASE("checks pass on a recorded semiparametric run") {
  const ExperimentConfig cfg = audited_config(NuCase::adversarial, 400, 2);
  const ExperimentResult result = run_experiment(cfg);
  REQUIRE(result.audits.size() == 2);
  for (const RunAudit& audit : result.audits) {
    CHECK(audit.records.size() == 400);
    CHECK(check_potential_bound(audit).pass);
    CHECK(check_det_trace(audit).pass);
    const CheckResult coverage = check_coverage(audit, 0.1);
    CHECK(coverage.pass);
    CHECK(audit.final_min_eigenvalue >= 1.0 - 1e-9);
  }
}

TEST_CASE("negative controls trip the checks") {
  SUBCASE("potential bound") {
    // widths of 2 every round eventually dwarf 8 d log(1 + 2T/d)
    std::vector<AuditRecord> records;
    for (int t = 1; t <= 500; ++t) {
      AuditRecord rec;
      rec.t = t;
      rec.width_chosen = 2.0;
      rec.log_det_precision = 0.0;
      rec.trace_precision = 1.0;
      records.push_back(rec);
    }
    const CheckResult out = check_potential_bound(flat_audit(1, records));
    CHECK(!out.pass);
    CHECK(out.lhs == doctest::Approx(2000.0));
  }
  SUBCASE("determinant exceeds the trace bound") {
    AuditRecord rec;
    rec.t = 1;
    rec.log_det_precision = 1.0;  // det = e but trace/d = 1 allows det <= 1
    rec.trace_precision = 2.0;
    const CheckResult out = check_det_trace(flat_audit(2, {rec}));
    CHECK(!out.pass);
  }
  SUBCASE("trace grows faster than 8 per round") {
    AuditRecord rec;
    rec.t = 2;
    rec.log_det_precision = 0.0;
    rec.trace_precision = 2.0 + 8.0 + 0.5;  // d + 8(t-1) + extra
    const CheckResult out = check_det_trace(flat_audit(2, {rec}));
    CHECK(!out.pass);
  }
  SUBCASE("coverage rate above delta") {
    std::vector<AuditRecord> records;
    for (int t = 1; t <= 10; ++t) {
      AuditRecord rec;
      rec.t = t;
      rec.trace_precision = 2.0;
      rec.coverage_violations = t <= 2 ? 1 : 0;  // 20% of rounds
      records.push_back(rec);
    }
    const CheckResult out = check_coverage(flat_audit(2, records), 0.1);
    CHECK(!out.pass);
    CHECK(out.lhs == doctest::Approx(0.2));
  }
}

TEST_CASE("identity state at t = 1 passes det-trace with equality") {
  AuditRecord rec;
  rec.t = 1;
  rec.log_det_precision = 0.0;  // det(I) = 1
  rec.trace_precision = 10.0;   // trace(I_10)
  CHECK(check_det_trace(flat_audit(10, {rec})).pass);
}

TEST_CASE("inflating R widens the band to zero violations") {
  ExperimentConfig cfg = audited_config(NuCase::adversarial, 200, 1);
  cfg.policies[0].config.noise_scale = 1.0;  // 100x the environment noise
  const ExperimentResult result = run_experiment(cfg);
  REQUIRE(result.audits.size() == 1);
  for (const AuditRecord& rec : result.audits[0].records)
    CHECK(rec.coverage_violations == 0);
}

TEST_CASE("audit csv round trip") {
  const ExperimentConfig cfg = audited_config(NuCase::zero, 50, 2);
  const ExperimentResult result = run_experiment(cfg);
  const auto path = std::filesystem::temp_directory_path() / "semibandit_audit.csv";
  write_audit_csv(result.audits, path.string());
  const std::vector<RunAudit> back = read_audit_csv(path.string());
  REQUIRE(back.size() == result.audits.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].policy == result.audits[i].policy);
    CHECK(back[i].replication == result.audits[i].replication);
    CHECK(back[i].dim == result.audits[i].dim);
    CHECK(back[i].final_min_eigenvalue == result.audits[i].final_min_eigenvalue);
    REQUIRE(back[i].records.size() == result.audits[i].records.size());
    for (size_t k = 0; k < back[i].records.size(); ++k) {
      const AuditRecord& a = back[i].records[k];
      const AuditRecord& b = result.audits[i].records[k];
      CHECK(a.t == b.t);
      CHECK(a.width_chosen == b.width_chosen);  // bitwise via %.17g
      CHECK(a.log_det_precision == b.log_det_precision);
      CHECK(a.trace_precision == b.trace_precision);
      CHECK(a.estimate_error == b.estimate_error);
      CHECK(a.coverage_violations == b.coverage_violations);
    }
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_audit_csv(path.string()), Error);
}
