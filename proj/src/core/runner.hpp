#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core/diagnostics.hpp"
#include "core/envsim.hpp"
#include "core/replay.hpp"

namespace semibandit {

struct NamedPolicyConfig {
  std::string name;  // unique label in output files; defaults to the kind
  PolicyConfig config;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  std::vector<NamedPolicyConfig> policies;
  long long horizon = 2000;
  int replications = 30;
  std::uint64_t base_seed = 1;
  std::string output_prefix;  // empty: no files written by the CLI driver
  bool record_audit = false;
  std::string audit_output;  // empty: audits stay in memory

  void validate() const;

  // Parses the documented JSON schema (see README). Unknown keys are
  // rejected; a missing "mu" falls back to default_mu10() when dim == 10.
  static ExperimentConfig from_json_text(const std::string& text);
};

// Parses a single policy object (the "policies" entry schema, standalone).
PolicyConfig policy_config_from_json_text(const std::string& text);

// Parses {"environment": {...}, "bernoulli_rewards": bool}.
SyntheticLogConfig synthetic_log_config_from_json_text(const std::string& text);

struct RegretTrace {
  std::string policy;
  int replication = 0;
  std::vector<double> cumulative;  // R(t) for t = 1..T; R(0) = 0 implicit
};

struct QuantileRow {
  long long t = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0;
};

struct PolicySummary {
  std::string policy;
  double median_final_regret = 0.0;
  std::vector<QuantileRow> quantiles;  // one row per t
};

struct ExperimentResult {
  std::vector<RegretTrace> traces;  // ordered by (policy, replication)
  std::vector<PolicySummary> summaries;
  std::vector<RunAudit> audits;  // regression policies only, when recorded
};

// Seed scheme: one environment stream per replication, shared by every
// policy (common random numbers), and an independent stream per
// (policy, replication) for policy-internal randomness.
std::uint64_t environment_seed(std::uint64_t base_seed, int replication);
std::uint64_t policy_seed(std::uint64_t base_seed, int policy_index,
                          int replication);

// Runs replications * policies independent simulations in a worker pool and
// aggregates per-round regret quantiles. Results are deterministic for a
// given config regardless of scheduling.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct TuneResult {
  double best_value = 0.0;
  double best_median = 0.0;
  std::vector<std::pair<double, double>> table;  // (value, median R(T)) in grid order
};

// Grid search over one exploration parameter ("v" for the TS variants,
// "omega" for bose) of a single-policy config; ties resolve to the smaller
// value.
TuneResult tune_parameter(const ExperimentConfig& config,
                          const std::string& parameter,
                          const std::vector<double>& grid);

// Writes <prefix>_quantiles.csv (t,policy,median,q1,q3) and
// <prefix>_summary.csv (policy,median_RT), 17 significant digits throughout.
void emit_csv(const ExperimentResult& result, const std::string& prefix);
void emit_tune_csv(const TuneResult& result, const std::string& path);

struct ReplayCampaignConfig {
  std::string log_path;
  PolicyConfig policy;
  long long horizon = 5000;
  int runs = 10;
  std::uint64_t base_seed = 1;
};

struct ReplayRunRow {
  int run_id = 0;
  ReplayResult result;
};

// Replays the same log `runs` times with per-run policy seeds.
std::vector<ReplayRunRow> run_replay_campaign(const ReplayCampaignConfig& config);
void emit_replay_csv(const std::vector<ReplayRunRow>& rows,
                     const std::string& path);

// Type-7 quantile (linear interpolation of order statistics).
double quantile_type7(std::vector<double> values, double p);

// Worker pool width: SEMIBANDIT_THREADS when set, hardware concurrency
// otherwise.
int worker_count();

// Runs body(0..n_tasks-1) on the pool; rethrows the first failure.
void parallel_for(int n_tasks, const std::function<void(int)>& body);

}  // namespace semibandit
