#include "semibandit/semibandit.h"

#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "core/runner.hpp"
#include "core/textio.hpp"

using namespace semibandit;

// The pending round keeps what sb_policy_observe needs to complete the
// update; a new select (or a discard) replaces it.
struct sb_policy {
  std::unique_ptr<Policy> impl;
  std::optional<ContextSet> pending_contexts;
  std::optional<SelectResult> pending_select;
};

namespace {

thread_local std::string g_last_error;

sb_status status_from(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return SB_ERROR_INVALID_ARGUMENT;
    case ErrorCode::parse_error: return SB_ERROR_PARSE;
    case ErrorCode::io_error: return SB_ERROR_IO;
    case ErrorCode::numeric_error: return SB_ERROR_NUMERIC;
    case ErrorCode::unsupported: return SB_ERROR_UNSUPPORTED;
  }
  return SB_ERROR_INTERNAL;
}

template <typename Fn>
sb_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SB_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SB_ERROR_INTERNAL;
  }
}

void require_arg(bool ok, const char* message) {
  require(ok, ErrorCode::invalid_argument, message);
}

void copy_to_buffer(const std::string& text, char* out, size_t cap) {
  if (out == nullptr || cap == 0) return;
  const size_t n = std::min(text.size(), cap - 1);
  std::memcpy(out, text.data(), n);
  out[n] = '\0';
}

}  // namespace

extern "C" {

const char* sb_version(void) { return "semibandit 1.0.0"; }

const char* sb_status_name(sb_status status) {
  switch (status) {
    case SB_OK: return "SB_OK";
    case SB_ERROR_INVALID_ARGUMENT: return "SB_ERROR_INVALID_ARGUMENT";
    case SB_ERROR_PARSE: return "SB_ERROR_PARSE";
    case SB_ERROR_IO: return "SB_ERROR_IO";
    case SB_ERROR_NUMERIC: return "SB_ERROR_NUMERIC";
    case SB_ERROR_UNSUPPORTED: return "SB_ERROR_UNSUPPORTED";
    case SB_ERROR_INTERNAL: return "SB_ERROR_INTERNAL";
  }
  return "SB_ERROR_INTERNAL";
}

const char* sb_last_error(void) { return g_last_error.c_str(); }

sb_status sb_policy_create(const char* config_json, int n_arms, int dim,
                           uint64_t seed, sb_policy** out_policy) {
  return guarded([&] {
    require_arg(config_json != nullptr, "sb_policy_create: null config");
    require_arg(out_policy != nullptr, "sb_policy_create: null out_policy");
    const PolicyConfig cfg = policy_config_from_json_text(config_json);
    auto handle = std::make_unique<sb_policy>();
    handle->impl = make_policy(cfg, n_arms, dim, seed);
    *out_policy = handle.release();
  });
}

void sb_policy_destroy(sb_policy* policy) { delete policy; }

sb_status sb_policy_select(sb_policy* policy, const double* contexts,
                           int* out_arm, double* out_probs) {
  return guarded([&] {
    require_arg(policy != nullptr, "sb_policy_select: null policy");
    require_arg(contexts != nullptr, "sb_policy_select: null contexts");
    require_arg(out_arm != nullptr, "sb_policy_select: null out_arm");
    ContextSet ctx = ContextSet::from_flat(policy->impl->n_arms(),
                                           policy->impl->dim(), contexts);
    SelectResult sel = policy->impl->select(ctx);
    *out_arm = sel.arm + 1;
    if (out_probs != nullptr) {
      for (int i = 0; i < policy->impl->n_arms(); ++i)
        out_probs[i] = sel.dist.probs[i];
    }
    policy->pending_contexts = std::move(ctx);
    policy->pending_select = std::move(sel);
  });
}

sb_status sb_policy_observe(sb_policy* policy, double reward) {
  return guarded([&] {
    require_arg(policy != nullptr, "sb_policy_observe: null policy");
    require_arg(policy->pending_select.has_value(),
                "sb_policy_observe: no pending selection");
    policy->impl->update(*policy->pending_contexts, *policy->pending_select,
                         reward);
    policy->pending_contexts.reset();
    policy->pending_select.reset();
  });
}

sb_status sb_policy_discard(sb_policy* policy) {
  return guarded([&] {
    require_arg(policy != nullptr, "sb_policy_discard: null policy");
    policy->pending_contexts.reset();
    policy->pending_select.reset();
  });
}

sb_status sb_policy_estimate(const sb_policy* policy, double* out_estimate) {
  return guarded([&] {
    require_arg(policy != nullptr, "sb_policy_estimate: null policy");
    require_arg(out_estimate != nullptr, "sb_policy_estimate: null output");
    const Vec estimate = policy->impl->estimate();
    for (Eigen::Index i = 0; i < estimate.size(); ++i)
      out_estimate[i] = estimate[i];
  });
}

sb_status sb_simulate(const char* config_json, char* summary_out,
                      size_t summary_cap) {
  return guarded([&] {
    require_arg(config_json != nullptr, "sb_simulate: null config");
    const ExperimentConfig cfg = ExperimentConfig::from_json_text(config_json);
    require(!cfg.output_prefix.empty(), ErrorCode::invalid_argument,
            "sb_simulate: config must set 'output'");
    const ExperimentResult result = run_experiment(cfg);
    emit_csv(result, cfg.output_prefix);
    std::ostringstream summary;
    summary << "policy,median_RT\n";
    for (const PolicySummary& s : result.summaries)
      summary << s.policy << ',' << format_g17(s.median_final_regret) << '\n';
    copy_to_buffer(summary.str(), summary_out, summary_cap);
  });
}

sb_status sb_tune(const char* config_json, const char* parameter,
                  const char* grid_csv, const char* out_csv, double* out_best) {
  return guarded([&] {
    require_arg(config_json != nullptr, "sb_tune: null config");
    require_arg(parameter != nullptr, "sb_tune: null parameter");
    require_arg(grid_csv != nullptr, "sb_tune: null grid");
    require_arg(out_best != nullptr, "sb_tune: null out_best");
    const ExperimentConfig cfg = ExperimentConfig::from_json_text(config_json);
    std::vector<double> grid;
    std::stringstream ss(grid_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      require(!item.empty(), ErrorCode::parse_error,
              "sb_tune: empty grid entry");
      size_t pos = 0;
      double value = 0.0;
      try {
        value = std::stod(item, &pos);
      } catch (const std::exception&) {
        fail(ErrorCode::parse_error, "sb_tune: bad grid value '" + item + "'");
      }
      require(pos == item.size(), ErrorCode::parse_error,
              "sb_tune: bad grid value '" + item + "'");
      grid.push_back(value);
    }
    const TuneResult result = tune_parameter(cfg, parameter, grid);
    if (out_csv != nullptr) emit_tune_csv(result, out_csv);
    *out_best = result.best_value;
  });
}

sb_status sb_replay(const char* log_path, const char* policy_json,
                    long long horizon, int runs, uint64_t seed,
                    const char* out_csv, char* summary_out,
                    size_t summary_cap) {
  return guarded([&] {
    require_arg(log_path != nullptr, "sb_replay: null log path");
    require_arg(policy_json != nullptr, "sb_replay: null policy config");
    ReplayCampaignConfig cfg;
    cfg.log_path = log_path;
    cfg.policy = policy_config_from_json_text(policy_json);
    cfg.horizon = horizon;
    cfg.runs = runs;
    cfg.base_seed = seed;
    const std::vector<ReplayRunRow> rows = run_replay_campaign(cfg);
    if (out_csv != nullptr) emit_replay_csv(rows, out_csv);
    std::vector<double> rewards;
    long long truncated = 0;
    double matched_total = 0.0, consumed_total = 0.0;
    for (const ReplayRunRow& row : rows) {
      rewards.push_back(row.result.total_reward);
      matched_total += static_cast<double>(row.result.matched);
      consumed_total += static_cast<double>(row.result.events_consumed);
      if (row.result.truncated) ++truncated;
    }
    std::ostringstream summary;
    summary << "runs=" << rows.size()
            << " G_hat_mean=" << format_g17(
                   std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                   static_cast<double>(rewards.size()))
            << " G_hat_q1=" << format_g17(quantile_type7(rewards, 0.25))
            << " G_hat_q3=" << format_g17(quantile_type7(rewards, 0.75))
            << " matched_mean=" << matched_total / static_cast<double>(rows.size())
            << " consumed_mean=" << consumed_total / static_cast<double>(rows.size())
            << " truncated_runs=" << truncated;
    copy_to_buffer(summary.str(), summary_out, summary_cap);
  });
}

sb_status sb_gen_log(const char* config_json, long long length, uint64_t seed,
                     const char* out_path) {
  return guarded([&] {
    require_arg(config_json != nullptr, "sb_gen_log: null config");
    require_arg(out_path != nullptr, "sb_gen_log: null output path");
    const SyntheticLogConfig cfg =
        synthetic_log_config_from_json_text(config_json);
    std::ofstream out(out_path);
    require(out.good(), ErrorCode::io_error,
            std::string("cannot open for writing: ") + out_path);
    Rng rng(seed);
    LogWriter writer(out);
    gen_synthetic_log(cfg, length, rng, writer);
    require(out.good(), ErrorCode::io_error,
            std::string("write failed: ") + out_path);
  });
}

sb_status sb_audit(const char* audit_csv_path, char* report_out,
                   size_t report_cap) {
  return guarded([&] {
    require_arg(audit_csv_path != nullptr, "sb_audit: null path");
    const std::vector<RunAudit> audits = read_audit_csv(audit_csv_path);
    std::ostringstream report;
    bool all_pass = true;
    for (const RunAudit& audit : audits) {
      const std::string label =
          audit.policy + " rep " + std::to_string(audit.replication);
      const CheckResult det = check_det_trace(audit);
      report << label << " det_trace " << (det.pass ? "PASS" : "FAIL") << " ("
             << det.detail << ")\n";
      all_pass = all_pass && det.pass;
      if (audit.policy.find("semits") != std::string::npos) {
        const CheckResult potential = check_potential_bound(audit);
        report << label << " potential_bound "
               << (potential.pass ? "PASS" : "FAIL") << " (" << potential.detail
               << ")\n";
        const CheckResult coverage = check_coverage(audit, audit.delta);
        report << label << " coverage " << (coverage.pass ? "PASS" : "FAIL")
               << " (rate " << coverage.lhs << " vs delta " << coverage.bound
               << ")\n";
        all_pass = all_pass && potential.pass && coverage.pass;
      }
      report << label << " min_eigenvalue " << format_g17(audit.final_min_eigenvalue)
             << "\n";
    }
    copy_to_buffer(report.str(), report_out, report_cap);
    require(all_pass, ErrorCode::numeric_error,
            "audit: at least one check failed");
  });
}

}  // extern "C"
