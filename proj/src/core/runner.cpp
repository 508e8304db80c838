#include "core/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "core/textio.hpp"

namespace semibandit {

namespace {

constexpr std::uint64_t kEnvStreamSalt = 0x656e7673u;     // environment stream
constexpr std::uint64_t kPolicyStreamSalt = 0x706f6c79u;  // policy stream
constexpr std::uint64_t kReplayStreamSalt = 0x72706c79u;  // replay runs

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    require(allowed.count(item.key()) > 0, ErrorCode::parse_error,
            "config: unknown key '" + item.key() + "' in " + where);
  }
}

void open_parent_dirs(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
}

std::ofstream open_output(const std::string& path) {
  open_parent_dirs(path);
  std::ofstream out(path);
  require(out.good(), ErrorCode::io_error, "cannot open for writing: " + path);
  return out;
}

}  // namespace

std::uint64_t environment_seed(std::uint64_t base_seed, int replication) {
  return mix_seed(mix_seed(base_seed, kEnvStreamSalt),
                  static_cast<std::uint64_t>(replication));
}

std::uint64_t policy_seed(std::uint64_t base_seed, int policy_index,
                          int replication) {
  return mix_seed(mix_seed(mix_seed(base_seed, kPolicyStreamSalt),
                           static_cast<std::uint64_t>(policy_index)),
                  static_cast<std::uint64_t>(replication));
}

void ExperimentConfig::validate() const {
  environment.validate();
  require(horizon >= 1, ErrorCode::invalid_argument,
          "experiment: horizon must be >= 1");
  require(replications >= 1, ErrorCode::invalid_argument,
          "experiment: replications must be >= 1");
  require(!policies.empty(), ErrorCode::invalid_argument,
          "experiment: need at least one policy");
  std::set<std::string> names;
  for (const NamedPolicyConfig& p : policies) {
    require(!p.name.empty(), ErrorCode::invalid_argument,
            "experiment: empty policy name");
    require(names.insert(p.name).second, ErrorCode::invalid_argument,
            "experiment: duplicate policy name '" + p.name + "'");
    // Full construction check so configuration errors surface before any
    // replication starts (e.g. bose with n_arms != 2).
    make_policy(p.config, environment.n_arms, environment.dim, 0);
  }
}

namespace {

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
}

EnvironmentSpec environment_from_json(const json& env) {
  reject_unknown_keys(env, {"n_arms", "dim", "sigma", "nu_case", "mu", "seed"},
                      "environment");
  EnvironmentSpec spec;
  spec.n_arms = env.value("n_arms", 2);
  spec.dim = env.value("dim", 10);
  spec.sigma = env.value("sigma", 0.01);
  spec.nu_case = nu_case_from_string(env.value("nu_case", std::string("zero")));
  spec.seed = env.value("seed", 0ULL);
  if (env.contains("mu")) {
    const auto values = env.at("mu").get<std::vector<double>>();
    spec.mu = Eigen::Map<const Vec>(values.data(),
                                    static_cast<Eigen::Index>(values.size()));
  } else {
    require(spec.dim == 10, ErrorCode::parse_error,
            "config: 'mu' is required unless dim == 10");
    spec.mu = default_mu10();
  }
  return spec;
}

// dim_for_theoretical < 0 rejects v = "theoretical" (used when the feature
// dimension is not known until runtime, e.g. replay).
PolicyConfig policy_from_json(const json& p, double default_noise_scale,
                              long long default_horizon,
                              int dim_for_theoretical, std::string* name_out) {
  reject_unknown_keys(p,
                      {"kind", "name", "v", "R", "delta", "mc_samples",
                       "p_min", "p_max", "weighted_updates", "omega", "gamma",
                       "horizon"},
                      "policy");
  PolicyConfig cfg;
  require(p.contains("kind"), ErrorCode::parse_error,
          "config: policy without 'kind'");
  cfg.kind = policy_kind_from_string(p.at("kind").get<std::string>());
  if (name_out != nullptr)
    *name_out = p.value("name", std::string(to_string(cfg.kind)));
  cfg.noise_scale = p.value("R", default_noise_scale);
  cfg.delta = p.value("delta", 0.1);
  cfg.horizon = p.value("horizon", default_horizon);
  cfg.mc_samples = p.value("mc_samples", 10000);
  cfg.p_min = p.value("p_min", 0.0);
  cfg.p_max = p.value("p_max", 1.0);
  cfg.weighted_updates = p.value("weighted_updates", false);
  cfg.omega = p.value("omega", 1.0);
  cfg.gamma = p.value("gamma", 1.0);
  if (p.contains("v") && p.at("v").is_string()) {
    require(p.at("v").get<std::string>() == "theoretical",
            ErrorCode::parse_error,
            "config: 'v' must be a number or \"theoretical\"");
    require(dim_for_theoretical > 0, ErrorCode::parse_error,
            "config: v = \"theoretical\" is only available in experiment "
            "configs where the dimension is known");
    cfg.v = PolicyConfig::theoretical_v(cfg.noise_scale, dim_for_theoretical,
                                        cfg.horizon, cfg.delta);
  } else {
    cfg.v = p.value("v", 1.0);
  }
  return cfg;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json root = parse_json_text(text);
  try {
    ExperimentConfig cfg;
    reject_unknown_keys(root,
                        {"environment", "policies", "horizon", "replications",
                         "base_seed", "output", "audit", "audit_output"},
                        "top level");
    require(root.contains("environment"), ErrorCode::parse_error,
            "config: missing 'environment'");
    cfg.environment = environment_from_json(root.at("environment"));
    cfg.horizon = root.value("horizon", 2000LL);
    cfg.replications = root.value("replications", 30);
    cfg.base_seed = root.value("base_seed", 1ULL);
    cfg.output_prefix = root.value("output", std::string());
    cfg.record_audit = root.value("audit", false);
    cfg.audit_output = root.value("audit_output", std::string());
    if (!cfg.audit_output.empty()) cfg.record_audit = true;

    require(root.contains("policies"), ErrorCode::parse_error,
            "config: missing 'policies'");
    for (const json& p : root.at("policies")) {
      NamedPolicyConfig named;
      named.config =
          policy_from_json(p, cfg.environment.sigma, cfg.horizon,
                           cfg.environment.dim, &named.name);
      named.config.horizon = cfg.horizon;
      cfg.policies.push_back(std::move(named));
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
}

PolicyConfig policy_config_from_json_text(const std::string& text) {
  const json root = parse_json_text(text);
  try {
    PolicyConfig cfg = policy_from_json(root, 0.01, 2000, -1, nullptr);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
}

SyntheticLogConfig synthetic_log_config_from_json_text(const std::string& text) {
  const json root = parse_json_text(text);
  try {
    reject_unknown_keys(root, {"environment", "bernoulli_rewards"},
                        "top level");
    require(root.contains("environment"), ErrorCode::parse_error,
            "config: missing 'environment'");
    SyntheticLogConfig cfg;
    cfg.environment = environment_from_json(root.at("environment"));
    cfg.bernoulli_rewards = root.value("bernoulli_rewards", false);
    cfg.environment.validate();
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
}

int worker_count() {
  if (const char* env = std::getenv("SEMIBANDIT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int n_tasks, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(), n_tasks);
  if (workers <= 1) {
    for (int i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double quantile_type7(std::vector<double> values, double p) {
  require(!values.empty(), ErrorCode::invalid_argument,
          "quantile: empty sample");
  require(p >= 0.0 && p <= 1.0, ErrorCode::invalid_argument,
          "quantile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const size_t lo = static_cast<size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

// One (policy, replication) simulation. Audit rows are measured at selection
// time, i.e. against B(t) and mu_hat(t) before the round's update.
void run_single(const ExperimentConfig& cfg, int policy_index, int replication,
                RegretTrace& trace, RunAudit* audit) {
  EnvironmentSpec env_spec = cfg.environment;
  env_spec.seed = environment_seed(cfg.base_seed, replication);
  Environment env(env_spec);
  const NamedPolicyConfig& named = cfg.policies[policy_index];
  auto policy =
      make_policy(named.config, env_spec.n_arms, env_spec.dim,
                  policy_seed(cfg.base_seed, policy_index, replication));

  trace.policy = named.name;
  trace.replication = replication;
  trace.cumulative.clear();
  trace.cumulative.reserve(static_cast<size_t>(cfg.horizon));

  const bool auditing = audit != nullptr && policy->precision() != nullptr;
  if (auditing) {
    audit->policy = named.name;
    audit->replication = replication;
    audit->n_arms = env_spec.n_arms;
    audit->dim = env_spec.dim;
    audit->noise_scale = named.config.noise_scale;
    audit->delta = named.config.delta;
    audit->records.clear();
    audit->records.reserve(static_cast<size_t>(cfg.horizon));
  }

  double cumulative = 0.0;
  for (long long t = 1; t <= cfg.horizon; ++t) {
    const RoundTruth truth = env.next_round();
    const SelectResult sel = policy->select(truth.contexts);

    if (auditing) {
      const SpdMatrix& precision = *policy->precision();
      const Vec& mean_ctx = sel.dist.mean_context;
      AuditRecord rec;
      rec.t = t;
      rec.width_chosen =
          precision.mahalanobis_width(truth.contexts.arm(sel.arm) - mean_ctx);
      rec.log_det_precision = precision.log_det();
      rec.trace_precision = precision.trace();
      const Vec estimate_gap = sel.mu_hat - env_spec.mu;
      rec.estimate_error = estimate_gap.norm();
      const double width_scale = confidence_width_scale(
          named.config.noise_scale, env_spec.dim, t, named.config.delta);
      for (int i = 0; i < truth.contexts.n_arms(); ++i) {
        const Vec centered = truth.contexts.arm(i) - mean_ctx;
        const double s_c = precision.mahalanobis_width(centered);
        if (std::abs(centered.dot(estimate_gap)) > width_scale * s_c + 1e-12)
          ++rec.coverage_violations;
      }
      audit->records.push_back(std::move(rec));
    }

    const double reward = env.draw_reward(truth, sel.arm);
    cumulative += instant_regret(env_spec, truth, sel.arm);
    trace.cumulative.push_back(cumulative);
    policy->update(truth.contexts, sel, reward);
  }
  if (auditing)
    audit->final_min_eigenvalue = policy->precision()->min_eigenvalue();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n_policies = static_cast<int>(cfg.policies.size());
  const int reps = cfg.replications;
  const int n_tasks = n_policies * reps;

  ExperimentResult result;
  result.traces.resize(static_cast<size_t>(n_tasks));
  std::vector<RunAudit> audits(cfg.record_audit ? n_tasks : 0);

  parallel_for(n_tasks, [&](int task) {
    const int policy_index = task / reps;
    const int replication = task % reps;
    run_single(cfg, policy_index, replication, result.traces[task],
               cfg.record_audit ? &audits[task] : nullptr);
  });

  for (RunAudit& audit : audits)
    if (!audit.records.empty()) result.audits.push_back(std::move(audit));

  for (int p = 0; p < n_policies; ++p) {
    PolicySummary summary;
    summary.policy = cfg.policies[p].name;
    summary.quantiles.reserve(static_cast<size_t>(cfg.horizon));
    std::vector<double> sample(static_cast<size_t>(reps));
    for (long long t = 1; t <= cfg.horizon; ++t) {
      for (int r = 0; r < reps; ++r)
        sample[r] = result.traces[p * reps + r].cumulative[t - 1];
      QuantileRow row;
      row.t = t;
      row.median = quantile_type7(sample, 0.5);
      row.q1 = quantile_type7(sample, 0.25);
      row.q3 = quantile_type7(sample, 0.75);
      summary.quantiles.push_back(row);
    }
    summary.median_final_regret = summary.quantiles.back().median;
    result.summaries.push_back(std::move(summary));
  }

  if (!cfg.audit_output.empty()) {
    open_parent_dirs(cfg.audit_output);
    write_audit_csv(result.audits, cfg.audit_output);
  }
  return result;
}

TuneResult tune_parameter(const ExperimentConfig& cfg,
                          const std::string& parameter,
                          const std::vector<double>& grid) {
  require(cfg.policies.size() == 1, ErrorCode::invalid_argument,
          "tune expects a config with exactly one policy");
  require(!grid.empty(), ErrorCode::invalid_argument, "tune: empty grid");
  const PolicyKind kind = cfg.policies[0].config.kind;
  if (parameter == "v") {
    require(kind == PolicyKind::lints || kind == PolicyKind::semits ||
                kind == PolicyKind::acts,
            ErrorCode::invalid_argument,
            "tune: 'v' applies to the Thompson-sampling policies");
  } else if (parameter == "omega") {
    require(kind == PolicyKind::bose, ErrorCode::invalid_argument,
            "tune: 'omega' applies to bose");
  } else {
    fail(ErrorCode::invalid_argument,
         "tune: unknown parameter '" + parameter + "' (use v or omega)");
  }

  TuneResult result;
  bool first = true;
  for (const double value : grid) {
    ExperimentConfig point = cfg;
    point.output_prefix.clear();
    point.audit_output.clear();
    point.record_audit = false;
    if (parameter == "v") {
      point.policies[0].config.v = value;
    } else {
      point.policies[0].config.omega = value;
    }
    const ExperimentResult run = run_experiment(point);
    const double median = run.summaries[0].median_final_regret;
    result.table.emplace_back(value, median);
    if (first || median < result.best_median ||
        (median == result.best_median && value < result.best_value)) {
      result.best_value = value;
      result.best_median = median;
      first = false;
    }
  }
  return result;
}

void emit_csv(const ExperimentResult& result, const std::string& prefix) {
  require(!result.traces.empty(), ErrorCode::invalid_argument,
          "emit_csv: nothing to write");
  require(!prefix.empty(), ErrorCode::invalid_argument,
          "emit_csv: empty output prefix");
  {
    std::ofstream out = open_output(prefix + "_quantiles.csv");
    out << "t,policy,median,q1,q3\n";
    for (const PolicySummary& summary : result.summaries) {
      for (const QuantileRow& row : summary.quantiles) {
        out << row.t << ',' << summary.policy << ',' << format_g17(row.median)
            << ',' << format_g17(row.q1) << ',' << format_g17(row.q3) << '\n';
      }
    }
    require(out.good(), ErrorCode::io_error,
            "write failed: " + prefix + "_quantiles.csv");
  }
  {
    std::ofstream out = open_output(prefix + "_summary.csv");
    out << "policy,median_RT\n";
    for (const PolicySummary& summary : result.summaries) {
      out << summary.policy << ',' << format_g17(summary.median_final_regret)
          << '\n';
    }
    require(out.good(), ErrorCode::io_error,
            "write failed: " + prefix + "_summary.csv");
  }
}

void emit_tune_csv(const TuneResult& result, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "value,median_RT\n";
  for (const auto& [value, median] : result.table)
    out << format_g17(value) << ',' << format_g17(median) << '\n';
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

std::vector<ReplayRunRow> run_replay_campaign(const ReplayCampaignConfig& cfg) {
  require(cfg.runs >= 1, ErrorCode::invalid_argument,
          "replay: runs must be >= 1");
  cfg.policy.validate();
  std::vector<ReplayRunRow> rows(static_cast<size_t>(cfg.runs));
  parallel_for(cfg.runs, [&](int run) {
    LogReader reader(cfg.log_path);
    std::optional<LogEvent> first = reader.next();
    require(first.has_value(), ErrorCode::parse_error,
            "replay: log is empty: " + cfg.log_path);
    auto policy = make_policy(
        cfg.policy, first->contexts.n_arms(), first->contexts.dim(),
        mix_seed(mix_seed(cfg.base_seed, kReplayStreamSalt),
                 static_cast<std::uint64_t>(run)));
    EventSource source = [&]() -> std::optional<LogEvent> {
      if (first.has_value()) {
        std::optional<LogEvent> out = std::move(first);
        first.reset();
        return out;
      }
      return reader.next();
    };
    rows[run].run_id = run;
    rows[run].result = replay_evaluate(*policy, source, cfg.horizon);
  });
  return rows;
}

void emit_replay_csv(const std::vector<ReplayRunRow>& rows,
                     const std::string& path) {
  std::ofstream out = open_output(path);
  out << "run_id,matched,G_hat,consumed\n";
  for (const ReplayRunRow& row : rows) {
    out << row.run_id << ',' << row.result.matched << ','
        << format_g17(row.result.total_reward) << ','
        << row.result.events_consumed << '\n';
  }
  require(out.good(), ErrorCode::io_error, "write failed: " + path);
}

}  // namespace semibandit
