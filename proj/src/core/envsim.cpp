#include "core/envsim.hpp"

#include <cmath>

namespace semibandit {

NuCase nu_case_from_string(std::string_view name) {
  if (name == "zero") return NuCase::zero;
  if (name == "adversarial") return NuCase::adversarial;
  if (name == "log_drift") return NuCase::log_drift;
  fail(ErrorCode::parse_error, "unknown nu case: " + std::string(name));
}

std::string_view to_string(NuCase nu_case) {
  switch (nu_case) {
    case NuCase::zero: return "zero";
    case NuCase::adversarial: return "adversarial";
    case NuCase::log_drift: return "log_drift";
  }
  return "?";
}

void EnvironmentSpec::validate() const {
  require(n_arms >= 2, ErrorCode::invalid_argument,
          "environment: need at least two arms (base plus one)");
  require(dim >= 1, ErrorCode::invalid_argument, "environment: dim must be >= 1");
  require(dim % (n_arms - 1) == 0, ErrorCode::invalid_argument,
          "environment: dim must be divisible by n_arms - 1");
  require(mu.size() == dim, ErrorCode::invalid_argument,
          "environment: mu length must equal dim");
  require(mu.allFinite(), ErrorCode::numeric_error,
          "environment: non-finite mu");
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::invalid_argument,
          "environment: sigma must be nonnegative");
}

Vec default_mu10() {
  Vec mu(10);
  mu << -0.55, 0.666, -0.09, -0.232, 0.244, 0.55, -0.666, 0.09, 0.232, -0.244;
  return mu;
}

ContextSet gen_contexts(const EnvironmentSpec& spec, Rng& rng) {
  const int blocks = spec.n_arms - 1;
  const int block_dim = spec.dim / blocks;
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(spec.n_arms, spec.dim);
  for (int arm = 1; arm < spec.n_arms; ++arm) {
    const Vec z = sample_unit_sphere(block_dim, rng);
    rows.row(arm).segment((arm - 1) * block_dim, block_dim) = z.transpose();
  }
  return ContextSet(std::move(rows));
}

double nu_value(const EnvironmentSpec& spec, long long t,
                double optimal_value) {
  switch (spec.nu_case) {
    case NuCase::zero: return 0.0;
    case NuCase::adversarial: return -optimal_value;
    case NuCase::log_drift: return std::log(static_cast<double>(t) + 1.0);
  }
  fail(ErrorCode::invalid_argument, "nu_value: unknown case");
}

double draw_reward(const EnvironmentSpec& spec, const RoundTruth& truth,
                   int arm, Rng& rng) {
  require(arm >= 0 && arm < truth.contexts.n_arms(),
          ErrorCode::invalid_argument, "draw_reward: arm out of range");
  const double mean = truth.nu + truth.contexts.rows().row(arm).dot(spec.mu);
  return spec.sigma > 0.0 ? mean + spec.sigma * rng.normal() : mean;
}

double instant_regret(const EnvironmentSpec& spec, const RoundTruth& truth,
                      int arm) {
  require(arm >= 0 && arm < truth.contexts.n_arms(),
          ErrorCode::invalid_argument, "instant_regret: arm out of range");
  return truth.optimal_value - truth.contexts.rows().row(arm).dot(spec.mu);
}

Environment::Environment(EnvironmentSpec spec)
    : spec_(std::move(spec)), rng_(spec_.seed) {
  spec_.validate();
}

RoundTruth Environment::next_round() {
  ++t_;
  ContextSet contexts = gen_contexts(spec_, rng_);
  const Vec values = contexts.rows() * spec_.mu;
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = static_cast<int>(i);
  RoundTruth truth{t_, std::move(contexts), 0.0, best, values[best]};
  truth.nu = nu_value(spec_, t_, truth.optimal_value);
  return truth;
}

}  // namespace semibandit
