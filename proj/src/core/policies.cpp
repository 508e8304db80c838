#include "core/policies.hpp"

#include <algorithm>
#include <cmath>

namespace semibandit {

namespace {
constexpr double kNormSlack = 1e-9;
constexpr double kSimplexTol = 1e-9;
}  // namespace

ContextSet::ContextSet(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  require(rows_.rows() >= 1 && rows_.cols() >= 1, ErrorCode::invalid_argument,
          "ContextSet: need at least one arm and one feature");
  require(rows_.allFinite(), ErrorCode::numeric_error,
          "ContextSet: non-finite context entries");
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    require(rows_.row(i).norm() <= 1.0 + kNormSlack, ErrorCode::invalid_argument,
            "ContextSet: arm context norm exceeds 1");
  }
}

ContextSet ContextSet::from_flat(int n_arms, int dim, const double* values) {
  require(n_arms >= 1 && dim >= 1, ErrorCode::invalid_argument,
          "ContextSet: bad dimensions");
  require(values != nullptr, ErrorCode::invalid_argument,
          "ContextSet: null context data");
  Eigen::MatrixXd rows(n_arms, dim);
  for (int i = 0; i < n_arms; ++i)
    for (int j = 0; j < dim; ++j) rows(i, j) = values[i * dim + j];
  return ContextSet(std::move(rows));
}

Vec ContextSet::arm(int i) const {
  require(i >= 0 && i < n_arms(), ErrorCode::invalid_argument,
          "ContextSet: arm index out of range");
  return rows_.row(i).transpose();
}

ArmDistribution make_arm_distribution(const ContextSet& contexts, Vec probs) {
  require(probs.size() == contexts.n_arms(), ErrorCode::invalid_argument,
          "ArmDistribution: probability vector length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    require(std::isfinite(probs[i]) && probs[i] >= -kSimplexTol &&
                probs[i] <= 1.0 + kSimplexTol,
            ErrorCode::numeric_error, "ArmDistribution: probability out of [0,1]");
    total += probs[i];
  }
  require(std::abs(total - 1.0) <= kSimplexTol, ErrorCode::numeric_error,
          "ArmDistribution: probabilities do not sum to 1");
  ArmDistribution dist;
  dist.mean_context = contexts.rows().transpose() * probs;
  dist.probs = std::move(probs);
  return dist;
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "uniform") return PolicyKind::uniform;
  if (name == "lints") return PolicyKind::lints;
  if (name == "semits") return PolicyKind::semits;
  if (name == "acts") return PolicyKind::acts;
  if (name == "bose") return PolicyKind::bose;
  fail(ErrorCode::parse_error, "unknown policy kind: " + std::string(name));
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::uniform: return "uniform";
    case PolicyKind::lints: return "lints";
    case PolicyKind::semits: return "semits";
    case PolicyKind::acts: return "acts";
    case PolicyKind::bose: return "bose";
  }
  return "?";
}

void PolicyConfig::validate() const {
  require(v >= 0.0 && std::isfinite(v), ErrorCode::invalid_argument,
          "policy config: v must be finite and nonnegative");
  require(noise_scale >= 0.0 && std::isfinite(noise_scale),
          ErrorCode::invalid_argument, "policy config: R must be nonnegative");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument,
          "policy config: delta must lie in (0,1)");
  require(horizon >= 1, ErrorCode::invalid_argument,
          "policy config: horizon must be >= 1");
  require(mc_samples >= 1, ErrorCode::invalid_argument,
          "policy config: mc_samples must be >= 1");
  require(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max,
          ErrorCode::invalid_argument,
          "policy config: need 0 <= p_min <= p_max <= 1");
  require(omega >= 0.0 && std::isfinite(omega), ErrorCode::invalid_argument,
          "policy config: omega must be nonnegative");
  require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument,
          "policy config: gamma must be positive");
}

double PolicyConfig::theoretical_v(double noise_scale, int dim,
                                   long long horizon, double delta) {
  return (2.0 * noise_scale + 6.0) *
         std::sqrt(6.0 * dim * std::log(static_cast<double>(horizon) / delta));
}

int argmax_uniform_tie(const Vec& scores, Rng& rng) {
  require(scores.size() >= 1, ErrorCode::invalid_argument,
          "argmax_uniform_tie: empty scores");
  const double best = scores.maxCoeff();
  int ties = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (scores[i] == best) ++ties;
  if (ties == 1) {
    for (Eigen::Index i = 0; i < scores.size(); ++i)
      if (scores[i] == best) return static_cast<int>(i);
  }
  int pick = rng.uniform_int(ties);
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (scores[i] == best && pick-- == 0) return static_cast<int>(i);
  }
  fail(ErrorCode::numeric_error, "argmax_uniform_tie: unreachable");
}

ArmDistribution estimate_arm_probs_mc(const ContextSet& contexts,
                                      const Vec& mean,
                                      const SpdMatrix& precision, double v,
                                      int mc_samples, Rng& rng) {
  require(mean.size() == contexts.dim() && precision.dim() == contexts.dim(),
          ErrorCode::invalid_argument, "estimate_arm_probs: dimension mismatch");
  require(mc_samples >= 1, ErrorCode::invalid_argument,
          "estimate_arm_probs: mc_samples must be >= 1");
  const int n = contexts.n_arms();
  const int d = contexts.dim();
  Vec counts = Vec::Zero(n);
  const auto& llt = precision.cholesky();
  Vec z(d);
  Vec draw(d);
  Vec scores(n);
  for (int s = 0; s < mc_samples; ++s) {
    if (v > 0.0) {
      for (int i = 0; i < d; ++i) z[i] = rng.normal();
      llt.matrixU().solveInPlace(z);
      draw = mean + v * z;
    } else {
      draw = mean;
    }
    scores.noalias() = contexts.rows() * draw;
    const double best = scores.maxCoeff();
    int ties = 0;
    for (int i = 0; i < n; ++i)
      if (scores[i] == best) ++ties;
    const double share = 1.0 / ties;
    for (int i = 0; i < n; ++i)
      if (scores[i] == best) counts[i] += share;
  }
  return make_arm_distribution(contexts, counts / mc_samples);
}

ArmDistribution estimate_arm_probs(const ContextSet& contexts, const Vec& mean,
                                   const SpdMatrix& precision, double v,
                                   int mc_samples, Rng& rng) {
  const int n = contexts.n_arms();
  if (n == 1) return make_arm_distribution(contexts, Vec::Ones(1));
  if (n == 2) {
    require(mean.size() == contexts.dim() && precision.dim() == contexts.dim(),
            ErrorCode::invalid_argument,
            "estimate_arm_probs: dimension mismatch");
    const Vec diff = contexts.arm(1) - contexts.arm(0);
    Vec probs(2);
    if (diff.isZero(0.0)) {
      probs << 0.5, 0.5;
      return make_arm_distribution(contexts, std::move(probs));
    }
    const double margin = diff.dot(mean);
    const double spread = v * precision.mahalanobis_width(diff);
    double p1;
    if (spread > 0.0) {
      p1 = gaussian_cdf(margin / spread);
    } else {
      p1 = margin > 0.0 ? 1.0 : (margin < 0.0 ? 0.0 : 0.5);
    }
    probs << 1.0 - p1, p1;
    return make_arm_distribution(contexts, std::move(probs));
  }
  return estimate_arm_probs_mc(contexts, mean, precision, v, mc_samples, rng);
}

namespace {

void check_feedback(const ContextSet& contexts, const SelectResult& sel) {
  require(sel.arm >= 0 && sel.arm < contexts.n_arms(),
          ErrorCode::invalid_argument, "update: chosen arm out of range");
  require(sel.dist.probs.size() == contexts.n_arms(),
          ErrorCode::invalid_argument,
          "update: feedback distribution does not match contexts");
}

class UniformPolicy final : public Policy {
 public:
  UniformPolicy(int n_arms, int dim, std::uint64_t seed)
      : n_arms_(n_arms), dim_(dim), rng_(seed) {}

  PolicyKind kind() const override { return PolicyKind::uniform; }
  int n_arms() const override { return n_arms_; }
  int dim() const override { return dim_; }

  SelectResult select(const ContextSet& contexts) override {
    require(contexts.n_arms() == n_arms_ && contexts.dim() == dim_,
            ErrorCode::invalid_argument, "select: context shape mismatch");
    SelectResult out;
    out.arm = rng_.uniform_int(n_arms_);
    out.dist = make_arm_distribution(
        contexts, Vec::Constant(n_arms_, 1.0 / n_arms_));
    return out;
  }

  void update(const ContextSet& contexts, const SelectResult& sel,
              double) override {
    check_feedback(contexts, sel);
  }

  Vec estimate() const override { return Vec::Zero(dim_); }

 private:
  int n_arms_;
  int dim_;
  Rng rng_;
};

class RegressionPolicy : public Policy {
 public:
  RegressionPolicy(PolicyConfig config, int n_arms, int dim, std::uint64_t seed,
                   double ridge_scale)
      : cfg_(std::move(config)),
        n_arms_(n_arms),
        dim_(dim),
        rng_(seed),
        state_(PrecisionState::identity_seed(dim, ridge_scale)) {}

  int n_arms() const override { return n_arms_; }
  int dim() const override { return dim_; }
  Vec estimate() const override { return state_.estimate(); }
  const SpdMatrix* precision() const override { return &state_.precision; }

 protected:
  void check_contexts(const ContextSet& contexts) const {
    require(contexts.n_arms() == n_arms_ && contexts.dim() == dim_,
            ErrorCode::invalid_argument, "select: context shape mismatch");
  }

  PolicyConfig cfg_;
  int n_arms_;
  int dim_;
  Rng rng_;
  PrecisionState state_;
};

// Thompson sampling for the plain linear reward model: ridge accumulation of
// raw chosen contexts. The arm distribution is reported for logging parity
// with the semiparametric policy but plays no role in the update.
class LinTsPolicy final : public RegressionPolicy {
 public:
  LinTsPolicy(PolicyConfig config, int n_arms, int dim, std::uint64_t seed)
      : RegressionPolicy(std::move(config), n_arms, dim, seed, 1.0) {}

  PolicyKind kind() const override { return PolicyKind::lints; }

  SelectResult select(const ContextSet& contexts) override {
    check_contexts(contexts);
    SelectResult out;
    out.mu_hat = state_.estimate();
    out.dist = estimate_arm_probs(contexts, out.mu_hat, state_.precision,
                                  cfg_.v, cfg_.mc_samples, rng_);
    out.mu_tilde = sample_posterior(out.mu_hat, state_.precision, cfg_.v, rng_);
    out.arm = argmax_uniform_tie(contexts.rows() * out.mu_tilde, rng_);
    return out;
  }

  void update(const ContextSet& contexts, const SelectResult& sel,
              double reward) override {
    check_feedback(contexts, sel);
    const Vec chosen = contexts.arm(sel.arm);
    state_.precision.add_rank_one(chosen, 1.0);
    state_.response += reward * chosen;
  }
};

// Thompson sampling for the semiparametric reward model. Selection draws from
// N(mu_hat, v^2 B^{-1}); the update centers contexts by the arm-selection
// distribution and doubles the response increment, which is exactly what
// cancels the action-independent intercept from the estimate.
class SemiTsPolicy final : public RegressionPolicy {
 public:
  SemiTsPolicy(PolicyConfig config, int n_arms, int dim, std::uint64_t seed)
      : RegressionPolicy(std::move(config), n_arms, dim, seed, 1.0) {}

  PolicyKind kind() const override { return PolicyKind::semits; }

  SelectResult select(const ContextSet& contexts) override {
    check_contexts(contexts);
    SelectResult out;
    out.mu_hat = state_.estimate();
    // The distribution is a function of the history only: fresh draws, never
    // the realized mu_tilde that picks the arm.
    out.dist = estimate_arm_probs(contexts, out.mu_hat, state_.precision,
                                  cfg_.v, cfg_.mc_samples, rng_);
    out.mu_tilde = sample_posterior(out.mu_hat, state_.precision, cfg_.v, rng_);
    out.arm = argmax_uniform_tie(contexts.rows() * out.mu_tilde, rng_);
    return out;
  }

  void update(const ContextSet& contexts, const SelectResult& sel,
              double reward) override {
    check_feedback(contexts, sel);
    const Vec& mean_ctx = sel.dist.mean_context;
    const Vec centered_chosen = contexts.arm(sel.arm) - mean_ctx;
    state_.precision.add_rank_one(centered_chosen, 1.0);
    for (int i = 0; i < contexts.n_arms(); ++i) {
      const double p = sel.dist.probs[i];
      if (p > 0.0)
        state_.precision.add_rank_one(contexts.arm(i) - mean_ctx, p);
    }
    state_.response += 2.0 * reward * centered_chosen;
  }
};

// Action-centered TS: arm 0 is the zero-context base action. Stage one picks
// the best non-base arm from a posterior draw; stage two plays it with a
// clipped probability and otherwise falls back to the base action. Estimation
// uses the pseudo-reward (I(a == staged) - p) * r, whose conditional mean is
// free of the intercept.
class ActsPolicy final : public RegressionPolicy {
 public:
  ActsPolicy(PolicyConfig config, int n_arms, int dim, std::uint64_t seed)
      : RegressionPolicy(std::move(config), n_arms, dim, seed, 1.0) {}

  PolicyKind kind() const override { return PolicyKind::acts; }

  SelectResult select(const ContextSet& contexts) override {
    check_contexts(contexts);
    SelectResult out;
    out.mu_hat = state_.estimate();
    out.mu_tilde = sample_posterior(out.mu_hat, state_.precision, cfg_.v, rng_);
    const Vec staged_scores =
        contexts.rows().bottomRows(n_arms_ - 1) * out.mu_tilde;
    out.staged_arm = 1 + argmax_uniform_tie(staged_scores, rng_);
    const Vec staged_ctx = contexts.arm(out.staged_arm);
    const double margin = staged_ctx.dot(out.mu_hat);
    const double spread =
        cfg_.v * state_.precision.mahalanobis_width(staged_ctx);
    double raw;
    if (spread > 0.0) {
      raw = gaussian_cdf(margin / spread);
    } else {
      raw = margin > 0.0 ? 1.0 : (margin < 0.0 ? 0.0 : 0.5);
    }
    out.p_stage = std::max(cfg_.p_min, std::min(raw, cfg_.p_max));
    out.arm = rng_.bernoulli(out.p_stage) ? out.staged_arm : 0;
    Vec probs = Vec::Zero(n_arms_);
    probs[out.staged_arm] = out.p_stage;
    probs[0] += 1.0 - out.p_stage;
    out.dist = make_arm_distribution(contexts, std::move(probs));
    return out;
  }

  void update(const ContextSet& contexts, const SelectResult& sel,
              double reward) override {
    check_feedback(contexts, sel);
    require(sel.staged_arm >= 1 && sel.staged_arm < contexts.n_arms(),
            ErrorCode::invalid_argument, "acts update: missing staged arm");
    const double indicator = sel.arm == sel.staged_arm ? 1.0 : 0.0;
    const double pseudo_reward = (indicator - sel.p_stage) * reward;
    const Vec staged_ctx = contexts.arm(sel.staged_arm);
    const double weight =
        cfg_.weighted_updates ? sel.p_stage * (1.0 - sel.p_stage) : 1.0;
    state_.precision.add_rank_one(staged_ctx, weight);
    state_.response += pseudo_reward * staged_ctx;
  }
};

// BOSE with two actions: eliminate an arm when the other one beats it by more
// than omega times the self-normalized width of their context difference,
// then play uniformly over the survivors. The update centers the chosen
// context by the survivor distribution.
class BosePolicy final : public RegressionPolicy {
 public:
  BosePolicy(PolicyConfig config, int n_arms, int dim, std::uint64_t seed)
      : RegressionPolicy(std::move(config), n_arms, dim, seed, config.gamma) {}

  PolicyKind kind() const override { return PolicyKind::bose; }

  SelectResult select(const ContextSet& contexts) override {
    check_contexts(contexts);
    SelectResult out;
    out.mu_hat = state_.estimate();
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      const Vec diff = contexts.arm(j) - contexts.arm(i);
      const double width = state_.precision.mahalanobis_width(diff);
      if (!(diff.dot(out.mu_hat) > cfg_.omega * width))
        out.survivors.push_back(i);
    }
    // Both arms can never eliminate each other, so survivors is nonempty.
    const int pick = rng_.uniform_int(static_cast<int>(out.survivors.size()));
    out.arm = out.survivors[pick];
    Vec probs = Vec::Zero(2);
    for (int s : out.survivors)
      probs[s] = 1.0 / static_cast<double>(out.survivors.size());
    out.dist = make_arm_distribution(contexts, std::move(probs));
    return out;
  }

  void update(const ContextSet& contexts, const SelectResult& sel,
              double reward) override {
    check_feedback(contexts, sel);
    const Vec centered = contexts.arm(sel.arm) - sel.dist.mean_context;
    if (centered.isZero(0.0)) return;  // single survivor: nothing to learn
    state_.precision.add_rank_one(centered, 1.0);
    state_.response += reward * centered;
  }
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, int n_arms,
                                    int dim, std::uint64_t seed) {
  config.validate();
  require(n_arms >= 1 && dim >= 1, ErrorCode::invalid_argument,
          "make_policy: bad dimensions");
  switch (config.kind) {
    case PolicyKind::uniform:
      return std::make_unique<UniformPolicy>(n_arms, dim, seed);
    case PolicyKind::lints:
      return std::make_unique<LinTsPolicy>(config, n_arms, dim, seed);
    case PolicyKind::semits:
      return std::make_unique<SemiTsPolicy>(config, n_arms, dim, seed);
    case PolicyKind::acts:
      require(n_arms >= 2, ErrorCode::invalid_argument,
              "acts requires a base action plus at least one more arm");
      return std::make_unique<ActsPolicy>(config, n_arms, dim, seed);
    case PolicyKind::bose:
      require(n_arms == 2, ErrorCode::invalid_argument,
              "bose supports exactly two actions");
      return std::make_unique<BosePolicy>(config, n_arms, dim, seed);
  }
  fail(ErrorCode::invalid_argument, "make_policy: unknown policy kind");
}

}  // namespace semibandit
