#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "core/numkit.hpp"

namespace semibandit {

// One round's arm features: an N x d matrix whose i-th row is the context of
// arm i. Rows are L2-bounded by 1 (with a small construction slack).
class ContextSet {
 public:
  explicit ContextSet(Eigen::MatrixXd rows);
  static ContextSet from_flat(int n_arms, int dim, const double* values);

  int n_arms() const { return static_cast<int>(rows_.rows()); }
  int dim() const { return static_cast<int>(rows_.cols()); }
  const Eigen::MatrixXd& rows() const { return rows_; }
  Vec arm(int i) const;

 private:
  Eigen::MatrixXd rows_;
};

// Probability vector over arms together with the probability-weighted mean
// context b_bar = sum_i probs[i] * b_i. The mean context is what the
// semiparametric update centers against.
struct ArmDistribution {
  Vec probs;
  Vec mean_context;
};

// Validates the simplex constraints and fills in the mean context.
ArmDistribution make_arm_distribution(const ContextSet& contexts, Vec probs);

enum class PolicyKind { uniform, lints, semits, acts, bose };

PolicyKind policy_kind_from_string(std::string_view name);
std::string_view to_string(PolicyKind kind);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::semits;

  // Exploration scale of the posterior for the Thompson-sampling variants.
  // Treated as a free tuning parameter; theoretical_v gives the value the
  // regret analysis prescribes.
  double v = 1.0;

  double noise_scale = 0.01;  // sub-Gaussian scale R of the reward noise
  double delta = 0.1;         // confidence level parameter
  long long horizon = 2000;   // T, used only by theoretical_v
  int mc_samples = 10000;     // Monte-Carlo draws for arm probabilities (N > 2)

  // Action-centered TS: clip range for the stage-two probability, and the
  // optional p(1-p) weighting of the precision update.
  double p_min = 0.0;
  double p_max = 1.0;
  bool weighted_updates = false;

  // BOSE: elimination width multiplier and ridge seed.
  double omega = 1.0;
  double gamma = 1.0;

  void validate() const;

  static double theoretical_v(double noise_scale, int dim, long long horizon,
                              double delta);
};

// Ridge accumulation state shared by the regression-based policies: an SPD
// precision matrix seeded at (scaled) identity plus the running response
// vector.
struct PrecisionState {
  SpdMatrix precision;
  Vec response;

  static PrecisionState identity_seed(int dim, double scale = 1.0) {
    return {SpdMatrix::scaled_identity(dim, scale), Vec::Zero(dim)};
  }

  Vec estimate() const { return precision.solve(response); }
};

// Everything a selection produced. `dist` is the arm-selection distribution
// given the history (computed before conditioning on any realized draw);
// feeding it back into update() is what makes the centered updates correct.
struct SelectResult {
  int arm = 0;  // 0-based
  ArmDistribution dist;
  Vec mu_hat;    // estimate at selection time (empty for uniform)
  Vec mu_tilde;  // realized posterior draw (TS variants)

  // Action-centered TS extras.
  int staged_arm = -1;
  double p_stage = 0.0;

  // BOSE extras.
  std::vector<int> survivors;
};

// Selection distribution of a Thompson-sampling step with posterior
// N(mean, v^2 * precision^{-1}): the probability that each arm maximizes
// b_i^T mu_tilde. Closed form via the Gaussian CDF for N == 2; Monte-Carlo
// frequency over mc_samples fresh draws for N > 2. Exact score ties are
// split uniformly across the tied arms, so identical rows get identical
// probabilities.
ArmDistribution estimate_arm_probs(const ContextSet& contexts, const Vec& mean,
                                   const SpdMatrix& precision, double v,
                                   int mc_samples, Rng& rng);

// Monte-Carlo path, callable for any N (used to cross-check the closed form).
ArmDistribution estimate_arm_probs_mc(const ContextSet& contexts,
                                      const Vec& mean,
                                      const SpdMatrix& precision, double v,
                                      int mc_samples, Rng& rng);

// Argmax over scores with ties broken uniformly at random.
int argmax_uniform_tie(const Vec& scores, Rng& rng);

// Uniform contract for all five policies. select() and update() must be
// called in strict round order from one thread; distinct instances are
// independent and may run in parallel.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual PolicyKind kind() const = 0;
  virtual int n_arms() const = 0;
  virtual int dim() const = 0;

  virtual SelectResult select(const ContextSet& contexts) = 0;
  virtual void update(const ContextSet& contexts, const SelectResult& sel,
                      double reward) = 0;

  // Current regression estimate (zeros when nothing has been learned).
  virtual Vec estimate() const = 0;

  // Precision matrix B(t), when the policy keeps one (null for uniform).
  virtual const SpdMatrix* precision() const { return nullptr; }
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, int n_arms,
                                    int dim, std::uint64_t seed);

}  // namespace semibandit
