#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/policies.hpp"

using namespace semibandit;

namespace {

ContextSet contexts_from(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.begin()->size());
  Eigen::MatrixXd m(n, d);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return ContextSet(std::move(m));
}

PolicyConfig config_of(PolicyKind kind) {
  PolicyConfig cfg;
  cfg.kind = kind;
  return cfg;
}

// Reference implementation of the semiparametric update, written as plain
// loops straight off the two assignment lines. Used to cross-check the
// policy's in-place path.
void oracle_centered_update(Eigen::MatrixXd& precision, Vec& response,
                            const Eigen::MatrixXd& rows, const Vec& probs,
                            int chosen, double reward) {
  const auto n = rows.rows();
  const auto d = rows.cols();
  Vec mean_ctx = Vec::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i)
    mean_ctx += probs[i] * rows.row(i).transpose();
  const Vec centered_chosen = rows.row(chosen).transpose() - mean_ctx;
  precision += centered_chosen * centered_chosen.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec centered = rows.row(i).transpose() - mean_ctx;
    precision += probs[i] * (centered * centered.transpose());
  }
  response += 2.0 * reward * centered_chosen;
}

}  // namespace

TEST_CASE("context set validation") {
  CHECK_THROWS_AS(contexts_from({{1.5, 0.0}, {0.0, 0.0}}), Error);  // norm > 1
  const ContextSet ok = contexts_from({{0.6, 0.8}, {0.0, 0.0}});
  CHECK(ok.n_arms() == 2);
  CHECK(ok.dim() == 2);
  CHECK_THROWS_AS(ok.arm(2), Error);
}

TEST_CASE("arm distribution simplex checks") {
  const ContextSet ctx = contexts_from({{1, 0}, {0, 1}});
  Vec bad(2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(make_arm_distribution(ctx, bad), Error);
  Vec good(2);
  good << 0.25, 0.75;
  const ArmDistribution dist = make_arm_distribution(ctx, good);
  CHECK(dist.mean_context[0] == doctest::Approx(0.25));
  CHECK(dist.mean_context[1] == doctest::Approx(0.75));
}

TEST_CASE("estimate_arm_probs identical rows split evenly") {
  Rng rng(3);
  const SpdMatrix precision = SpdMatrix::identity(2);
  const Vec mean = Vec::Zero(2);
  SUBCASE("closed form, N = 2") {
    const ContextSet ctx = contexts_from({{0.3, 0.4}, {0.3, 0.4}});
    const ArmDistribution dist =
        estimate_arm_probs(ctx, mean, precision, 1.0, 100, rng);
    CHECK(dist.probs[0] == 0.5);
    CHECK(dist.probs[1] == 0.5);
  }
  SUBCASE("monte carlo, N = 4") {
    const ContextSet ctx = contexts_from(
        {{0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}});
    const ArmDistribution dist =
        estimate_arm_probs(ctx, mean, precision, 1.0, 57, rng);
    for (int i = 0; i < 4; ++i) CHECK(dist.probs[i] == 0.25);
  }
}

TEST_CASE("estimate_arm_probs symmetric gaussian gives a coin flip") {
  Rng rng(4);
  const ContextSet ctx = contexts_from({{1, 0}, {0, 1}});
  const SpdMatrix precision = SpdMatrix::identity(2);
  const ArmDistribution dist =
      estimate_arm_probs(ctx, Vec::Zero(2), precision, 2.5, 100, rng);
  CHECK(dist.probs[0] == 0.5);
  CHECK(dist.probs[1] == 0.5);
}

TEST_CASE("estimate_arm_probs closed form matches the CDF oracle") {
  // b1 = e1, b2 = -e1, B = I, mean = c e1: pi_1 = Phi(c / v)
  Rng rng(5);
  const ContextSet ctx = contexts_from({{1, 0}, {-1, 0}});
  const SpdMatrix precision = SpdMatrix::identity(2);
  for (const double c : {-0.8, -0.1, 0.0, 0.3, 1.2}) {
    for (const double v : {0.5, 1.0, 3.0}) {
      Vec mean(2);
      mean << c, 0.0;
      const ArmDistribution dist =
          estimate_arm_probs(ctx, mean, precision, v, 100, rng);
      // diff = b2 - b1 = -2 e1, width = ||diff|| = 2
      CHECK(dist.probs[0] == doctest::Approx(gaussian_cdf(c / v)).epsilon(1e-12));
      CHECK(dist.probs[0] + dist.probs[1] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("monte carlo estimate agrees with the closed form") {
  Rng rng(6);
  const ContextSet ctx = contexts_from({{1, 0}, {-1, 0}});
  SpdMatrix precision = SpdMatrix::identity(2);
  Vec dir(2);
  dir << 0.6, 0.8;
  precision.add_rank_one(dir, 3.0);
  for (const double c : {-0.5, 0.2, 0.9}) {
    Vec mean(2);
    mean << c, -0.1;
    const ArmDistribution exact =
        estimate_arm_probs(ctx, mean, precision, 0.8, 100, rng);
    const ArmDistribution mc =
        estimate_arm_probs_mc(ctx, mean, precision, 0.8, 100000, rng);
    CHECK(std::abs(exact.probs[0] - mc.probs[0]) < 0.01);
  }
}

TEST_CASE("estimate_arm_probs degenerate v is greedy") {
  Rng rng(7);
  const ContextSet ctx = contexts_from({{1, 0}, {-1, 0}});
  const SpdMatrix precision = SpdMatrix::identity(2);
  Vec mean(2);
  mean << 0.4, 0.0;
  const ArmDistribution dist =
      estimate_arm_probs(ctx, mean, precision, 0.0, 100, rng);
  CHECK(dist.probs[0] == 1.0);
  CHECK(dist.probs[1] == 0.0);
}

TEST_CASE("semits first round with degenerate scale is uniform") {
  PolicyConfig cfg = config_of(PolicyKind::semits);
  cfg.v = 0.0;
  const ContextSet ctx =
      contexts_from({{0, 0, 0}, {0.5, 0, 0}, {0, 0.5, 0}, {0, 0, 0.5}});
  auto policy = make_policy(cfg, 4, 3, 11);
  const SelectResult sel = policy->select(ctx);
  CHECK(sel.mu_tilde.norm() == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(sel.dist.probs[i] == 0.25);
  CHECK(sel.arm >= 0);
  CHECK(sel.arm < 4);
}

TEST_CASE("single arm short-circuits") {
  auto policy = make_policy(config_of(PolicyKind::semits), 1, 2, 1);
  const ContextSet ctx = contexts_from({{0.1, 0.2}});
  const SelectResult sel = policy->select(ctx);
  CHECK(sel.arm == 0);
  CHECK(sel.dist.probs[0] == 1.0);
  // centering annihilates the single arm: state must not move
  policy->update(ctx, sel, 1.0);
  CHECK(policy->estimate().norm() == 0.0);
  CHECK((policy->precision()->entries() - Eigen::MatrixXd::Identity(2, 2))
            .norm() == 0.0);
}

TEST_CASE("semits select is reproducible from the seed") {
  const ContextSet ctx = contexts_from({{0, 0}, {0.6, 0.8}});
  for (int trial = 0; trial < 3; ++trial) {
    auto a = make_policy(config_of(PolicyKind::semits), 2, 2, 77);
    auto b = make_policy(config_of(PolicyKind::semits), 2, 2, 77);
    const SelectResult sa = a->select(ctx);
    const SelectResult sb = b->select(ctx);
    CHECK(sa.arm == sb.arm);
    CHECK((sa.mu_tilde - sb.mu_tilde).norm() == 0.0);
    CHECK((sa.dist.probs - sb.dist.probs).norm() == 0.0);
  }
}

TEST_CASE("semits update: worked two-arm example") {
  // N=2, b1 = 0, b2 = e1, pi = (1/2, 1/2), a = arm 2, r = 1.
  // mean context = e1/2; centered chosen = e1/2 contributes 1/4;
  // pi-weighted term adds 1/2*(1/4) + 1/2*(1/4) = 1/4; so B00: 1 -> 1.5.
  // y += 2 * (e1/2) * 1 = e1.
  auto policy = make_policy(config_of(PolicyKind::semits), 2, 2, 1);
  const ContextSet ctx = contexts_from({{0, 0}, {1, 0}});
  Vec probs(2);
  probs << 0.5, 0.5;
  SelectResult sel;
  sel.arm = 1;
  sel.dist = make_arm_distribution(ctx, probs);
  policy->update(ctx, sel, 1.0);

  const Eigen::MatrixXd& B = policy->precision()->entries();
  CHECK(B(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(B(0, 1) == 0.0);
  CHECK(B(1, 1) == 1.0);
  // mu_hat = B^{-1} y = (1/1.5, 0)
  const Vec estimate = policy->estimate();
  CHECK(estimate[0] == doctest::Approx(2.0 / 3.0));
  CHECK(estimate[1] == doctest::Approx(0.0));

  // same numbers from the loop-level oracle
  Eigen::MatrixXd B_ref = Eigen::MatrixXd::Identity(2, 2);
  Vec y_ref = Vec::Zero(2);
  oracle_centered_update(B_ref, y_ref, ctx.rows(), probs, 1, 1.0);
  CHECK((B - B_ref).norm() < 1e-15);
  CHECK(y_ref[0] == doctest::Approx(1.0));
  CHECK(y_ref[1] == 0.0);
}

TEST_CASE("semits update matches the oracle over random rounds") {
  Rng rng(99);
  auto policy = make_policy(config_of(PolicyKind::semits), 3, 4, 21);
  Eigen::MatrixXd B_ref = Eigen::MatrixXd::Identity(4, 4);
  Vec y_ref = Vec::Zero(4);
  double trace_limit = 4.0;
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd rows(3, 4);
    for (int i = 0; i < 3; ++i) {
      Vec x(4);
      for (int j = 0; j < 4; ++j) x[j] = rng.normal();
      rows.row(i) = (x / std::max(1.0, x.norm() * 1.2)).transpose();
    }
    const ContextSet ctx{rows};
    const SelectResult sel = policy->select(ctx);
    const double reward = rng.normal();
    policy->update(ctx, sel, reward);
    oracle_centered_update(B_ref, y_ref, ctx.rows(), sel.dist.probs, sel.arm,
                           reward);
    trace_limit += 8.0;
    const Eigen::MatrixXd& B = policy->precision()->entries();
    CHECK((B - B_ref).norm() <= 1e-12 * B.norm());
    CHECK(B.trace() <= trace_limit + 1e-9);  // per-step increment <= 8
    const Vec err = B_ref * policy->estimate() - y_ref;
    CHECK(err.norm() <= 1e-8 * std::max(1.0, y_ref.norm()));
  }
  CHECK(policy->precision()->min_eigenvalue() >= 1.0 - 1e-9);
}

TEST_CASE("lints basics") {
  PolicyConfig cfg = config_of(PolicyKind::lints);
  auto policy = make_policy(cfg, 2, 2, 8);
  CHECK(policy->estimate().norm() == 0.0);  // empty history

  // one observation (b = e1, r = 1): mu_hat = (I + e1 e1^T)^{-1} e1 = e1/2
  const ContextSet ctx = contexts_from({{1, 0}, {0, 1}});
  SelectResult sel = policy->select(ctx);
  sel.arm = 0;
  policy->update(ctx, sel, 1.0);
  const Vec estimate = policy->estimate();
  CHECK(estimate[0] == doctest::Approx(0.5));
  CHECK(estimate[1] == doctest::Approx(0.0));
}

TEST_CASE("lints degenerate v plays greedily") {
  PolicyConfig cfg = config_of(PolicyKind::lints);
  cfg.v = 0.0;
  auto policy = make_policy(cfg, 2, 2, 8);
  const ContextSet ctx = contexts_from({{1, 0}, {0, 1}});
  SelectResult sel = policy->select(ctx);
  sel.arm = 0;
  policy->update(ctx, sel, 1.0);  // estimate now e1/2
  for (int i = 0; i < 5; ++i) {
    const SelectResult s = policy->select(ctx);
    CHECK(s.arm == 0);
    policy->update(ctx, s, 0.0);
  }
}

TEST_CASE("acts stage-two probability") {
  const ContextSet ctx = contexts_from({{0, 0}, {0.6, 0.8}});
  SUBCASE("zero margin gives a fair coin") {
    PolicyConfig cfg = config_of(PolicyKind::acts);
    auto policy = make_policy(cfg, 2, 2, 31);
    const SelectResult sel = policy->select(ctx);  // mu_hat = 0
    CHECK(sel.p_stage == 0.5);
    CHECK(sel.staged_arm == 1);
    CHECK(sel.dist.probs[1] == doctest::Approx(0.5));
  }
  SUBCASE("clipping to p_max") {
    PolicyConfig cfg = config_of(PolicyKind::acts);
    cfg.p_max = 0.9;
    cfg.v = 1e-6;  // sharp posterior: raw probability ~ 1 once margin > 0
    auto policy = make_policy(cfg, 2, 2, 31);
    SelectResult sel = policy->select(ctx);
    sel.arm = sel.staged_arm;
    policy->update(ctx, sel, 1.0);  // positive pseudo-reward, margin > 0
    const SelectResult next = policy->select(ctx);
    CHECK(next.p_stage == doctest::Approx(0.9));
  }
  SUBCASE("p_min = p_max = 1 always plays the staged arm") {
    PolicyConfig cfg = config_of(PolicyKind::acts);
    cfg.p_min = 1.0;
    cfg.p_max = 1.0;
    auto policy = make_policy(cfg, 2, 2, 31);
    for (int i = 0; i < 20; ++i) {
      const SelectResult sel = policy->select(ctx);
      CHECK(sel.arm == sel.staged_arm);
      policy->update(ctx, sel, 0.0);
    }
  }
}

TEST_CASE("acts pseudo-reward arithmetic") {
  const ContextSet ctx = contexts_from({{0, 0}, {1, 0}});
  auto fresh = [&] { return make_policy(config_of(PolicyKind::acts), 2, 2, 1); };
  SelectResult sel;
  sel.staged_arm = 1;
  sel.p_stage = 0.7;
  Vec probs(2);
  probs << 0.3, 0.7;
  sel.dist = make_arm_distribution(ctx, probs);

  SUBCASE("staged arm played: r_hat = (1 - 0.7) * 1 = 0.3") {
    auto policy = fresh();
    sel.arm = 1;
    policy->update(ctx, sel, 1.0);
    // y = 0.3 * e1, B = I + e1 e1^T -> mu_hat = 0.15 e1
    CHECK(policy->estimate()[0] == doctest::Approx(0.15));
  }
  SUBCASE("base arm played: r_hat = (0 - 0.7) * 1 = -0.7") {
    auto policy = fresh();
    sel.arm = 0;
    policy->update(ctx, sel, 1.0);
    CHECK(policy->estimate()[0] == doctest::Approx(-0.35));
  }
  SUBCASE("zero reward leaves the response untouched") {
    auto policy = fresh();
    sel.arm = 1;
    policy->update(ctx, sel, 0.0);
    CHECK(policy->estimate().norm() == 0.0);
    CHECK(policy->precision()->entries()(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("p(1-p) weighting moves only the precision") {
    PolicyConfig cfg = config_of(PolicyKind::acts);
    cfg.weighted_updates = true;
    auto policy = make_policy(cfg, 2, 2, 1);
    sel.arm = 1;
    policy->update(ctx, sel, 1.0);
    // B = I + 0.7*0.3 * e1 e1^T, y = 0.3 e1
    CHECK(policy->precision()->entries()(0, 0) == doctest::Approx(1.21));
    CHECK(policy->estimate()[0] == doctest::Approx(0.3 / 1.21));
  }
}

TEST_CASE("acts needs a base action") {
  CHECK_THROWS_AS(make_policy(config_of(PolicyKind::acts), 1, 2, 1), Error);
}

TEST_CASE("bose survivor logic") {
  const ContextSet ctx = contexts_from({{0, 0}, {1, 0}});
  SUBCASE("zero estimate keeps both arms") {
    auto policy = make_policy(config_of(PolicyKind::bose), 2, 2, 17);
    int plays[2] = {0, 0};
    for (int i = 0; i < 2000; ++i) {
      const SelectResult sel = policy->select(ctx);
      CHECK(sel.survivors.size() == 2);
      CHECK(sel.dist.probs[0] == 0.5);
      ++plays[sel.arm];
    }
    CHECK(plays[0] > 800);  // 4-sigma band around 1000 is ~±90
    CHECK(plays[1] > 800);
  }
  SUBCASE("huge omega never eliminates") {
    PolicyConfig cfg = config_of(PolicyKind::bose);
    cfg.omega = 1e6;
    auto policy = make_policy(cfg, 2, 2, 17);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const SelectResult sel = policy->select(ctx);
      CHECK(sel.survivors.size() == 2);
      policy->update(ctx, sel, rng.normal());
    }
  }
  SUBCASE("dominated arm is eliminated") {
    // After one update with both survivors, a = arm 2, r = 2:
    // X = e1/2, B = I + X X^T = diag(1.25, 1), y = 2 X = e1.
    // mu_hat = 0.8 e1, (b2 - b1)^T mu_hat = 0.8,
    // width = sqrt(e1^T B^{-1} e1) = sqrt(0.8) ~ 0.894.
    // omega = 0.5: 0.8 > 0.447 -> arm 1 eliminated, play arm 2.
    PolicyConfig cfg = config_of(PolicyKind::bose);
    cfg.omega = 0.5;
    auto policy = make_policy(cfg, 2, 2, 17);
    SelectResult first = policy->select(ctx);
    REQUIRE(first.survivors.size() == 2);
    first.arm = 1;
    policy->update(ctx, first, 2.0);
    CHECK(policy->estimate()[0] == doctest::Approx(0.8));

    const SelectResult next = policy->select(ctx);
    REQUIRE(next.survivors.size() == 1);
    CHECK(next.survivors[0] == 1);
    CHECK(next.arm == 1);
    CHECK(next.dist.probs[1] == 1.0);

    // single survivor: centered context is zero, state must not move
    const Eigen::MatrixXd before = policy->precision()->entries();
    policy->update(ctx, next, -5.0);
    CHECK((policy->precision()->entries() - before).norm() == 0.0);
  }
}

TEST_CASE("bose update centers by the survivor distribution") {
  // both survive, b1 = 0, b2 = e1, a = arm 2, r = 1: X = e1/2, y += e1/2
  auto policy = make_policy(config_of(PolicyKind::bose), 2, 2, 1);
  const ContextSet ctx = contexts_from({{0, 0}, {1, 0}});
  SelectResult sel = policy->select(ctx);
  REQUIRE(sel.survivors.size() == 2);
  sel.arm = 1;
  policy->update(ctx, sel, 1.0);
  // B = diag(1.25, 1), y = e1/2 -> mu_hat = 0.4 e1
  CHECK(policy->precision()->entries()(0, 0) == doctest::Approx(1.25));
  CHECK(policy->estimate()[0] == doctest::Approx(0.4));
}

TEST_CASE("bose rejects any arm count but two") {
  CHECK_THROWS_AS(make_policy(config_of(PolicyKind::bose), 3, 2, 1), Error);
  CHECK_THROWS_AS(make_policy(config_of(PolicyKind::bose), 1, 2, 1), Error);
}

TEST_CASE("uniform policy") {
  SUBCASE("N = 20 probabilities") {
    auto policy = make_policy(config_of(PolicyKind::uniform), 20, 19, 4);
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(20, 19);
    for (int i = 1; i < 20; ++i) rows(i, i - 1) = 1.0;
    const SelectResult sel = policy->select(ContextSet{rows});
    for (int i = 0; i < 20; ++i) CHECK(sel.dist.probs[i] == doctest::Approx(0.05));
  }
  SUBCASE("single arm") {
    auto policy = make_policy(config_of(PolicyKind::uniform), 1, 2, 4);
    const SelectResult sel = policy->select(contexts_from({{0.1, 0.0}}));
    CHECK(sel.arm == 0);
  }
  SUBCASE("empirical frequency within four sigma") {
    const int n = 100000, arms = 5;
    auto policy = make_policy(config_of(PolicyKind::uniform), arms, 4, 4);
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(arms, 4);
    for (int i = 1; i < arms; ++i) rows(i, (i - 1) % 4) = 1.0;
    const ContextSet ctx{rows};
    std::vector<int> hits(arms, 0);
    for (int i = 0; i < n; ++i) ++hits[policy->select(ctx).arm];
    const double p = 1.0 / arms;
    const double sigma = std::sqrt(p * (1 - p) / n);
    for (int i = 0; i < arms; ++i)
      CHECK(std::abs(double(hits[i]) / n - p) < 4.0 * sigma);
  }
}

TEST_CASE("every reported distribution satisfies the simplex contract") {
  Rng rng(1234);
  const ContextSet ctx = contexts_from({{0, 0}, {0.6, 0.8}});
  for (PolicyKind kind : {PolicyKind::uniform, PolicyKind::lints,
                          PolicyKind::semits, PolicyKind::acts,
                          PolicyKind::bose}) {
    PolicyConfig cfg = config_of(kind);
    cfg.mc_samples = 500;
    auto policy = make_policy(cfg, 2, 2, 55);
    for (int t = 0; t < 25; ++t) {
      const SelectResult sel = policy->select(ctx);
      double total = 0.0;
      for (int i = 0; i < 2; ++i) {
        CHECK(sel.dist.probs[i] >= 0.0);
        CHECK(sel.dist.probs[i] <= 1.0);
        total += sel.dist.probs[i];
      }
      CHECK(std::abs(total - 1.0) <= 1e-9);
      const Vec recomputed = ctx.rows().transpose() * sel.dist.probs;
      CHECK((recomputed - sel.dist.mean_context).norm() == 0.0);
      policy->update(ctx, sel, rng.normal());
    }
  }
}

TEST_CASE("config validation") {
  PolicyConfig cfg = config_of(PolicyKind::acts);
  cfg.p_min = 0.8;
  cfg.p_max = 0.2;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = config_of(PolicyKind::semits);
  cfg.mc_samples = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = config_of(PolicyKind::bose);
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  CHECK(PolicyConfig::theoretical_v(0.01, 10, 2000, 0.1) ==
        doctest::Approx((2 * 0.01 + 6) * std::sqrt(60.0 * std::log(20000.0))));
}

TEST_CASE("policy kind names round-trip") {
  for (PolicyKind kind : {PolicyKind::uniform, PolicyKind::lints,
                          PolicyKind::semits, PolicyKind::acts,
                          PolicyKind::bose}) {
    CHECK(policy_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(policy_kind_from_string("linucb"), Error);
}
