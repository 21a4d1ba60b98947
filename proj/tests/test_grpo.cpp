#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rlvr/error.hpp"
#include "rlvr/grpo.hpp"
#include "support.hpp"

using namespace rlvr;
using namespace rlvr::grpo;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(GroupAdvantages, TwoOfEight) {
  const auto a = group_advantages(vec({1, 1, 0, 0, 0, 0, 0, 0}));
  // mean 0.25, population std sqrt(0.1875)
  const double s = std::sqrt(0.1875);
  EXPECT_NEAR(a.values[0], 0.75 / s, 1e-12);
  EXPECT_NEAR(a.values[0], 1.7320508, 1e-7);
  for (int i = 2; i < 8; ++i) EXPECT_NEAR(a.values[i], -0.5773503, 1e-7);
  EXPECT_FALSE(a.degenerate);
}

TEST(GroupAdvantages, ConstantAndPair) {
  for (double c : {0.0, 0.1, 1.0, -3.5, 1e6}) {
    const auto a = group_advantages(VectorXd::Constant(8, c));
    EXPECT_TRUE(a.degenerate);
    EXPECT_EQ(a.values, VectorXd::Zero(8));
  }
  const auto p = group_advantages(vec({1, 0}));
  EXPECT_EQ(p.values[0], 1.0);
  EXPECT_EQ(p.values[1], -1.0);
}

TEST(GroupAdvantages, NonFinite) {
  try {
    group_advantages(vec({1, NAN}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
  }
  EXPECT_THROW(group_advantages(vec({INFINITY, 0})), Error);
}

TEST(GroupAdvantages, FloatInstantiation) {
  Eigen::VectorXf r(2);
  r << 1.0f, 0.0f;
  const auto a = group_advantages(r, 1e-6f);
  EXPECT_FLOAT_EQ(a.values[0], 1.0f);
}

TEST(ClippedTerm, Examples) {
  EXPECT_DOUBLE_EQ(clipped_term(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_term(0.5, -1.0, 0.2), -0.8);
  for (double a : {-2.0, -0.3, 0.0, 0.7, 5.0}) {
    for (double eps : {0.1, 0.2, 0.5}) EXPECT_EQ(clipped_term(1.0, a, eps), a);
  }
}

TEST(GrpoObjective, Examples) {
  GrpoConfig cfg;
  RolloutGroup<double> g;
  g.rewards = vec({1, 0});
  g.logp_old = vec({-2.0, -3.0});
  g.logp_new = g.logp_old.array() + std::log(1.5);
  EXPECT_NEAR(grpo_objective(g, cfg), -0.15, 1e-12);

  g.logp_new = g.logp_old;
  EXPECT_NEAR(grpo_objective(g, cfg), 0.0, 1e-15);

  RolloutGroup<double> flat;
  flat.rewards = VectorXd::Constant(4, 0.1);
  flat.logp_old = vec({-1, -2, -3, -4});
  flat.logp_new = vec({-1.1, -2.2, -2.9, -4.0});
  flat.logp_ref = vec({-1.0, -1.5, -3.5, -4.2});
  EXPECT_DOUBLE_EQ(grpo_objective(flat, cfg), -cfg.kl_beta * kl_penalty(flat.logp_new, *flat.logp_ref));
}

TEST(KlPenalty, Examples) {
  const VectorXd x = vec({-1, -2, -0.5});
  EXPECT_EQ(kl_penalty(x, x), 0.0);
  EXPECT_NEAR(kl_penalty(vec({0.0}), vec({std::log(2.0)})), 2.0 - std::log(2.0) - 1.0, 1e-15);
  EXPECT_NEAR(kl_penalty(vec({0.0}), vec({std::log(2.0)})), 0.3068528, 1e-7);
  EXPECT_THROW(kl_penalty(vec({0.0}), vec({NAN})), Error);
}

TEST(GrpoProperty, AdvantageMomentsAndAffineInvariance) {
  std::mt19937_64 rng(1);
  for (int iter = 0; iter < 2000; ++iter) {
    const int g = rlvr::test::uniform_int(rng, 2, 16);
    VectorXd r(g);
    for (int i = 0; i < g; ++i) r[i] = rlvr::test::uniform(rng, -3, 3);
    const auto a = group_advantages(r);
    ASSERT_LT(std::abs(a.values.mean()), 1e-9);
    const double sd = std::sqrt(a.values.squaredNorm() / g);
    ASSERT_NEAR(sd, 1.0, 1e-9);
    const double scale = rlvr::test::uniform(rng, 0.01, 100.0);
    const double shift = rlvr::test::uniform(rng, -10, 10);
    const auto b = group_advantages(VectorXd((scale * r.array() + shift).matrix()));
    ASSERT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(GrpoProperty, ClippedTermMonotoneInAdvantage) {
  std::mt19937_64 rng(2);
  for (int iter = 0; iter < 5000; ++iter) {
    const double ratio = rlvr::test::uniform(rng, 0.0, 3.0);
    const double a1 = rlvr::test::uniform(rng, -5, 5);
    const double a2 = a1 + rlvr::test::uniform(rng, 0, 5);
    ASSERT_LE(clipped_term(ratio, a1, 0.2), clipped_term(ratio, a2, 0.2));
  }
}

TEST(GrpoProperty, KlNonNegativeZeroIffEqual) {
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 3000; ++iter) {
    const int g = rlvr::test::uniform_int(rng, 1, 16);
    VectorXd a(g), b(g);
    for (int i = 0; i < g; ++i) {
      a[i] = rlvr::test::uniform(rng, -20, 0);
      b[i] = a[i] + rlvr::test::uniform(rng, -2, 2);
    }
    ASSERT_GE(kl_penalty(a, b), 0.0);
    ASSERT_GT(kl_penalty(a, b), 0.0);
    ASSERT_EQ(kl_penalty(a, a), 0.0);
  }
}

TEST(GrpoProperty, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  GrpoConfig cfg;
  const double h = 1e-5;
  int checked = 0;
  while (checked < 200) {
    const int g = rlvr::test::uniform_int(rng, 2, 16);
    RolloutGroup<double> grp;
    grp.rewards.resize(g);
    grp.logp_old.resize(g);
    grp.logp_new.resize(g);
    VectorXd ref(g);
    bool near_boundary = false;
    for (int i = 0; i < g; ++i) {
      grp.rewards[i] = static_cast<double>(rlvr::test::uniform_int(rng, 0, 1)) * 0.9 + 0.1 * rlvr::test::uniform_int(rng, 0, 1);
      grp.logp_old[i] = rlvr::test::uniform(rng, -30, -1);
      grp.logp_new[i] = grp.logp_old[i] + rlvr::test::uniform(rng, -0.4, 0.4);
      ref[i] = grp.logp_new[i] + rlvr::test::uniform(rng, -1, 1);
      const double ratio = std::exp(grp.logp_new[i] - grp.logp_old[i]);
      if (std::abs(ratio - 1.2) < 1e-3 || std::abs(ratio - 0.8) < 1e-3) near_boundary = true;
    }
    if (near_boundary || group_advantages(grp.rewards).degenerate) continue;
    grp.logp_ref = ref;
    const VectorXd analytic = grpo_objective_gradient(grp, cfg);
    VectorXd numeric(g);
    for (int i = 0; i < g; ++i) {
      auto plus = grp, minus = grp;
      plus.logp_new[i] += h;
      minus.logp_new[i] -= h;
      numeric[i] = (grpo_objective(plus, cfg) - grpo_objective(minus, cfg)) / (2 * h);
    }
    const double denom = std::max({analytic.norm(), numeric.norm(), 1e-12});
    ASSERT_LT((analytic - numeric).norm() / denom, 1e-5);
    ++checked;
  }
}

TEST(GrpoProperty, BoundarySlopeMatchesInteriorOneSidedDifference) {
  const double eps = 0.2, h = 1e-7;
  for (double a : {0.3, 1.0, 2.5}) {
    // upper boundary, positive advantage: interior is to the left
    const double r = 1.0 + eps;
    const double left = (clipped_term(r, a, eps) - clipped_term(r - h, a, eps)) / h;
    EXPECT_NEAR(clipped_term_slope(r, a, eps), left, 1e-6);
    // lower boundary, negative advantage: interior is to the right
    const double l = 1.0 - eps;
    const double right = (clipped_term(l + h, -a, eps) - clipped_term(l, -a, eps)) / h;
    EXPECT_NEAR(clipped_term_slope(l, -a, eps), right, 1e-6);
  }
  // beyond the boundary the clipped branch is flat
  EXPECT_EQ(clipped_term_slope(1.5, 1.0, eps), 0.0);
  EXPECT_EQ(clipped_term_slope(0.5, -1.0, eps), 0.0);
  // and the unclipped side keeps its slope
  EXPECT_EQ(clipped_term_slope(0.5, 1.0, eps), 1.0);
  EXPECT_EQ(clipped_term_slope(1.5, -1.0, eps), -1.0);
}

TEST(GrpoConfig, Validation) {
  GrpoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.clip_eps = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.group_size = 1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.std_floor = 0;
  EXPECT_THROW(c.validate(), Error);
}
