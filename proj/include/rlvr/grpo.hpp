#pragma once

// Group-relative policy optimisation kernel: advantages standardised within a
// rollout group, the clipped importance-weighted surrogate and a k3 KL
// estimator. Dense Eigen types throughout, templated on the scalar.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "rlvr/error.hpp"

namespace rlvr::grpo {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct GrpoConfig {
  int group_size = 8;
  double clip_eps = 0.2;
  double kl_beta = 0.01;
  double std_floor = 1e-8;
  double learning_rate = 1e-6;
  double temperature_train = 1.0;
  double temperature_eval = 0.6;

  void validate() const {
    if (group_size < 2) throw Error(ErrorCode::InvalidConfig, "group_size must be >= 2");
    if (!(clip_eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "clip_eps must be > 0");
    if (!(std_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "std_floor must be > 0");
    if (!(kl_beta >= 0.0)) throw Error(ErrorCode::InvalidConfig, "kl_beta must be >= 0");
    if (!(temperature_train > 0.0) || !(temperature_eval > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "temperatures must be > 0");
    }
  }
};

/// G sampled responses for one problem. Log-probabilities are of whole
/// responses; logp_ref is optional and enables the KL term.
template <typename Scalar>
struct RolloutGroup {
  std::string problem_id;
  Vector<Scalar> rewards;
  Vector<Scalar> logp_old;
  Vector<Scalar> logp_new;
  std::optional<Vector<Scalar>> logp_ref;
};

template <typename Scalar>
struct Advantages {
  Vector<Scalar> values;
  /// Population std fell below the floor; every advantage is zero.
  bool degenerate = false;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " contains a non-finite value");
  }
}

template <typename Scalar>
void require_same_length(const RolloutGroup<Scalar>& g) {
  const auto n = g.rewards.size();
  if (n < 1 || g.logp_old.size() != n || g.logp_new.size() != n ||
      (g.logp_ref && g.logp_ref->size() != n)) {
    throw Error(ErrorCode::InvalidConfig, "rollout group vectors must share a non-zero length");
  }
}

}  // namespace detail

/// A_i = (r_i - mean(r)) / std(r), population std. Groups whose std is below
/// `std_floor` get all-zero advantages.
template <typename Derived>
Advantages<typename Derived::Scalar> group_advantages(
    const Eigen::MatrixBase<Derived>& rewards, typename Derived::Scalar std_floor = 1e-8) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(rewards, "rewards");
  const auto n = rewards.size();
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "empty reward group");
  const Scalar mean = rewards.mean();
  const Vector<Scalar> centered = rewards.array() - mean;
  const Scalar std = std::sqrt(centered.squaredNorm() / static_cast<Scalar>(n));
  Advantages<Scalar> out;
  if (std < std_floor) {
    out.values = Vector<Scalar>::Zero(n);
    out.degenerate = true;
  } else {
    out.values = centered / std;
  }
  return out;
}

/// min(ratio * A, clamp(ratio, 1 - eps, 1 + eps) * A)
template <typename Scalar>
Scalar clipped_term(Scalar ratio, Scalar advantage, Scalar clip_eps) {
  const Scalar clipped = std::clamp(ratio, Scalar(1) - clip_eps, Scalar(1) + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

/// d clipped_term / d ratio. At ties between the two branches the unclipped
/// branch's derivative is used.
template <typename Scalar>
Scalar clipped_term_slope(Scalar ratio, Scalar advantage, Scalar clip_eps) {
  const Scalar lo = Scalar(1) - clip_eps;
  const Scalar hi = Scalar(1) + clip_eps;
  const Scalar unclipped = ratio * advantage;
  const Scalar clipped = std::clamp(ratio, lo, hi) * advantage;
  if (unclipped <= clipped) return advantage;
  return (ratio > lo && ratio < hi) ? advantage : Scalar(0);
}

/// Mean over samples of exp(d) - d - 1 with d = logp_ref - logp_new.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar kl_penalty(const Eigen::MatrixBase<DerivedA>& logp_new,
                                     const Eigen::MatrixBase<DerivedB>& logp_ref) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_finite(logp_new, "logp_new");
  detail::require_finite(logp_ref, "logp_ref");
  if (logp_new.size() != logp_ref.size() || logp_new.size() == 0) {
    throw Error(ErrorCode::InvalidConfig, "kl_penalty needs equal, non-zero lengths");
  }
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> d = (logp_ref - logp_new).array();
  return (d.exp() - d - Scalar(1)).mean();
}

/// d kl_penalty / d logp_new.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> kl_penalty_gradient(
    const Eigen::MatrixBase<DerivedA>& logp_new, const Eigen::MatrixBase<DerivedB>& logp_ref) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> d = (logp_ref - logp_new).array();
  return ((Scalar(1) - d.exp()) / static_cast<Scalar>(d.size())).matrix();
}

/// (1/G) sum_i clipped_term(exp(logp_new_i - logp_old_i), A_i, eps)
///   - kl_beta * kl_penalty(logp_new, logp_ref)   (when logp_ref is present)
template <typename Scalar>
Scalar grpo_objective(const RolloutGroup<Scalar>& group, const GrpoConfig& cfg) {
  detail::require_same_length(group);
  detail::require_finite(group.logp_old, "logp_old");
  detail::require_finite(group.logp_new, "logp_new");
  const auto adv = group_advantages(group.rewards, static_cast<Scalar>(cfg.std_floor));
  const Vector<Scalar> ratio = (group.logp_new - group.logp_old).array().exp().matrix();
  const auto eps = static_cast<Scalar>(cfg.clip_eps);
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    sum += clipped_term(ratio[i], adv.values[i], eps);
  }
  Scalar objective = sum / static_cast<Scalar>(ratio.size());
  if (group.logp_ref) {
    objective -= static_cast<Scalar>(cfg.kl_beta) * kl_penalty(group.logp_new, *group.logp_ref);
  }
  return objective;
}

/// Analytic gradient of grpo_objective with respect to logp_new.
template <typename Scalar>
Vector<Scalar> grpo_objective_gradient(const RolloutGroup<Scalar>& group, const GrpoConfig& cfg) {
  detail::require_same_length(group);
  detail::require_finite(group.logp_old, "logp_old");
  detail::require_finite(group.logp_new, "logp_new");
  const auto adv = group_advantages(group.rewards, static_cast<Scalar>(cfg.std_floor));
  const Vector<Scalar> ratio = (group.logp_new - group.logp_old).array().exp().matrix();
  const auto eps = static_cast<Scalar>(cfg.clip_eps);
  const auto g = static_cast<Scalar>(ratio.size());
  Vector<Scalar> grad(ratio.size());
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    // d ratio / d logp_new = ratio
    grad[i] = clipped_term_slope(ratio[i], adv.values[i], eps) * ratio[i] / g;
  }
  if (group.logp_ref) {
    detail::require_finite(*group.logp_ref, "logp_ref");
    grad -= static_cast<Scalar>(cfg.kl_beta) * kl_penalty_gradient(group.logp_new, *group.logp_ref);
  }
  return grad;
}

}  // namespace rlvr::grpo
