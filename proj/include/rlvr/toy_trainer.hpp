#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlvr/grpo.hpp"
#include "rlvr/problem.hpp"
#include "rlvr/reward.hpp"

namespace rlvr::grpo {

/// Synthetic problem bank. answer_vocabulary[p] lists complete candidate
/// responses for problem p; exactly one of them verifies correct.
struct ToyTask {
  std::vector<Problem> problems;
  std::vector<std::vector<std::string>> answer_vocabulary;

  /// Index of the verifying entry per problem. Throws Error{InvalidConfig}
  /// when a problem has zero or several verifying entries.
  std::vector<int> correct_indices() const;
};

/// `problems` single-blank items, each with `answers` candidates: the gold
/// response, boxed distractors and unboxed responses. Candidate order is
/// shuffled with `seed`.
ToyTask make_synthetic_task(int problems, int answers, std::uint64_t seed);

struct CurvePoint {
  int step = 0;
  /// Mean probability of the correct answer under the eval-temperature policy.
  double accuracy = 0.0;
  /// Fraction of problems whose argmax answer is correct.
  double greedy_accuracy = 0.0;
};

struct ToyTrainOptions {
  int eval_every = 5;
  /// Optimisation passes over each sampled group (1 = purely on-policy).
  int inner_epochs = 2;
  RewardConfig reward;
};

struct ToyTrainResult {
  std::vector<CurvePoint> curve;
  /// problems x answers logits of the final policy.
  Eigen::MatrixXd logits;
  double final_greedy_accuracy = 0.0;
  int degenerate_groups = 0;
};

/// Softmax policy over each problem's candidates, initialised uniform (which
/// is also the frozen KL reference). Every step samples a group of
/// cfg.group_size candidates per problem at cfg.temperature_train and ascends
/// the GRPO objective with plain gradient steps of size cfg.learning_rate.
/// Groups with degenerate rewards are skipped entirely.
ToyTrainResult train_toy_policy(const ToyTask& task, const GrpoConfig& cfg, int steps,
                                std::uint64_t seed, const ToyTrainOptions& options = {});

/// One gradient step's worth of logit update for one problem given sampled
/// candidate indices and their rewards; returns false when the group was
/// degenerate and nothing changed.
bool apply_group_update(Eigen::Ref<Eigen::VectorXd> logits, const Eigen::VectorXd& ref_logits,
                        const std::vector<int>& samples, const Eigen::VectorXd& rewards,
                        const GrpoConfig& cfg, int inner_epochs);

/// Two columns, "step accuracy", one row per curve point.
std::string curve_table(const ToyTrainResult& result);
nlohmann::ordered_json toy_report(const ToyTrainResult& result, const GrpoConfig& cfg,
                                  std::uint64_t seed, int steps);

}  // namespace rlvr::grpo
