#pragma once

#include <string_view>

#include "rlvr/problem.hpp"
#include "rlvr/verify.hpp"

namespace rlvr {

struct RewardConfig {
  /// Weight of the format term; the accuracy term gets 1 - alpha.
  double alpha = 0.1;
  bool require_box_for_accuracy = true;
  /// Training-time rewards are symbolic-only unless this is set.
  bool use_judge = false;

  /// Throws Error{InvalidConfig} unless 0 <= alpha <= 1.
  void validate() const;
};

struct RewardBreakdown {
  double format = 0.0;
  double accuracy = 0.0;
  double total = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

/// 1 iff the response holds at least one `\boxed{` with a balancing `}`.
double format_reward(std::string_view response);

/// 1 iff verify(...).correct.
double accuracy_reward(std::string_view response, const Problem& problem,
                       JudgeClient* judge = nullptr, const RewardConfig& cfg = {});

/// alpha * format + (1 - alpha) * accuracy, evaluated literally.
double combined_reward(double format, double accuracy, const RewardConfig& cfg);

struct ScoredResponse {
  RewardBreakdown reward;
  Verdict verdict;
};

/// Scores one response on its full raw text. The judge is consulted only when
/// cfg.use_judge is set.
ScoredResponse score_response(std::string_view response, const Problem& problem,
                              const RewardConfig& cfg, JudgeClient* judge = nullptr);

}  // namespace rlvr
