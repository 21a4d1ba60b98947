#include "rlvr/reward.hpp"

#include <cmath>
#include <string>

#include "rlvr/error.hpp"
#include "rlvr/extract.hpp"

namespace rlvr {

void RewardConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

double format_reward(std::string_view response) {
  return scan_boxed(response).fragments.empty() ? 0.0 : 1.0;
}

double accuracy_reward(std::string_view response, const Problem& problem, JudgeClient* judge,
                       const RewardConfig& cfg) {
  VerifyOptions options;
  options.require_box = cfg.require_box_for_accuracy;
  return verify(response, problem, cfg.use_judge ? judge : nullptr, options).correct ? 1.0 : 0.0;
}

double combined_reward(double format, double accuracy, const RewardConfig& cfg) {
  return cfg.alpha * format + (1.0 - cfg.alpha) * accuracy;
}

ScoredResponse score_response(std::string_view response, const Problem& problem,
                              const RewardConfig& cfg, JudgeClient* judge) {
  cfg.validate();
  VerifyOptions options;
  options.require_box = cfg.require_box_for_accuracy;
  ScoredResponse out;
  out.verdict = verify(response, problem, cfg.use_judge ? judge : nullptr, options);
  out.reward.format = format_reward(response);
  out.reward.accuracy = out.verdict.correct ? 1.0 : 0.0;
  out.reward.total = combined_reward(out.reward.format, out.reward.accuracy, cfg);
  return out;
}

}  // namespace rlvr
