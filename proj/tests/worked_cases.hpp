#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlvr/problem.hpp"
#include "rlvr/verify.hpp"
#include "support.hpp"

namespace rlvr::test {

/// A worked response with its annotated outcome.
struct AnnotatedCase {
  Problem problem;
  std::string response;
  bool expected_correct = false;
  Tier expected_tier = Tier::NO_ANSWER;
  std::optional<bool> judge;
};

inline std::vector<AnnotatedCase> worked_cases() {
  std::vector<AnnotatedCase> out;
  for (const auto& j : load_json("worked_cases.json")) {
    AnnotatedCase c;
    c.problem = problem_from_json(j.at("problem"));
    c.response = j.at("response").get<std::string>();
    c.expected_correct = j.at("expected_correct").get<bool>();
    c.expected_tier = *parse_tier(j.at("expected_tier").get<std::string>());
    if (!j.at("judge").is_null()) c.judge = j.at("judge").get<std::string>() == "YES";
    out.push_back(std::move(c));
  }
  return out;
}

/// Replays the annotated judge decision per problem id.
class AnnotatedJudge : public JudgeClient {
 public:
  explicit AnnotatedJudge(const std::vector<AnnotatedCase>& cases) {
    for (const auto& c : cases) {
      if (c.judge) decisions_[c.problem.id] = *c.judge;
    }
  }
  JudgeReply decide(const JudgeRequest& r) override {
    ++calls_;
    const auto it = decisions_.find(r.problem_id);
    if (it == decisions_.end()) return {JudgeOutcome::Unavailable};
    return {it->second ? JudgeOutcome::Yes : JudgeOutcome::No};
  }
  std::size_t calls() const override { return calls_; }

 private:
  std::map<std::string, bool> decisions_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace rlvr::test
