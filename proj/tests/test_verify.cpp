#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>

#include "rlvr/error.hpp"
#include "rlvr/verify.hpp"
#include "support.hpp"

using namespace rlvr;
using rlvr::test::fill_problem;
using rlvr::test::mcq_problem;

namespace {

/// Answers from a table keyed by candidate text; counts every call.
class TableJudge : public JudgeClient {
 public:
  explicit TableJudge(std::map<std::string, JudgeOutcome> table, JudgeOutcome fallback = JudgeOutcome::No)
      : table_(std::move(table)), fallback_(fallback) {}
  JudgeReply decide(const JudgeRequest& r) override {
    ++calls_;
    last_ = r;
    const auto it = table_.find(r.candidate);
    return {it == table_.end() ? fallback_ : it->second};
  }
  std::size_t calls() const override { return calls_; }
  JudgeRequest last_;

 private:
  std::map<std::string, JudgeOutcome> table_;
  JudgeOutcome fallback_;
  std::atomic<std::size_t> calls_{0};
};

Problem beamforming() {
  return fill_problem("18369", QType::FEC, "s_{m} = [MASK]",
                      {"\\sqrt{P_{m}} \\sum_{k=1}^{K} \\sqrt{\\eta_{m k}} \\hat{g}_{m k}^{*} u_{k}"});
}

Problem three_blank() {
  return fill_problem("4173", QType::FILL_75,
                      "I'(t) = ([MASK] + A_0)[MASK](\\Delta\\phi) + (Q(t) + A_0)[MASK](\\Delta\\phi)",
                      {"I(t)", "\\cos", "\\sin"});
}

void check_invariants(const Verdict& v) {
  const bool all = !v.per_blank.empty() &&
                   std::all_of(v.per_blank.begin(), v.per_blank.end(), [](bool b) { return b; });
  EXPECT_EQ(v.correct, all);
  if (v.tier == Tier::NO_ANSWER) {
    EXPECT_FALSE(v.correct);
  }
}

}  // namespace

TEST(VerifyMcq, Examples) {
  const auto b = mcq_problem("11325", "B");
  auto v = verify_mcq("the correct answer is: $\\boxed{B}$", b);
  EXPECT_TRUE(v.correct);
  EXPECT_EQ(v.tier, Tier::DIRECT);
  v = verify_mcq("Therefore \\boxed{C}", b);
  EXPECT_FALSE(v.correct);
  EXPECT_EQ(v.tier, Tier::DIRECT);
  v = verify_mcq("I think it is A", mcq_problem("x", "A"));
  EXPECT_FALSE(v.correct);
  EXPECT_EQ(v.tier, Tier::NO_ANSWER);
  check_invariants(v);
}

TEST(VerifyMcq, TypeMismatch) {
  try {
    verify_mcq("\\boxed{A}", beamforming());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TypeMismatch);
  }
  EXPECT_THROW(verify_fillin("\\boxed{A}", mcq_problem("m", "A")), Error);
}

TEST(VerifyFillin, SymbolicFailureThenJudge) {
  const auto p = beamforming();
  const std::string resp = "So, the final answer is: $\\boxed{\\sum_{k \\in \\mathcal{K}} \\eta_{mk} \\hat{g}_{mk}^* u_k}$";
  auto v = verify_fillin(resp, p);
  EXPECT_FALSE(v.correct);
  EXPECT_EQ(v.tier, Tier::SYMBOLIC);

  TableJudge yes({}, JudgeOutcome::Yes);
  v = verify_fillin(resp, p, &yes);
  EXPECT_TRUE(v.correct);
  EXPECT_EQ(v.tier, Tier::JUDGE);
  EXPECT_TRUE(v.judge_used);
  EXPECT_EQ(v.judge_calls, 1u);
  EXPECT_EQ(yes.last_.context, p.background);
  EXPECT_EQ(yes.last_.gold, p.gold[0]);
}

TEST(VerifyFillin, ThreeBlanks) {
  const auto p = three_blank();
  auto v = verify_fillin("\\boxed{I(t)}, \\boxed{\\cos}, \\boxed{\\sin}", p);
  EXPECT_TRUE(v.correct);
  EXPECT_EQ(v.per_blank, (std::vector<bool>{true, true, true}));
  EXPECT_EQ(v.tier, Tier::SYMBOLIC);

  v = verify_fillin("\\boxed{I(t)}, \\boxed{\\cos}", p);
  EXPECT_FALSE(v.correct);
  EXPECT_EQ(v.per_blank, (std::vector<bool>{true, true, false}));
  check_invariants(v);
}

TEST(VerifyFillin, FewerBoxesSkipJudge) {
  TableJudge yes({}, JudgeOutcome::Yes);
  const auto v = verify_fillin("\\boxed{I(t)}, \\boxed{\\cos}", three_blank(), &yes);
  EXPECT_FALSE(v.correct);
  EXPECT_EQ(yes.calls(), 0u);
}

TEST(VerifyFillin, ExtraBoxesUseTheLastOnes) {
  const auto v = verify_fillin("first try \\boxed{x}. Final: \\boxed{I(t)}, \\boxed{\\cos}, \\boxed{\\sin}",
                               three_blank());
  EXPECT_TRUE(v.correct);
}

TEST(VerifyFillin, OnlyFailedBlanksGoToJudge) {
  TableJudge judge({{"\\sin(x)", JudgeOutcome::Yes}});
  const auto v = verify_fillin("\\boxed{I(t)}, \\boxed{\\cos}, \\boxed{\\sin(x)}", three_blank(), &judge);
  EXPECT_EQ(judge.calls(), 1u);
  EXPECT_EQ(judge.last_.candidate, "\\sin(x)");
  EXPECT_TRUE(v.correct);
  EXPECT_EQ(v.tier, Tier::JUDGE);
}

TEST(VerifyFillin, UnavailableJudgeKeepsSymbolicResult) {
  TableJudge down({}, JudgeOutcome::Unavailable);
  const auto v = verify_fillin("\\boxed{G}", fill_problem("2406", QType::FILL_25, "x^{[MASK]}", {"\\frac{G}{2}-1"}), &down);
  EXPECT_FALSE(v.correct);
  EXPECT_EQ(v.tier, Tier::SYMBOLIC);
  EXPECT_TRUE(v.judge_unavailable);
  EXPECT_FALSE(v.judge_used);
}

TEST(Verify, Dispatch) {
  const auto m = mcq_problem("m", "D");
  EXPECT_EQ(verify("\\boxed{D}", m), verify_mcq("\\boxed{D}", m));
  const auto f = beamforming();
  EXPECT_EQ(verify("\\boxed{x}", f), verify_fillin("\\boxed{x}", f));
}

TEST(Verify, NonTokenizableCandidateFailsSymbolically) {
  const auto p = fill_problem("p", QType::FILL_50, "a = [MASK] + [MASK]", {"b", "c"});
  const auto v = verify("\\boxed{b}, \\boxed{\\{c}", p);
  EXPECT_FALSE(v.correct);
  EXPECT_EQ(v.tier, Tier::SYMBOLIC);
}

TEST(Verify, RequireBoxOption) {
  const auto p = fill_problem("p", QType::FEC, "y = [MASK]", {"a + b"});
  EXPECT_EQ(verify("b + a", p).tier, Tier::NO_ANSWER);
  EXPECT_TRUE(verify("  b + a\n", p, nullptr, VerifyOptions{false}).correct);
}

TEST(VerifyProperty, MonotoneDeterministicAllOrNothing) {
  std::mt19937_64 rng(3);
  const auto p = three_blank();
  const std::vector<std::string> pool = {"I(t)", "\\cos", "\\sin", "\\tan", "Q(t)", "\\mathbf{I}(t)", "{\\sin}"};
  for (int iter = 0; iter < 500; ++iter) {
    std::string resp = "Work. ";
    const int n = rlvr::test::uniform_int(rng, 0, 4);
    for (int i = 0; i < n; ++i) resp += "\\boxed{" + pool[static_cast<std::size_t>(rlvr::test::uniform_int(rng, 0, 6))] + "} ";
    const auto a = verify(resp, p);
    const auto b = verify(resp, p);
    ASSERT_EQ(a, b);
    check_invariants(a);

    TableJudge judge({}, JudgeOutcome::Yes);
    const auto j = verify(resp, p, &judge);
    if (a.correct) {
      ASSERT_FALSE(j.judge_used);
      ASSERT_EQ(judge.calls(), 0u);
    }
    for (std::size_t i = 0; i < a.per_blank.size(); ++i) {
      auto flipped = a.per_blank;
      flipped[i] = false;
      ASSERT_FALSE(std::all_of(flipped.begin(), flipped.end(), [](bool x) { return x; }));
    }
  }
}

TEST(VerifyProperty, GoldEchoVerifies) {
  for (const auto& p : {beamforming(), three_blank()}) {
    std::string resp;
    for (const auto& g : p.gold) resp += "\\boxed{" + g + "} ";
    const auto v = verify(resp, p);
    EXPECT_TRUE(v.correct);
    EXPECT_EQ(v.tier, Tier::SYMBOLIC);
  }
  for (char c : {'A', 'B', 'C', 'D'}) {
    const auto v = verify(std::string("\\boxed{") + c + "}", mcq_problem("m", std::string(1, c)));
    EXPECT_TRUE(v.correct);
    EXPECT_EQ(v.tier, Tier::DIRECT);
  }
}

TEST(JudgeReply, Parsing) {
  EXPECT_TRUE(parse_judge_reply("YES"));
  EXPECT_TRUE(parse_judge_reply(" yes.\n"));
  EXPECT_FALSE(parse_judge_reply("NO"));
  EXPECT_FALSE(parse_judge_reply("Yes, they are equivalent"));
  EXPECT_FALSE(parse_judge_reply(""));
}

TEST(JudgeCache, CachesDecisionsNotOutages) {
  TableJudge inner({{"x", JudgeOutcome::Yes}, {"down", JudgeOutcome::Unavailable}});
  JudgeCache cache;
  CachingJudge judge(&inner, &cache);
  const JudgeRequest r{"p", "ctx", "y", "x"};
  EXPECT_EQ(judge.decide(r).outcome, JudgeOutcome::Yes);
  const auto again = judge.decide(r);
  EXPECT_EQ(again.outcome, JudgeOutcome::Yes);
  EXPECT_TRUE(again.cached);
  EXPECT_EQ(inner.calls(), 1u);
  judge.decide({"p", "ctx", "y", "down"});
  judge.decide({"p", "ctx", "y", "down"});
  EXPECT_EQ(inner.calls(), 3u);
  EXPECT_EQ(cache.size(), 1u);

  const auto restored = JudgeCache::from_json(nlohmann::json::parse(cache.to_json().dump()));
  EXPECT_EQ(restored.find(JudgeCache::key_for(r)), std::optional<bool>(true));
  // keys use normalized text
  EXPECT_EQ(restored.find(JudgeCache::key_for({"p", "other", "y", "\\mathbf{x}"})), std::optional<bool>(true));
}

TEST(VerdictJson, RoundTrip) {
  Verdict v;
  v.problem_id = "7";
  v.correct = true;
  v.tier = Tier::JUDGE;
  v.per_blank = {true, true};
  v.judge_used = true;
  v.judge_calls = 2;
  EXPECT_EQ(verdict_from_json(nlohmann::json::parse(verdict_to_json(v).dump())), v);
}
