#include "rlvr/verify.hpp"

#include <algorithm>
#include <cctype>

#include "rlvr/error.hpp"
#include "rlvr/extract.hpp"
#include "rlvr/latex.hpp"

namespace rlvr {
namespace {

std::string trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string normalized_or_raw(const std::string& s) {
  try {
    return latex::normalize(s).canonical;
  } catch (const Error&) {
    return trimmed(s);
  }
}

std::vector<std::string> candidates_for(std::string_view response, const VerifyOptions& options) {
  auto boxed = extract_boxed(response);
  if (boxed.empty() && !options.require_box) {
    auto whole = trimmed(response);
    if (!whole.empty()) boxed.push_back(std::move(whole));
  }
  return boxed;
}

}  // namespace

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::DIRECT: return "DIRECT";
    case Tier::SYMBOLIC: return "SYMBOLIC";
    case Tier::JUDGE: return "JUDGE";
    case Tier::NO_ANSWER: return "NO_ANSWER";
  }
  return "?";
}

std::optional<Tier> parse_tier(std::string_view s) {
  for (Tier t : {Tier::DIRECT, Tier::SYMBOLIC, Tier::JUDGE, Tier::NO_ANSWER}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

nlohmann::ordered_json verdict_to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["problem_id"] = v.problem_id;
  j["correct"] = v.correct;
  j["tier"] = std::string(to_string(v.tier));
  j["per_blank"] = v.per_blank;
  j["judge_used"] = v.judge_used;
  j["judge_calls"] = v.judge_calls;
  if (v.judge_unavailable) j["judge_unavailable"] = true;
  return j;
}

Verdict verdict_from_json(const nlohmann::json& j) {
  Verdict v;
  try {
    v.problem_id = j.at("problem_id").get<std::string>();
    v.correct = j.at("correct").get<bool>();
    const auto tier = parse_tier(j.at("tier").get<std::string>());
    if (!tier) throw Error(ErrorCode::SchemaViolation, "unknown tier");
    v.tier = *tier;
    v.per_blank = j.at("per_blank").get<std::vector<bool>>();
    v.judge_used = j.value("judge_used", false);
    v.judge_calls = j.value("judge_calls", std::size_t{0});
    v.judge_unavailable = j.value("judge_unavailable", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("verdict: ") + e.what());
  }
  return v;
}

bool parse_judge_reply(std::string_view reply) {
  std::string s = trimmed(reply);
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.size() != 3) return false;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s == "yes";
}

std::string build_judge_prompt(const JudgeRequest& request) {
  std::string prompt;
  prompt += "You are checking whether a candidate answer to a technical mathematics problem is "
            "mathematically equivalent to the reference answer.\n\n";
  prompt += "**Context**\n" + request.context + "\n\n";
  prompt += "**Reference answer**\n" + request.gold + "\n\n";
  prompt += "**Candidate answer**\n" + request.candidate + "\n\n";
  prompt += "Reply with exactly one word: YES if the candidate is equivalent to the reference, "
            "NO otherwise.";
  return prompt;
}

JudgeCache::Key JudgeCache::key_for(const JudgeRequest& request) {
  return {normalized_or_raw(request.candidate), normalized_or_raw(request.gold),
          request.problem_id};
}

JudgeCache::JudgeCache(const JudgeCache& other) {
  std::lock_guard lock(other.mutex_);
  entries_ = other.entries_;
}

JudgeCache& JudgeCache::operator=(const JudgeCache& other) {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    entries_ = other.entries_;
  }
  return *this;
}

std::optional<bool> JudgeCache::find(const Key& key) const {
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void JudgeCache::store(const Key& key, bool decision) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(key, decision);
}

std::size_t JudgeCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

nlohmann::ordered_json JudgeCache::to_json() const {
  std::lock_guard lock(mutex_);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [key, decision] : entries_) {
    nlohmann::ordered_json e;
    e["candidate"] = std::get<0>(key);
    e["gold"] = std::get<1>(key);
    e["problem_id"] = std::get<2>(key);
    e["equivalent"] = decision;
    arr.push_back(std::move(e));
  }
  return arr;
}

JudgeCache JudgeCache::from_json(const nlohmann::json& j) {
  JudgeCache cache;
  if (!j.is_array()) throw Error(ErrorCode::SchemaViolation, "judge cache must be an array");
  for (const auto& e : j) {
    try {
      cache.entries_.insert_or_assign(
          Key{e.at("candidate").get<std::string>(), e.at("gold").get<std::string>(),
              e.at("problem_id").get<std::string>()},
          e.at("equivalent").get<bool>());
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::SchemaViolation, std::string("judge cache entry: ") + ex.what());
    }
  }
  return cache;
}

JudgeReply CachingJudge::decide(const JudgeRequest& request) {
  const auto key = JudgeCache::key_for(request);
  if (cache_) {
    if (auto hit = cache_->find(key)) return {*hit ? JudgeOutcome::Yes : JudgeOutcome::No, true};
  }
  if (!inner_) return {JudgeOutcome::Unavailable, true};
  const auto reply = inner_->decide(request);
  if (cache_ && reply.outcome != JudgeOutcome::Unavailable) {
    cache_->store(key, reply.outcome == JudgeOutcome::Yes);
  }
  return reply;
}

Verdict verify_mcq(std::string_view response, const Problem& problem,
                   const VerifyOptions& options) {
  if (problem.qtype != QType::MCQ) {
    throw Error(ErrorCode::TypeMismatch, "verify_mcq on " + std::string(to_string(problem.qtype)) +
                                             " problem " + problem.id);
  }
  Verdict v;
  v.problem_id = problem.id;
  const auto candidates = candidates_for(response, options);
  std::optional<char> letter;
  for (auto it = candidates.rbegin(); it != candidates.rend() && !letter; ++it) {
    letter = as_option_letter(*it);
  }
  if (!letter) {
    v.tier = Tier::NO_ANSWER;
    v.per_blank = {false};
    return v;
  }
  v.tier = Tier::DIRECT;
  const bool match = !problem.gold.empty() && problem.gold.front().size() == 1 &&
                     problem.gold.front()[0] == *letter;
  v.per_blank = {match};
  v.correct = match;
  return v;
}

Verdict verify_fillin(std::string_view response, const Problem& problem, JudgeClient* judge,
                      const VerifyOptions& options) {
  if (problem.qtype == QType::MCQ) {
    throw Error(ErrorCode::TypeMismatch, "verify_fillin on MCQ problem " + problem.id);
  }
  Verdict v;
  v.problem_id = problem.id;
  const std::size_t blanks = problem.gold.size();
  auto candidates = candidates_for(response, options);
  v.per_blank.assign(blanks, false);
  if (candidates.empty() || blanks == 0) {
    v.tier = Tier::NO_ANSWER;
    return v;
  }
  if (candidates.size() > blanks) {
    candidates.erase(candidates.begin(),
                     candidates.end() - static_cast<std::ptrdiff_t>(blanks));
  }
  v.tier = Tier::SYMBOLIC;
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    v.per_blank[i] = latex::equivalent(candidates[i], problem.gold[i]);
    if (!v.per_blank[i]) failed.push_back(i);
  }
  // Missing candidates cannot be rescued by the judge, so it is skipped.
  if (judge && !failed.empty() && candidates.size() == blanks) {
    std::vector<bool> rescued = v.per_blank;
    bool unavailable = false;
    for (std::size_t i : failed) {
      const auto reply =
          judge->decide({problem.id, problem.background, problem.gold[i], candidates[i]});
      if (!reply.cached) ++v.judge_calls;
      if (reply.outcome == JudgeOutcome::Unavailable) {
        unavailable = true;
        break;
      }
      rescued[i] = reply.outcome == JudgeOutcome::Yes;
    }
    if (unavailable) {
      v.judge_unavailable = true;
    } else {
      v.per_blank = std::move(rescued);
      v.judge_used = true;
      v.tier = Tier::JUDGE;
    }
  }
  v.correct = std::all_of(v.per_blank.begin(), v.per_blank.end(), [](bool b) { return b; });
  return v;
}

Verdict verify(std::string_view response, const Problem& problem, JudgeClient* judge,
               const VerifyOptions& options) {
  if (problem.qtype == QType::MCQ) return verify_mcq(response, problem, options);
  return verify_fillin(response, problem, judge, options);
}

}  // namespace rlvr
