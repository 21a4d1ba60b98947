#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "rlvr/problem.hpp"

namespace rlvr {

enum class Tier { DIRECT, SYMBOLIC, JUDGE, NO_ANSWER };

std::string_view to_string(Tier t);
std::optional<Tier> parse_tier(std::string_view s);

struct Verdict {
  std::string problem_id;
  bool correct = false;
  Tier tier = Tier::NO_ANSWER;
  std::vector<bool> per_blank;
  bool judge_used = false;
  /// Judge requests issued while grading (cache hits excluded).
  std::size_t judge_calls = 0;
  /// A judge was configured but could not answer; the symbolic result stands
  /// and the harness may retry.
  bool judge_unavailable = false;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

nlohmann::ordered_json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

/// One per failed blank. Only context, gold and candidate go over the wire;
/// problem_id keys the cache.
struct JudgeRequest {
  std::string problem_id;
  std::string context;
  std::string gold;
  std::string candidate;
};

enum class JudgeOutcome { Yes, No, Unavailable };

struct JudgeReply {
  JudgeOutcome outcome = JudgeOutcome::Unavailable;
  /// Answered without reaching the oracle.
  bool cached = false;
};

/// External semantic-equivalence oracle. Implementations must tolerate
/// concurrent calls.
class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual JudgeReply decide(const JudgeRequest& request) = 0;
  /// Number of decisions that reached the underlying oracle.
  virtual std::size_t calls() const = 0;
};

/// Single-token YES/NO contract: anything other than a bare "yes"
/// (case-insensitive, surrounding whitespace and trailing punctuation
/// ignored) is NO.
bool parse_judge_reply(std::string_view reply);

std::string build_judge_prompt(const JudgeRequest& request);

/// Decisions keyed by (normalized candidate, normalized gold, problem id).
/// Safe for concurrent use.
class JudgeCache {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;

  static Key key_for(const JudgeRequest& request);

  std::optional<bool> find(const Key& key) const;
  void store(const Key& key, bool decision);
  std::size_t size() const;

  nlohmann::ordered_json to_json() const;
  static JudgeCache from_json(const nlohmann::json& j);

  JudgeCache() = default;
  JudgeCache(const JudgeCache& other);
  JudgeCache& operator=(const JudgeCache& other);

 private:
  mutable std::mutex mutex_;
  std::map<Key, bool> entries_;
};

/// Consults the cache before the wrapped judge; unavailable outcomes are not
/// cached.
class CachingJudge : public JudgeClient {
 public:
  CachingJudge(JudgeClient* inner, JudgeCache* cache) : inner_(inner), cache_(cache) {}

  JudgeReply decide(const JudgeRequest& request) override;
  std::size_t calls() const override { return inner_ ? inner_->calls() : 0; }

 private:
  JudgeClient* inner_;
  JudgeCache* cache_;
};

struct VerifyOptions {
  /// When false, a response without any `\boxed{}` is graded using its
  /// trimmed full text as the single candidate.
  bool require_box = true;
};

/// Throws Error{TypeMismatch} on non-MCQ problems.
Verdict verify_mcq(std::string_view response, const Problem& problem,
                   const VerifyOptions& options = {});

/// Positional alignment of boxes to blanks. With more boxes than blanks the
/// last N are used; with fewer, the missing blanks fail. When a judge is
/// given, only symbolically failed blanks are sent to it.
/// Throws Error{TypeMismatch} on MCQ problems.
Verdict verify_fillin(std::string_view response, const Problem& problem,
                      JudgeClient* judge = nullptr, const VerifyOptions& options = {});

Verdict verify(std::string_view response, const Problem& problem, JudgeClient* judge = nullptr,
               const VerifyOptions& options = {});

}  // namespace rlvr
