#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rlvr/bench/eval.hpp"
#include "rlvr/problem.hpp"
#include "rlvr/verify.hpp"

namespace rlvr::bench {

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;

  Tally& operator+=(const Tally& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
  friend bool operator==(const Tally&, const Tally&) = default;
};

struct Failure {
  std::string problem_id;
  std::string reason;

  friend bool operator==(const Failure&, const Failure&) = default;
};

struct EvalReport {
  std::string model;
  std::map<QType, Tally> per_type;  // every QType present, possibly zero
  std::size_t judge_call_count = 0;
  std::vector<Failure> failures;    // sorted by problem id

  Tally fill_in() const;  // FILL_25 + FILL_50 + FILL_75
  Tally fec() const;
  Tally mcq() const;
  Tally overall() const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Matches verdicts to problems by id. Throws Error{CardinalityMismatch} if
/// the two sets differ.
EvalReport aggregate(std::span<const Verdict> verdicts, std::span<const Problem> problems,
                     std::string model = {});

/// Same, taking failures from the records.
EvalReport aggregate(std::span<const EvalRecord> records, std::span<const Problem> problems,
                     std::string model = {});

nlohmann::ordered_json report_to_json(const EvalReport& report);

/// Headline row `MCQ  Fill-in  FEC  Overall`, then a per-type breakdown.
std::string report_table(const EvalReport& report);

enum class ReportFormat { Json, Table };

/// Byte-identical for identical reports. Throws Error{IoFailure}.
void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace rlvr::bench
