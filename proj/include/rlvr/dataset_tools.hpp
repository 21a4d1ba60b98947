#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rlvr/problem.hpp"

namespace rlvr::dataset {

// ---------------------------------------------------------------------------
// Progressive masking

struct MaskedVariant {
  int level = 100;
  std::string equation;
  std::vector<std::string> gold;
  std::string origin_equation;
};

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Byte span of the right-hand side: everything after the first depth-0
/// relation, whitespace-trimmed. The whole equation when there is no relation.
Span right_hand_side(std::string_view equation);

/// Maskable components of the right-hand side: its depth-0 terms (split at
/// binary +/- and relations) or, for a single term, its depth-0 factors.
std::vector<Span> maskable_components(std::string_view equation);

/// Replaces round(level% x components), at least one, seeded-randomly chosen
/// components with [MASK]. Level 100 masks the whole right-hand side and does
/// not depend on the seed.
/// Throws Error{TooFewComponents}, Error{UnbalancedBraces}, Error{InvalidConfig}.
MaskedVariant mask_equation(std::string_view equation, int level, std::uint64_t seed);

/// Substitutes `gold` into the [MASK] placeholders in order.
/// Throws Error{CardinalityMismatch} when the counts differ.
std::string fill_masks(std::string_view masked, std::span<const std::string> gold);

// ---------------------------------------------------------------------------
// Expert consensus

struct ReviewRecord {
  std::string question_id;
  std::vector<int> scores;
  int reviewer_count = 0;
};

struct ConsensusDecision {
  bool accept = false;
  double consensus = 0.0;

  friend bool operator==(const ConsensusDecision&, const ConsensusDecision&) = default;
};

inline constexpr int kAcceptThreshold = 3;

/// Mean reviewer score; accepted when the mean is at least 3.
/// Throws Error{InsufficientReviewers} below two scores and
/// Error{SchemaViolation} on out-of-range scores or a count mismatch.
ConsensusDecision consensus_decision(const ReviewRecord& record);

ReviewRecord review_from_json(const nlohmann::json& j);

/// Import shape of an automated quality assessment (overall score, six
/// dimension scores, two flags, free-text analysis).
struct QualityAssessment {
  int overall_score = 0;
  std::map<std::string, int> dimension_scores;
  bool is_correct = false;
  bool is_wireless_related = false;
  std::vector<std::string> strengths;
  std::vector<std::string> weaknesses;
  std::vector<std::string> specific_improvements;
};

QualityAssessment quality_assessment_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Stratified split

struct Split {
  std::vector<Problem> train;
  std::vector<Problem> test;
};

/// Per-type test counts: each stratum gets floor or ceil of
/// test_fraction x count, and the total is round(test_fraction x N).
std::map<QType, std::size_t> stratum_test_counts(const std::map<QType, std::size_t>& counts,
                                                 double test_fraction);

/// Deterministic per seed; input order is kept inside train and test.
/// Throws Error{InvalidConfig} unless 0 < test_fraction < 1.
Split split_dataset(std::span<const Problem> problems, double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Distribution statistics

struct DistributionReport {
  std::size_t total = 0;
  std::map<QType, std::size_t> by_type;
  /// Keys 1..5; problems without a score land in `missing_quality`.
  std::map<int, std::size_t> by_quality;
  std::size_t missing_quality = 0;
  std::map<std::string, std::size_t> by_source;
};

DistributionReport dataset_stats(std::span<const Problem> problems);
nlohmann::ordered_json stats_to_json(const DistributionReport& report);
std::string stats_table(const DistributionReport& report);

}  // namespace rlvr::dataset
