#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace rlvr {

enum class QType { MCQ, FILL_25, FILL_50, FILL_75, FEC };

inline constexpr std::array<QType, 5> kAllQTypes = {QType::MCQ, QType::FILL_25, QType::FILL_50,
                                                    QType::FILL_75, QType::FEC};

std::string_view to_string(QType t);
std::optional<QType> parse_qtype(std::string_view s);

inline constexpr std::string_view kMask = "[MASK]";

/// One benchmark item. For MCQ, `gold` holds the single correct letter.
struct Problem {
  std::string id;
  QType qtype = QType::FEC;
  std::string background;
  std::string question;
  std::string equation;
  std::optional<std::map<char, std::string>> options;
  std::vector<std::string> gold;
  std::string source_paper;
  std::optional<int> quality_score;

  friend bool operator==(const Problem&, const Problem&) = default;
};

std::size_t count_masks(std::string_view equation);

/// Empty when the problem satisfies every structural invariant; otherwise one
/// message per breach.
std::vector<std::string> validate(const Problem& p);

/// Strict: unknown fields, missing required fields and wrong types throw
/// Error{SchemaViolation}. Invariants are checked too.
Problem problem_from_json(const nlohmann::json& j);
nlohmann::ordered_json problem_to_json(const Problem& p);

}  // namespace rlvr
