#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rlvr {

struct BoxedScan {
  /// Contents of each terminated `\boxed{...}`, in document order.
  std::vector<std::string> fragments;
  /// Number of `\boxed{` occurrences whose braces never closed.
  std::size_t unterminated = 0;
};

struct ExtractedAnswers {
  std::vector<std::string> boxed;
  std::optional<char> mcq_letter;
  std::size_t unterminated = 0;
};

/// Balanced-brace scan for `\boxed{...}`. Escaped braces (`\{`, `\}`) do
/// not count toward depth. An unterminated box is skipped and scanning
/// resumes just after its opening brace.
BoxedScan scan_boxed(std::string_view response);

inline std::vector<std::string> extract_boxed(std::string_view response) {
  return scan_boxed(response).fragments;
}

/// Reduces an answer fragment to a bare option letter if it is one:
/// `B`, ` B `, `\text{B}`, `\textbf{B}`, `(B)`, `B.`, `B:`.
std::optional<char> as_option_letter(std::string_view fragment);

/// Last boxed fragment that is an option letter A-D.
std::optional<char> extract_mcq_letter(std::string_view response);

ExtractedAnswers extract_answers(std::string_view response);

}  // namespace rlvr
