#include "rlvr/extract.hpp"

#include <cctype>

namespace rlvr {
namespace {

constexpr std::string_view kBoxed = "\\boxed";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool strip_wrapper(std::string_view& s, std::string_view open, std::string_view close) {
  if (s.size() >= open.size() + close.size() && s.substr(0, open.size()) == open &&
      s.substr(s.size() - close.size()) == close) {
    s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
    return true;
  }
  return false;
}

}  // namespace

BoxedScan scan_boxed(std::string_view response) {
  BoxedScan scan;
  std::size_t pos = 0;
  while ((pos = response.find(kBoxed, pos)) != std::string_view::npos) {
    std::size_t open = pos + kBoxed.size();
    while (open < response.size() &&
           std::isspace(static_cast<unsigned char>(response[open]))) {
      ++open;
    }
    if (open >= response.size() || response[open] != '{') {
      pos += kBoxed.size();
      continue;
    }
    int depth = 1;
    std::size_t i = open + 1;
    for (; i < response.size() && depth > 0; ++i) {
      const char c = response[i];
      if (c == '\\') {
        ++i;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
      }
    }
    if (depth == 0) {
      scan.fragments.emplace_back(response.substr(open + 1, i - open - 2));
      pos = i;
    } else {
      ++scan.unterminated;
      pos = open + 1;
    }
  }
  return scan;
}

std::optional<char> as_option_letter(std::string_view fragment) {
  std::string_view s = trim(fragment);
  for (bool changed = true; changed;) {
    changed = strip_wrapper(s, "\\text{", "}") || strip_wrapper(s, "\\textbf{", "}") ||
              strip_wrapper(s, "\\mathrm{", "}") || strip_wrapper(s, "\\mathbf{", "}") ||
              strip_wrapper(s, "{", "}") || strip_wrapper(s, "(", ")");
    if (!changed && s.size() == 2 && (s.back() == '.' || s.back() == ':' || s.back() == ')')) {
      s.remove_suffix(1);
      changed = true;
    }
  }
  if (s.size() == 1 && s.front() >= 'A' && s.front() <= 'D') return s.front();
  return std::nullopt;
}

std::optional<char> extract_mcq_letter(std::string_view response) {
  const auto fragments = extract_boxed(response);
  for (auto it = fragments.rbegin(); it != fragments.rend(); ++it) {
    if (auto letter = as_option_letter(*it)) return letter;
  }
  return std::nullopt;
}

ExtractedAnswers extract_answers(std::string_view response) {
  auto scan = scan_boxed(response);
  ExtractedAnswers out;
  out.unterminated = scan.unterminated;
  for (auto it = scan.fragments.rbegin(); it != scan.fragments.rend(); ++it) {
    if (auto letter = as_option_letter(*it)) {
      out.mcq_letter = letter;
      break;
    }
  }
  out.boxed = std::move(scan.fragments);
  return out;
}

}  // namespace rlvr
