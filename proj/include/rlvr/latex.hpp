#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rlvr::latex {

enum class TokenKind { Command, Symbol, GroupOpen, GroupClose, Number, Relation };

struct Token {
  TokenKind kind;
  std::string lexeme;

  friend bool operator==(const Token&, const Token&) = default;
};

/// A LaTeX math fragment without surrounding `$` delimiters. Construction
/// rejects text whose unescaped braces do not balance.
class Fragment {
 public:
  /// Throws Error{UnbalancedBraces}.
  explicit Fragment(std::string raw);

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

struct NormalForm {
  std::string canonical;
  std::size_t token_count = 0;

  friend bool operator==(const NormalForm&, const NormalForm&) = default;
};

/// Lexes `text` into tokens. Whitespace separates tokens and is dropped,
/// except for the control space `\ ` which is kept as a command.
/// Throws Error{UnbalancedBraces}.
std::vector<Token> tokenize(std::string_view text);
inline std::vector<Token> tokenize(const Fragment& f) { return tokenize(f.raw()); }

/// Canonical form used for answer equivalence:
///   - whitespace removed,
///   - style commands (\mathbf, \boldsymbol, \mathrm, \text) dropped and their
///     argument spliced into the surrounding sequence,
///   - sizing/spacing commands (\left, \right, \, \; \! and `\ `) dropped,
///   - groups holding a single element unwrapped, bottom-up.
/// A letter directly following a letter-named command is braced so the
/// canonical text re-lexes to the same tokens.
NormalForm normalize(const Fragment& f);
NormalForm normalize(std::string_view text);

/// Commands removed (or unwrapped) by normalize.
const std::vector<std::string_view>& stripped_commands();

/// Symbolic equivalence: equal canonical forms after sorting the depth-0
/// `+`-separated terms of each relation side. Non-lexable input only matches
/// another non-lexable input with identical whitespace-free text.
bool equivalent(std::string_view a, std::string_view b);

/// The comparison key used by `equivalent` for lexable input.
std::string commutative_key(std::string_view text);

}  // namespace rlvr::latex
