#include "rlvr/latex.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "rlvr/error.hpp"

namespace rlvr::latex {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Style commands whose argument is spliced into the enclosing sequence.
constexpr std::string_view kStyleCommands[] = {"\\mathbf", "\\boldsymbol", "\\mathrm",
                                               "\\text"};
// Commands dropped outright.
constexpr std::string_view kSpacingCommands[] = {"\\left", "\\right", "\\,", "\\;", "\\!"};

bool is_style(std::string_view lexeme) {
  return std::find(std::begin(kStyleCommands), std::end(kStyleCommands), lexeme) !=
         std::end(kStyleCommands);
}

bool is_control_space(std::string_view lexeme) {
  return lexeme.size() == 2 && lexeme[0] == '\\' && is_space(lexeme[1]);
}

bool is_dropped(std::string_view lexeme) {
  return is_control_space(lexeme) ||
         std::find(std::begin(kSpacingCommands), std::end(kSpacingCommands), lexeme) !=
             std::end(kSpacingCommands);
}

bool is_sizing(std::string_view lexeme) { return lexeme == "\\left" || lexeme == "\\right"; }

bool is_alpha_command(std::string_view lexeme) {
  return lexeme.size() >= 2 && lexeme[0] == '\\' && is_alpha(lexeme[1]);
}

struct Node {
  bool group = false;
  Token token;
  std::vector<Node> children;
};

std::vector<Node> build_tree(const std::vector<Token>& tokens) {
  std::vector<std::vector<Node>> stack(1);
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::GroupOpen) {
      stack.emplace_back();
    } else if (t.kind == TokenKind::GroupClose) {
      Node g;
      g.group = true;
      g.children = std::move(stack.back());
      stack.pop_back();
      stack.back().push_back(std::move(g));
    } else {
      stack.back().push_back(Node{false, t, {}});
    }
  }
  return std::move(stack.front());
}

void push_unwrapped(std::vector<Node>& out, Node node) {
  if (node.group && node.children.size() == 1) {
    out.push_back(std::move(node.children.front()));
  } else {
    out.push_back(std::move(node));
  }
}

std::vector<Node> simplify(std::vector<Node> nodes) {
  std::vector<Node> out;
  out.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Node& node = nodes[i];
    if (node.group) {
      node.children = simplify(std::move(node.children));
      push_unwrapped(out, std::move(node));
      continue;
    }
    const std::string& lex = node.token.lexeme;
    if (node.token.kind == TokenKind::Command && is_style(lex)) {
      if (i + 1 < nodes.size() && nodes[i + 1].group) {
        for (auto& child : simplify(std::move(nodes[i + 1].children))) {
          out.push_back(std::move(child));
        }
        ++i;
      }
      continue;
    }
    if (node.token.kind == TokenKind::Command && is_dropped(lex)) {
      // \left. and \right. are invisible delimiters
      if (is_sizing(lex) && i + 1 < nodes.size() && !nodes[i + 1].group &&
          nodes[i + 1].token.lexeme == ".") {
        ++i;
      }
      continue;
    }
    out.push_back(std::move(node));
  }
  return out;
}

void render(const std::vector<Node>& nodes, std::string& out, bool& after_alpha_command) {
  for (const auto& node : nodes) {
    if (node.group) {
      out += '{';
      after_alpha_command = false;
      render(node.children, out, after_alpha_command);
      out += '}';
      after_alpha_command = false;
      continue;
    }
    const std::string& lex = node.token.lexeme;
    if (after_alpha_command && !lex.empty() && is_alpha(lex.front())) {
      out += '{';
      out += lex;
      out += '}';
      after_alpha_command = false;
    } else {
      out += lex;
      after_alpha_command = node.token.kind == TokenKind::Command && is_alpha_command(lex);
    }
  }
}

std::string render(const std::vector<Node>& nodes) {
  std::string out;
  bool flag = false;
  render(nodes, out, flag);
  return out;
}

constexpr std::string_view kRelationCommands[] = {"\\leq", "\\geq",  "\\le",       "\\ge",
                                                  "\\neq", "\\ne",   "\\approx",   "\\equiv",
                                                  "\\sim", "\\simeq", "\\triangleq", "\\propto"};

bool is_relation(const Node& n) {
  if (n.group) return false;
  if (n.token.kind == TokenKind::Relation) return true;
  return n.token.kind == TokenKind::Command &&
         std::find(std::begin(kRelationCommands), std::end(kRelationCommands),
                   n.token.lexeme) != std::end(kRelationCommands);
}

bool is_symbol(const Node& n, std::string_view s) {
  return !n.group && n.token.kind == TokenKind::Symbol && n.token.lexeme == s;
}

std::string sorted_side(const std::vector<Node>& side) {
  std::vector<std::string> terms;
  std::vector<Node> current;
  for (std::size_t i = 0; i < side.size(); ++i) {
    const Node& n = side[i];
    const bool separator = is_symbol(n, "+") && !current.empty() && i + 1 < side.size() &&
                           !is_symbol(current.back(), "^") && !is_symbol(current.back(), "_");
    if (separator) {
      terms.push_back(render(current));
      current.clear();
    } else {
      current.push_back(n);
    }
  }
  terms.push_back(render(current));
  std::sort(terms.begin(), terms.end());
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += '+';
    out += terms[i];
  }
  return out;
}

std::string strip_whitespace(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!is_space(c)) out += c;
  }
  return out;
}

}  // namespace

Fragment::Fragment(std::string raw) : raw_(std::move(raw)) { (void)tokenize(raw_); }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int depth = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '\\') {
      if (i + 1 >= n) {
        tokens.push_back({TokenKind::Symbol, "\\"});
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      if (is_alpha(text[j])) {
        while (j < n && is_alpha(text[j])) ++j;
      } else {
        ++j;
      }
      tokens.push_back({TokenKind::Command, std::string(text.substr(i, j - i))});
      i = j;
      continue;
    }
    if (c == '{') {
      ++depth;
      tokens.push_back({TokenKind::GroupOpen, "{"});
      ++i;
      continue;
    }
    if (c == '}') {
      if (depth == 0) {
        throw Error(ErrorCode::UnbalancedBraces,
                    "unmatched '}' at offset " + std::to_string(i));
      }
      --depth;
      tokens.push_back({TokenKind::GroupClose, "}"});
      ++i;
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < n && is_digit(text[j])) ++j;
      if (j + 1 < n && text[j] == '.' && is_digit(text[j + 1])) {
        ++j;
        while (j < n && is_digit(text[j])) ++j;
      }
      tokens.push_back({TokenKind::Number, std::string(text.substr(i, j - i))});
      i = j;
      continue;
    }
    if (c == '=' || c == '<' || c == '>') {
      tokens.push_back({TokenKind::Relation, std::string(1, c)});
      ++i;
      continue;
    }
    // one symbol per character; UTF-8 sequences stay whole
    std::size_t j = i + 1;
    if ((static_cast<unsigned char>(c) & 0xC0) == 0xC0) {
      while (j < n && (static_cast<unsigned char>(text[j]) & 0xC0) == 0x80) ++j;
    }
    tokens.push_back({TokenKind::Symbol, std::string(text.substr(i, j - i))});
    i = j;
  }
  if (depth != 0) {
    throw Error(ErrorCode::UnbalancedBraces, std::to_string(depth) + " unclosed '{'");
  }
  return tokens;
}

const std::vector<std::string_view>& stripped_commands() {
  static const std::vector<std::string_view> all = [] {
    std::vector<std::string_view> v(std::begin(kStyleCommands), std::end(kStyleCommands));
    v.insert(v.end(), std::begin(kSpacingCommands), std::end(kSpacingCommands));
    v.push_back("\\ ");
    return v;
  }();
  return all;
}

NormalForm normalize(std::string_view text) {
  const auto tree = simplify(build_tree(tokenize(text)));
  NormalForm nf;
  nf.canonical = render(tree);
  nf.token_count = tokenize(nf.canonical).size();
  return nf;
}

NormalForm normalize(const Fragment& f) { return normalize(f.raw()); }

std::string commutative_key(std::string_view text) {
  const auto tree = simplify(build_tree(tokenize(text)));
  std::string key;
  std::vector<Node> side;
  for (const auto& node : tree) {
    if (is_relation(node)) {
      key += sorted_side(side);
      key += '\x1f';
      key += node.token.lexeme;
      key += '\x1f';
      side.clear();
    } else {
      side.push_back(node);
    }
  }
  key += sorted_side(side);
  return key;
}

bool equivalent(std::string_view a, std::string_view b) {
  std::optional<std::string> ka;
  std::optional<std::string> kb;
  try {
    ka = commutative_key(a);
  } catch (const Error&) {
  }
  try {
    kb = commutative_key(b);
  } catch (const Error&) {
  }
  if (ka && kb) return *ka == *kb;
  if (!ka && !kb) return strip_whitespace(a) == strip_whitespace(b);
  return false;
}

}  // namespace rlvr::latex
