#include <algorithm>
#include <cctype>
#include <numeric>
#include <optional>
#include <random>

#include "rlvr/dataset_tools.hpp"
#include "rlvr/error.hpp"
#include "rlvr/latex.hpp"

namespace rlvr::dataset {
namespace {

enum class ItemKind { Atom, Sign, Relation, Infix };

struct Item {
  ItemKind kind;
  Span span;
};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

constexpr std::string_view kRelationCommands[] = {
    "\\triangleq", "\\leq", "\\geq", "\\le", "\\ge", "\\neq", "\\approx", "\\equiv", "\\propto"};
constexpr std::string_view kInfixCommands[] = {"\\cdot", "\\times"};
constexpr std::string_view kSpacing[] = {"\\quad", "\\qquad", "\\,", "\\;", "\\!", "\\:", "\\\\"};

template <std::size_t N>
bool one_of(std::string_view s, const std::string_view (&list)[N]) {
  return std::find(std::begin(list), std::end(list), s) != std::end(list);
}

/// Left-to-right scanner producing top-level items of an equation.
class Scanner {
 public:
  explicit Scanner(std::string_view text) : s_(text) {}

  std::vector<Item> scan() {
    std::vector<Item> items;
    std::size_t i = 0;
    while (i < s_.size()) {
      const char c = s_[i];
      if (is_space(c) || c == '&') {
        ++i;
        continue;
      }
      if (c == '+' || c == '-') {
        items.push_back({ItemKind::Sign, {i, i + 1}});
        ++i;
        continue;
      }
      if (c == '=' || c == '<' || c == '>') {
        items.push_back({ItemKind::Relation, {i, i + 1}});
        ++i;
        continue;
      }
      if (c == '\\') {
        const std::size_t end = command_end(i);
        const std::string_view name = s_.substr(i, end - i);
        if (one_of(name, kSpacing) || (name.size() == 2 && is_space(name[1]))) {
          i = end;
          continue;
        }
        if (one_of(name, kRelationCommands)) {
          items.push_back({ItemKind::Relation, {i, end}});
          i = end;
          continue;
        }
        if (one_of(name, kInfixCommands)) {
          items.push_back({ItemKind::Infix, {i, end}});
          i = end;
          continue;
        }
      }
      const std::size_t end = atom_end(i);
      items.push_back({ItemKind::Atom, {i, end}});
      i = end;
    }
    return items;
  }

 private:
  std::size_t command_end(std::size_t i) const {
    std::size_t j = i + 1;
    if (j >= s_.size()) return j;
    if (is_alpha(s_[j])) {
      while (j < s_.size() && is_alpha(s_[j])) ++j;
      return j;
    }
    return j + 1;
  }

  std::size_t skip_space(std::size_t i) const {
    while (i < s_.size() && is_space(s_[i])) ++i;
    return i;
  }

  // s_[i] == '{'
  std::size_t brace_group_end(std::size_t i) const {
    int depth = 0;
    for (std::size_t j = i; j < s_.size(); ++j) {
      if (s_[j] == '\\') {
        ++j;
      } else if (s_[j] == '{') {
        ++depth;
      } else if (s_[j] == '}' && --depth == 0) {
        return j + 1;
      }
    }
    return s_.size();
  }

  // s_[i] is '(' or '['; npos when unmatched
  std::size_t bracket_group_end(std::size_t i) const {
    int depth = 0;
    for (std::size_t j = i; j < s_.size();) {
      const char c = s_[j];
      if (c == '\\') {
        j = command_end(j);
        continue;
      }
      if (c == '{') {
        j = brace_group_end(j);
        continue;
      }
      if (c == '(' || c == '[') ++depth;
      if ((c == ')' || c == ']') && --depth == 0) return j + 1;
      ++j;
    }
    return std::string_view::npos;
  }

  // i points at "\left"; npos when no matching \right
  std::size_t left_right_end(std::size_t i) const {
    int depth = 0;
    for (std::size_t j = i; j < s_.size();) {
      if (s_[j] == '\\') {
        const std::size_t end = command_end(j);
        const std::string_view name = s_.substr(j, end - j);
        j = end;
        if (name == "\\left") {
          ++depth;
        } else if (name == "\\right" && --depth == 0) {
          j = skip_space(j);
          if (j >= s_.size()) return j;
          return s_[j] == '\\' ? command_end(j) : j + 1;
        }
        continue;
      }
      ++j;
    }
    return std::string_view::npos;
  }

  std::size_t char_end(std::size_t i) const {
    std::size_t j = i + 1;
    if ((static_cast<unsigned char>(s_[i]) & 0xC0) == 0xC0) {
      while (j < s_.size() && (static_cast<unsigned char>(s_[j]) & 0xC0) == 0x80) ++j;
    }
    return j;
  }

  std::size_t command_with_args_end(std::size_t i) const {
    std::size_t j = command_end(i);
    const std::string_view name = s_.substr(i, j - i);
    if (name.size() < 2 || !is_alpha(name[1])) return j;
    if (name == "\\sqrt") {
      const std::size_t k = skip_space(j);
      if (k < s_.size() && s_[k] == '[') {
        const std::size_t e = bracket_group_end(k);
        if (e != std::string_view::npos) j = e;
      }
    }
    for (;;) {
      const std::size_t k = skip_space(j);
      if (k < s_.size() && s_[k] == '{') {
        j = brace_group_end(k);
      } else {
        return j;
      }
    }
  }

  std::size_t scripts_end(std::size_t j) const {
    for (;;) {
      const std::size_t k = skip_space(j);
      if (k >= s_.size()) return j;
      if (s_[k] == '\'') {
        j = k + 1;
        continue;
      }
      if (s_[k] != '^' && s_[k] != '_') return j;
      const std::size_t a = skip_space(k + 1);
      if (a >= s_.size()) return s_.size();
      if (s_[a] == '{') {
        j = brace_group_end(a);
      } else if (s_[a] == '\\') {
        j = command_with_args_end(a);
      } else {
        j = char_end(a);
      }
    }
  }

  std::size_t atom_end(std::size_t i) const {
    const char c = s_[i];
    std::size_t j;
    if (c == '\\') {
      const std::size_t name_end = command_end(i);
      if (s_.substr(i, name_end - i) == "\\left") {
        const std::size_t e = left_right_end(i);
        j = e != std::string_view::npos ? e : command_with_args_end(i);
      } else {
        j = command_with_args_end(i);
      }
    } else if (c == '{') {
      j = brace_group_end(i);
    } else if (c == '(' || c == '[') {
      const std::size_t e = bracket_group_end(i);
      j = e != std::string_view::npos ? e : i + 1;
    } else if (is_digit(c)) {
      j = i;
      while (j < s_.size() && (is_digit(s_[j]) || s_[j] == '.')) ++j;
    } else {
      j = char_end(i);
    }
    return scripts_end(j);
  }

  std::string_view s_;
};

std::vector<Item> rhs_items(std::string_view equation) {
  auto items = Scanner(equation).scan();
  auto rel = std::find_if(items.begin(), items.end(),
                          [](const Item& it) { return it.kind == ItemKind::Relation; });
  if (rel == items.end()) return items;
  return {rel + 1, items.end()};
}

void validate_level(int level) {
  if (level != 25 && level != 50 && level != 75 && level != 100) {
    throw Error(ErrorCode::InvalidConfig, "mask level must be 25, 50, 75 or 100");
  }
}

}  // namespace

Span right_hand_side(std::string_view equation) {
  const auto items = rhs_items(equation);
  if (items.empty()) return {equation.size(), equation.size()};
  return {items.front().span.begin, items.back().span.end};
}

std::vector<Span> maskable_components(std::string_view equation) {
  const auto items = rhs_items(equation);
  std::vector<Span> terms;
  std::vector<std::vector<Span>> term_atoms;
  std::optional<Span> current;
  std::vector<Span> atoms;
  bool after_atom = false;
  auto close = [&] {
    if (current) {
      terms.push_back(*current);
      term_atoms.push_back(atoms);
    }
    current.reset();
    atoms.clear();
    after_atom = false;
  };
  for (const auto& item : items) {
    switch (item.kind) {
      case ItemKind::Sign:
        if (after_atom) close();  // binary; a leading sign stays outside the span
        break;
      case ItemKind::Relation:
        close();
        break;
      case ItemKind::Infix:
        after_atom = false;
        break;
      case ItemKind::Atom:
        if (!current) {
          current = item.span;
        } else {
          current->end = item.span.end;
        }
        atoms.push_back(item.span);
        after_atom = true;
        break;
    }
  }
  close();
  if (terms.size() >= 2) return terms;
  if (term_atoms.size() == 1) return term_atoms.front();
  return terms;
}

MaskedVariant mask_equation(std::string_view equation, int level, std::uint64_t seed) {
  validate_level(level);
  if (equation.find(kMask) != std::string_view::npos) {
    throw Error(ErrorCode::InvalidConfig, "equation already contains [MASK]");
  }
  (void)latex::tokenize(equation);

  std::vector<Span> chosen;
  if (level == 100) {
    const Span rhs = right_hand_side(equation);
    if (rhs.size() == 0) throw Error(ErrorCode::TooFewComponents, "empty right-hand side");
    chosen.push_back(rhs);
  } else {
    const auto components = maskable_components(equation);
    const std::size_t n = components.size();
    if (n < 2) {
      throw Error(ErrorCode::TooFewComponents,
                  std::to_string(n) + " maskable component(s); partial masking needs 2");
    }
    const std::size_t k =
        std::clamp<std::size_t>((static_cast<std::size_t>(level) * n + 50) / 100, 1, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
      std::swap(order[i], order[j]);
    }
    order.resize(k);
    std::sort(order.begin(), order.end());
    for (std::size_t idx : order) chosen.push_back(components[idx]);
  }

  MaskedVariant out;
  out.level = level;
  out.origin_equation = std::string(equation);
  std::size_t pos = 0;
  for (const Span& s : chosen) {
    out.equation.append(equation.substr(pos, s.begin - pos));
    out.equation.append(kMask);
    out.gold.emplace_back(equation.substr(s.begin, s.size()));
    pos = s.end;
  }
  out.equation.append(equation.substr(pos));
  return out;
}

std::string fill_masks(std::string_view masked, std::span<const std::string> gold) {
  std::string out;
  std::size_t pos = 0;
  std::size_t used = 0;
  for (std::size_t at = masked.find(kMask); at != std::string_view::npos;
       at = masked.find(kMask, pos)) {
    if (used == gold.size()) {
      throw Error(ErrorCode::CardinalityMismatch, "more [MASK] placeholders than gold entries");
    }
    out.append(masked.substr(pos, at - pos));
    out.append(gold[used++]);
    pos = at + kMask.size();
  }
  if (used != gold.size()) {
    throw Error(ErrorCode::CardinalityMismatch, "fewer [MASK] placeholders than gold entries");
  }
  out.append(masked.substr(pos));
  return out;
}

}  // namespace rlvr::dataset
