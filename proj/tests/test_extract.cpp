#include <gtest/gtest.h>

#include <random>

#include "rlvr/extract.hpp"
#include "support.hpp"

using namespace rlvr;
using rlvr::test::uniform_int;

TEST(ExtractBoxed, Examples) {
  EXPECT_EQ(extract_boxed("... the answer is \\boxed{B}"), std::vector<std::string>{"B"});
  EXPECT_EQ(extract_boxed("\\boxed{\\frac{G}{2}-1}"), std::vector<std::string>{"\\frac{G}{2}-1"});
  EXPECT_EQ(extract_boxed("$\\boxed{(\\lambda - \\lambda_p)^2}$, $\\boxed{(\\Delta\\lambda)^2}$"),
            (std::vector<std::string>{"(\\lambda - \\lambda_p)^2", "(\\Delta\\lambda)^2"}));
}

TEST(ExtractBoxed, EscapedBracesAndWhitespace) {
  EXPECT_EQ(extract_boxed("\\boxed {x\\}y}"), std::vector<std::string>{"x\\}y"});
  EXPECT_EQ(extract_boxed("\\boxed{\\{1,\\ldots,K\\}}"), std::vector<std::string>{"\\{1,\\ldots,K\\}"});
}

TEST(ExtractBoxed, Unterminated) {
  const auto s = scan_boxed("\\boxed{");
  EXPECT_TRUE(s.fragments.empty());
  EXPECT_EQ(s.unterminated, 1u);
  const auto t = scan_boxed("\\boxed{a \\boxed{b}");
  EXPECT_EQ(t.fragments, std::vector<std::string>{"b"});
  EXPECT_EQ(t.unterminated, 1u);
  EXPECT_TRUE(extract_boxed("\\boxed x").empty());
}

TEST(ExtractMcqLetter, Examples) {
  EXPECT_EQ(extract_mcq_letter("Thus, the correct answer is: $\\boxed{B}$"), 'B');
  EXPECT_EQ(extract_mcq_letter("\\boxed{C}"), 'C');
  EXPECT_EQ(extract_mcq_letter("\\boxed{\\frac{G}{2}-1}"), std::nullopt);
}

TEST(ExtractMcqLetter, LastLetterWinsAndDecorations) {
  EXPECT_EQ(extract_mcq_letter("maybe \\boxed{A} ... final \\boxed{D}"), 'D');
  EXPECT_EQ(extract_mcq_letter("\\boxed{A} then \\boxed{x^2}"), 'A');
  EXPECT_EQ(extract_mcq_letter("\\boxed{\\text{B}}"), 'B');
  EXPECT_EQ(extract_mcq_letter("\\boxed{\\textbf{(C)}}"), 'C');
  EXPECT_EQ(extract_mcq_letter("\\boxed{ A. }"), 'A');
  EXPECT_EQ(extract_mcq_letter("\\boxed{E}"), std::nullopt);
  EXPECT_EQ(extract_mcq_letter("\\boxed{AB}"), std::nullopt);
  EXPECT_EQ(extract_mcq_letter("answer B"), std::nullopt);
}

TEST(ExtractProperty, RoundTripInFiller) {
  std::mt19937_64 rng(99);
  static const char* pieces[] = {"x", "\\frac{a}{b}", "{y}", "\\{", "\\}", "^2", " ", "\\sqrt{\\eta}",
                                 "+", "\\mathbf{H}", "\\left(", "\\right)", "[MASK]", "é"};
  static const char* filler[] = {"Therefore ", "$$ a = b $$\n", "the answer is: ", "}", "{{",
                                 "\\box", "boxed{", "\n\n", "\\boxed"};
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<std::string> frags(static_cast<std::size_t>(uniform_int(rng, 0, 4)));
    for (auto& f : frags) {
      const int n = uniform_int(rng, 0, 5);
      for (int i = 0; i < n; ++i) f += pieces[uniform_int(rng, 0, 13)];
    }
    std::string text;
    for (const auto& f : frags) {
      // filler never ends in a way that would join with the next \boxed
      text += filler[uniform_int(rng, 0, 7)];
      text += " \\boxed{" + f + "} ";
    }
    if (uniform_int(rng, 0, 1)) text += filler[uniform_int(rng, 0, 8)];
    const auto got = extract_boxed(text);
    // stray `}` / `{{` filler can only precede a box, never sit inside one
    ASSERT_EQ(got, frags) << text;
  }
}

TEST(ExtractProperty, NeverThrowsOnArbitraryBytes) {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 5000; ++iter) {
    std::string s(static_cast<std::size_t>(uniform_int(rng, 0, 64)), '\0');
    for (auto& c : s) {
      const int pick = uniform_int(rng, 0, 9);
      c = pick < 3 ? "\\{}"[pick] : static_cast<char>(uniform_int(rng, 0, 255));
    }
    if (uniform_int(rng, 0, 2) == 0) s.insert(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(s.size()))), "\\boxed{");
    ExtractedAnswers a;
    ASSERT_NO_THROW(a = extract_answers(s));
    if (a.boxed.empty()) {
      ASSERT_FALSE(a.mcq_letter.has_value());
    }
  }
}
