#include "rlvr/bench/prompt.hpp"

namespace rlvr::bench {

std::string build_prompt(const Problem& problem) {
  std::string out;
  out += "**Background**\n" + problem.background + "\n\n";
  out += "**Question**\n" + problem.question + "\n\n";
  out += "**Equation**\n" + problem.equation + "\n\n";

  if (problem.qtype == QType::MCQ) {
    out += "**Options**\n";
    for (char letter : {'A', 'B', 'C', 'D'}) {
      std::string text;
      if (problem.options) {
        if (auto it = problem.options->find(letter); it != problem.options->end()) text = it->second;
      }
      out += std::string(1, letter) + ": " + text + "\n";
    }
    out += "\n---\n";
    out += "Please analyze this problem step by step. Show your reasoning and calculations.\n";
    out += "Your final answer should be given at the end in the format: \\boxed{X} where X is "
           "the letter of the correct option.";
    return out;
  }

  out += "---\n";
  out += "Please solve this problem step by step. Fill in the [MASK] placeholder(s) with the "
         "correct mathematical expression(s).\n";
  const std::size_t blanks = count_masks(problem.equation);
  if (blanks <= 1) {
    out += "Your final answer should be given at the end in the format: \\boxed{your\\_answer}";
  } else {
    out += "Your final answers should be given at the end in the format:\n";
    out += "\\boxed{answer1}, \\boxed{answer2}, ... (for the " + std::to_string(blanks) +
           " blanks in order)";
  }
  return out;
}

}  // namespace rlvr::bench
