#pragma once

#include <string>

#include "rlvr/problem.hpp"

namespace rlvr::bench {

/// Instantiates the standard evaluation template for the problem's type:
/// Background, Question, Equation (and Options A-D for MCQ), a `---` rule,
/// then the answer-format instruction. No trailing newline.
std::string build_prompt(const Problem& problem);

}  // namespace rlvr::bench
