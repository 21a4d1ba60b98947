#pragma once

#include <cstdint>
#include <string>

namespace rlvr {

/// 100 * num / den in hundredths, rounded half-up with integer arithmetic.
/// Zero when den is zero.
std::uint64_t percent_hundredths(std::uint64_t num, std::uint64_t den);

/// Two-decimal rendering of percent_hundredths, e.g. 316/800 -> "39.50".
std::string format_percent(std::uint64_t num, std::uint64_t den);

}  // namespace rlvr
