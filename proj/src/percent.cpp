#include "rlvr/percent.hpp"

namespace rlvr {

std::uint64_t percent_hundredths(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return 0;
  return (20000 * num + den) / (2 * den);
}

std::string format_percent(std::uint64_t num, std::uint64_t den) {
  const auto h = percent_hundredths(num, den);
  std::string frac = std::to_string(h % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(h / 100) + "." + frac;
}

}  // namespace rlvr
