#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>
#include <string>

#include "json.hpp"
#include "rlvr/problem.hpp"

namespace rlvr::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(RLVR_FIXTURE_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json load_json(const std::string& name) {
  return nlohmann::json::parse(slurp(fixture(name)));
}

/// Scratch directory unique to the calling test binary.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("rlvr-test-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline Problem fill_problem(std::string id, QType type, std::string equation,
                            std::vector<std::string> gold) {
  Problem p;
  p.id = std::move(id);
  p.qtype = type;
  p.background = "Background.";
  p.question = "Question?";
  p.equation = std::move(equation);
  p.gold = std::move(gold);
  return p;
}

inline Problem mcq_problem(std::string id, std::string gold_letter) {
  Problem p;
  p.id = std::move(id);
  p.qtype = QType::MCQ;
  p.background = "Background.";
  p.question = "Which option fits " + p.id + "?";
  p.equation = "y = [MASK]";
  p.options = std::map<char, std::string>{{'A', "a"}, {'B', "b"}, {'C', "c"}, {'D', "d"}};
  p.gold = {std::move(gold_letter)};
  return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace rlvr::test
