#include "rlvr/problem.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "rlvr/error.hpp"

namespace rlvr {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// FEC items blank the right-hand side (or the whole statement).
bool is_full_completion(std::string_view equation) {
  std::string_view s = trim(equation);
  if (s.size() < kMask.size() || s.substr(s.size() - kMask.size()) != kMask) return false;
  s = trim(s.substr(0, s.size() - kMask.size()));
  if (s.empty()) return true;
  for (std::string_view rel : {"=", "\\triangleq", "\\approx", "\\equiv", "\\leq", "\\geq"}) {
    if (s.size() >= rel.size() && s.substr(s.size() - rel.size()) == rel) return true;
  }
  return false;
}

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::SchemaViolation, msg); }

std::string require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) schema(std::string("missing field '") + key + "'");
  if (!j.at(key).is_string()) schema(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

std::string_view to_string(QType t) {
  switch (t) {
    case QType::MCQ: return "MCQ";
    case QType::FILL_25: return "FILL_25";
    case QType::FILL_50: return "FILL_50";
    case QType::FILL_75: return "FILL_75";
    case QType::FEC: return "FEC";
  }
  return "?";
}

std::optional<QType> parse_qtype(std::string_view s) {
  for (QType t : kAllQTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::size_t count_masks(std::string_view equation) {
  std::size_t count = 0;
  for (std::size_t pos = equation.find(kMask); pos != std::string_view::npos;
       pos = equation.find(kMask, pos + kMask.size())) {
    ++count;
  }
  return count;
}

std::vector<std::string> validate(const Problem& p) {
  std::vector<std::string> errors;
  if (p.id.empty()) errors.emplace_back("empty id");
  if (p.quality_score && (*p.quality_score < 1 || *p.quality_score > 5)) {
    errors.emplace_back("quality_score outside 1..5");
  }
  if (p.qtype == QType::MCQ) {
    if (!p.options) {
      errors.emplace_back("MCQ without options");
    } else {
      const std::set<char> want = {'A', 'B', 'C', 'D'};
      std::set<char> have;
      for (const auto& [k, _] : *p.options) have.insert(k);
      if (have != want) errors.emplace_back("MCQ options must be exactly A-D");
    }
    if (p.gold.size() != 1 || p.gold.front().size() != 1 || p.gold.front()[0] < 'A' ||
        p.gold.front()[0] > 'D') {
      errors.emplace_back("MCQ gold must be a single letter A-D");
    }
    return errors;
  }
  if (p.options) errors.emplace_back("options present on a non-MCQ item");
  const std::size_t masks = count_masks(p.equation);
  if (masks == 0) errors.emplace_back("equation has no [MASK]");
  if (masks != p.gold.size()) {
    errors.emplace_back("equation has " + std::to_string(masks) + " [MASK] but gold has " +
                        std::to_string(p.gold.size()) + " entries");
  }
  if (p.qtype == QType::FEC && !is_full_completion(p.equation)) {
    errors.emplace_back("FEC equation must end in a whole-side [MASK]");
  }
  return errors;
}

Problem problem_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"id",      "qtype", "background",   "question",
                                              "equation", "options", "gold", "source_paper",
                                              "quality_score"};
  if (!j.is_object()) schema("problem must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) schema("unknown field '" + key + "'");
  }
  Problem p;
  p.id = require_string(j, "id");
  const auto qtype = parse_qtype(require_string(j, "qtype"));
  if (!qtype) schema("unknown qtype '" + j.at("qtype").get<std::string>() + "'");
  p.qtype = *qtype;
  p.background = require_string(j, "background");
  p.question = require_string(j, "question");
  p.equation = require_string(j, "equation");

  if (j.contains("options") && !j.at("options").is_null()) {
    const auto& o = j.at("options");
    if (!o.is_object()) schema("options must be an object");
    std::map<char, std::string> options;
    for (const auto& [k, v] : o.items()) {
      if (k.size() != 1 || !v.is_string()) schema("options must map single letters to strings");
      options[k[0]] = v.get<std::string>();
    }
    p.options = std::move(options);
  }
  if (!j.contains("gold")) schema("missing field 'gold'");
  const auto& g = j.at("gold");
  if (!g.is_array()) schema("gold must be an array of strings");
  for (const auto& e : g) {
    if (!e.is_string()) schema("gold must be an array of strings");
    p.gold.push_back(e.get<std::string>());
  }
  if (j.contains("source_paper") && !j.at("source_paper").is_null()) {
    p.source_paper = require_string(j, "source_paper");
  }
  if (j.contains("quality_score") && !j.at("quality_score").is_null()) {
    if (!j.at("quality_score").is_number_integer()) schema("quality_score must be an integer");
    p.quality_score = j.at("quality_score").get<int>();
  }
  if (auto errors = validate(p); !errors.empty()) {
    std::string msg = errors.front();
    for (std::size_t i = 1; i < errors.size(); ++i) msg += "; " + errors[i];
    schema(msg);
  }
  return p;
}

nlohmann::ordered_json problem_to_json(const Problem& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["qtype"] = std::string(to_string(p.qtype));
  j["background"] = p.background;
  j["question"] = p.question;
  j["equation"] = p.equation;
  if (p.options) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [k, v] : *p.options) o[std::string(1, k)] = v;
    j["options"] = std::move(o);
  }
  j["gold"] = p.gold;
  if (!p.source_paper.empty()) j["source_paper"] = p.source_paper;
  if (p.quality_score) j["quality_score"] = *p.quality_score;
  return j;
}

}  // namespace rlvr
