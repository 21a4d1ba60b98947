#include "rlvr/bench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "rlvr/bench/dataset_io.hpp"
#include "rlvr/error.hpp"
#include "rlvr/percent.hpp"

namespace rlvr::bench {
namespace {

Tally get(const std::map<QType, Tally>& m, QType t) {
  const auto it = m.find(t);
  return it == m.end() ? Tally{} : it->second;
}

EvalReport aggregate_impl(std::span<const Verdict> verdicts,
                          std::span<const std::optional<std::string>> failures,
                          std::span<const Problem> problems, std::string model) {
  if (verdicts.size() != problems.size()) {
    throw Error(ErrorCode::CardinalityMismatch,
                std::to_string(verdicts.size()) + " verdicts for " +
                    std::to_string(problems.size()) + " problems");
  }
  std::unordered_map<std::string, const Problem*> by_id;
  for (const auto& p : problems) {
    if (!by_id.emplace(p.id, &p).second) {
      throw Error(ErrorCode::CardinalityMismatch, "duplicate problem id " + p.id);
    }
  }
  EvalReport r;
  r.model = std::move(model);
  for (QType t : kAllQTypes) r.per_type[t] = {};
  std::unordered_map<std::string, bool> seen;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const Verdict& v = verdicts[i];
    const auto it = by_id.find(v.problem_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::CardinalityMismatch, "verdict for unknown problem " + v.problem_id);
    }
    if (!seen.emplace(v.problem_id, true).second) {
      throw Error(ErrorCode::CardinalityMismatch, "two verdicts for problem " + v.problem_id);
    }
    Tally& t = r.per_type[it->second->qtype];
    ++t.total;
    if (v.correct) ++t.correct;
    r.judge_call_count += v.judge_calls;
    if (i < failures.size() && failures[i]) r.failures.push_back({v.problem_id, *failures[i]});
  }
  std::sort(r.failures.begin(), r.failures.end(),
            [](const Failure& a, const Failure& b) { return a.problem_id < b.problem_id; });
  return r;
}

nlohmann::ordered_json tally_json(const Tally& t) {
  return {{"correct", t.correct}, {"total", t.total}, {"accuracy", format_percent(t.correct, t.total)}};
}

}  // namespace

Tally EvalReport::fill_in() const {
  Tally t = get(per_type, QType::FILL_25);
  t += get(per_type, QType::FILL_50);
  t += get(per_type, QType::FILL_75);
  return t;
}
Tally EvalReport::fec() const { return get(per_type, QType::FEC); }
Tally EvalReport::mcq() const { return get(per_type, QType::MCQ); }
Tally EvalReport::overall() const {
  Tally t;
  for (const auto& [_, v] : per_type) t += v;
  return t;
}

EvalReport aggregate(std::span<const Verdict> verdicts, std::span<const Problem> problems,
                     std::string model) {
  return aggregate_impl(verdicts, {}, problems, std::move(model));
}

EvalReport aggregate(std::span<const EvalRecord> records, std::span<const Problem> problems,
                     std::string model) {
  std::vector<Verdict> verdicts;
  std::vector<std::optional<std::string>> failures;
  verdicts.reserve(records.size());
  failures.reserve(records.size());
  for (const auto& rec : records) {
    if (rec.verdict.problem_id != rec.problem_id) {
      throw Error(ErrorCode::CardinalityMismatch, "record " + rec.problem_id + " holds a verdict for " +
                                                      rec.verdict.problem_id);
    }
    verdicts.push_back(rec.verdict);
    failures.push_back(rec.failure);
  }
  return aggregate_impl(verdicts, failures, problems, std::move(model));
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["summary"] = {{"MCQ", tally_json(r.mcq())},
                  {"Fill-in", tally_json(r.fill_in())},
                  {"FEC", tally_json(r.fec())},
                  {"Overall", tally_json(r.overall())}};
  nlohmann::ordered_json types;
  for (const auto& [t, v] : r.per_type) types[std::string(to_string(t))] = tally_json(v);
  j["per_type"] = std::move(types);
  j["judge_call_count"] = r.judge_call_count;
  if (!r.failures.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : r.failures) arr.push_back({{"problem_id", f.problem_id}, {"reason", f.reason}});
    j["failures"] = std::move(arr);
  }
  return j;
}

std::string report_table(const EvalReport& r) {
  std::string out;
  if (!r.model.empty()) out += "Model: " + r.model + "\n";
  out += "MCQ  Fill-in  FEC  Overall\n";
  out += format_percent(r.mcq().correct, r.mcq().total) + "  " +
         format_percent(r.fill_in().correct, r.fill_in().total) + "  " +
         format_percent(r.fec().correct, r.fec().total) + "  " +
         format_percent(r.overall().correct, r.overall().total) + "\n\n";

  char line[128];
  auto row = [&](std::string_view name, const Tally& t) {
    std::snprintf(line, sizeof line, "%-8.*s %8zu %8zu %9s\n", static_cast<int>(name.size()),
                  name.data(), t.correct, t.total, format_percent(t.correct, t.total).c_str());
    out += line;
  };
  std::snprintf(line, sizeof line, "%-8s %8s %8s %9s\n", "Type", "Correct", "Total", "Accuracy");
  out += line;
  for (const auto& [t, v] : r.per_type) row(to_string(t), v);
  row("Fill-in", r.fill_in());
  row("Overall", r.overall());
  out += "\nJudge calls: " + std::to_string(r.judge_call_count) + "\n";
  if (!r.failures.empty()) {
    out += "\nFailures (" + std::to_string(r.failures.size()) + "):\n";
    for (const auto& f : r.failures) out += "  " + f.problem_id + ": " + f.reason + "\n";
  }
  return out;
}

void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path) {
  const std::string body =
      format == ReportFormat::Json ? report_to_json(report).dump(2) + "\n" : report_table(report);
  write_file(path, body);
}

}  // namespace rlvr::bench
