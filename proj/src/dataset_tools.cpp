#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "rlvr/dataset_tools.hpp"
#include "rlvr/error.hpp"
#include "rlvr/percent.hpp"

namespace rlvr::dataset {

ConsensusDecision consensus_decision(const ReviewRecord& record) {
  if (record.scores.size() < 2) {
    throw Error(ErrorCode::InsufficientReviewers,
                record.question_id + " has " + std::to_string(record.scores.size()) + " score(s)");
  }
  if (record.reviewer_count != static_cast<int>(record.scores.size())) {
    throw Error(ErrorCode::SchemaViolation,
                record.question_id + ": reviewer_count does not match the number of scores");
  }
  long sum = 0;
  for (int s : record.scores) {
    if (s < 1 || s > 5) {
      throw Error(ErrorCode::SchemaViolation, record.question_id + ": score outside 1..5");
    }
    sum += s;
  }
  const auto n = static_cast<long>(record.scores.size());
  ConsensusDecision d;
  d.consensus = static_cast<double>(sum) / static_cast<double>(n);
  d.accept = sum >= kAcceptThreshold * n;
  return d;
}

ReviewRecord review_from_json(const nlohmann::json& j) {
  ReviewRecord r;
  try {
    r.question_id = j.at("question_id").get<std::string>();
    r.scores = j.at("scores").get<std::vector<int>>();
    r.reviewer_count = j.contains("reviewer_count") ? j.at("reviewer_count").get<int>()
                                                    : static_cast<int>(r.scores.size());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("review record: ") + e.what());
  }
  return r;
}

QualityAssessment quality_assessment_from_json(const nlohmann::json& j) {
  QualityAssessment q;
  try {
    q.overall_score = j.at("overall_score").get<int>();
    if (q.overall_score < 1 || q.overall_score > 5) {
      throw Error(ErrorCode::SchemaViolation, "overall_score outside 1..5");
    }
    for (const auto& [k, v] : j.at("dimension_scores").items()) {
      q.dimension_scores[k] = v.get<int>();
    }
    const auto& flags = j.at("binary_flags");
    q.is_correct = flags.at("is_correct").get<bool>();
    q.is_wireless_related = flags.at("is_wireless_related").get<bool>();
    if (j.contains("quality_analysis")) {
      const auto& a = j.at("quality_analysis");
      q.strengths = a.value("strengths", std::vector<std::string>{});
      q.weaknesses = a.value("weaknesses", std::vector<std::string>{});
      q.specific_improvements = a.value("specific_improvements", std::vector<std::string>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("quality assessment: ") + e.what());
  }
  return q;
}

std::map<QType, std::size_t> stratum_test_counts(const std::map<QType, std::size_t>& counts,
                                                 double test_fraction) {
  std::size_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  const auto target = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(total)));

  // Largest-remainder apportionment: every stratum gets floor or ceil of its quota.
  struct Quota {
    QType type;
    std::size_t count;
    std::size_t base;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [type, c] : counts) {
    const double q = test_fraction * static_cast<double>(c);
    const auto base = static_cast<std::size_t>(std::floor(q));
    quotas.push_back({type, c, base, q - static_cast<double>(base)});
    assigned += base;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (quotas[a].remainder != quotas[b].remainder) return quotas[a].remainder > quotas[b].remainder;
    return quotas[a].count > quotas[b].count;
  });
  for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
    auto& q = quotas[order[i]];
    if (q.base < q.count && q.remainder > 0.0) {
      ++q.base;
      ++assigned;
    }
  }
  std::map<QType, std::size_t> out;
  for (const auto& q : quotas) out[q.type] = q.base;
  return out;
}

Split split_dataset(std::span<const Problem> problems, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "test_fraction must lie strictly between 0 and 1");
  }
  std::map<QType, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < problems.size(); ++i) strata[problems[i].qtype].push_back(i);
  std::map<QType, std::size_t> counts;
  for (const auto& [type, idx] : strata) counts[type] = idx.size();
  const auto test_counts = stratum_test_counts(counts, test_fraction);

  std::vector<bool> in_test(problems.size(), false);
  std::mt19937_64 rng(seed);
  for (auto& [type, idx] : strata) {
    // Fisher-Yates with the raw engine keeps results identical across
    // standard library implementations.
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng() % i)]);
    }
    const std::size_t k = test_counts.at(type);
    for (std::size_t i = 0; i < k; ++i) in_test[idx[i]] = true;
  }
  Split split;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    (in_test[i] ? split.test : split.train).push_back(problems[i]);
  }
  return split;
}

DistributionReport dataset_stats(std::span<const Problem> problems) {
  DistributionReport r;
  for (QType t : kAllQTypes) r.by_type[t] = 0;
  for (int q = 1; q <= 5; ++q) r.by_quality[q] = 0;
  for (const auto& p : problems) {
    ++r.total;
    ++r.by_type[p.qtype];
    if (p.quality_score) {
      ++r.by_quality[*p.quality_score];
    } else {
      ++r.missing_quality;
    }
    ++r.by_source[p.source_paper.empty() ? std::string("(unknown)") : p.source_paper];
  }
  return r;
}

nlohmann::ordered_json stats_to_json(const DistributionReport& r) {
  auto bucket = [&](std::size_t c) {
    return nlohmann::ordered_json{{"count", c}, {"percent", format_percent(c, r.total)}};
  };
  nlohmann::ordered_json j;
  j["total"] = r.total;
  nlohmann::ordered_json types;
  for (const auto& [t, c] : r.by_type) types[std::string(to_string(t))] = bucket(c);
  j["by_type"] = std::move(types);
  nlohmann::ordered_json quality;
  for (const auto& [q, c] : r.by_quality) quality[std::to_string(q)] = bucket(c);
  quality["missing"] = bucket(r.missing_quality);
  j["by_quality"] = std::move(quality);
  nlohmann::ordered_json sources = nlohmann::ordered_json::object();
  for (const auto& [s, c] : r.by_source) sources[s] = bucket(c);
  j["by_source"] = std::move(sources);
  return j;
}

std::string stats_table(const DistributionReport& r) {
  std::string out;
  char line[160];
  auto row = [&](const std::string& label, std::size_t c) {
    std::snprintf(line, sizeof line, "%-12s %8zu %8s\n", label.c_str(), c,
                  format_percent(c, r.total).c_str());
    out += line;
  };
  std::snprintf(line, sizeof line, "%-12s %8s %8s\n", "Type", "Count", "Percent");
  out += line;
  for (const auto& [t, c] : r.by_type) row(std::string(to_string(t)), c);
  out += '\n';
  std::snprintf(line, sizeof line, "%-12s %8s %8s\n", "Quality", "Count", "Percent");
  out += line;
  for (const auto& [q, c] : r.by_quality) row(std::to_string(q), c);
  row("missing", r.missing_quality);
  out += '\n';
  std::snprintf(line, sizeof line, "Total: %zu problems from %zu source(s)\n", r.total,
                r.by_source.size());
  out += line;
  return out;
}

}  // namespace rlvr::dataset
