#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rlvr/bench/backend.hpp"
#include "rlvr/problem.hpp"
#include "rlvr/verify.hpp"

namespace rlvr::bench {

/// One graded problem. `failure` is set when no response could be obtained;
/// such records carry an incorrect NO_ANSWER verdict.
struct EvalRecord {
  std::string problem_id;
  std::string prompt_sha256;
  std::string response;
  Verdict verdict;
  std::optional<std::string> failure;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

nlohmann::ordered_json record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Queries the backend for every problem with at most cfg.max_parallel
/// requests in flight. Records come back in input order. Transient errors are
/// retried cfg.retry_limit times with exponential backoff; a problem that
/// still fails is recorded as a failure. Throws Error{BackendUnreachable}
/// when not a single request succeeds.
std::vector<EvalRecord> run_eval(std::span<const Problem> problems, ChatBackend& backend,
                                 const BackendConfig& cfg, JudgeClient* judge = nullptr);

/// Re-grades stored responses without touching any backend. Problems absent
/// from the store become failures.
std::vector<EvalRecord> regrade(std::span<const Problem> problems,
                                std::span<const EvalRecord> stored, JudgeClient* judge = nullptr);

void write_run_store(const std::filesystem::path& path, std::span<const EvalRecord> records);
std::vector<EvalRecord> read_run_store(const std::filesystem::path& path);

}  // namespace rlvr::bench
