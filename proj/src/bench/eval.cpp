#include "rlvr/bench/eval.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <memory>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "rlvr/bench/dataset_io.hpp"
#include "rlvr/bench/prompt.hpp"
#include "rlvr/error.hpp"

namespace rlvr::bench {
namespace {

Verdict failed_verdict(const Problem& p) {
  Verdict v;
  v.problem_id = p.id;
  v.correct = false;
  v.tier = Tier::NO_ANSWER;
  v.per_blank.assign(p.qtype == QType::MCQ ? 1 : std::max<std::size_t>(p.gold.size(), 1), false);
  return v;
}

struct Attempt {
  std::optional<std::string> response;
  std::string error;
};

Attempt query_with_retry(ChatBackend& backend, const ChatRequest& req, const BackendConfig& cfg) {
  Attempt out;
  for (int attempt = 0;; ++attempt) {
    try {
      out.response = backend.complete(req);
      return out;
    } catch (const BackendError& e) {
      out.error = e.what();
      if (!e.transient() || attempt >= cfg.retry_limit) return out;
    } catch (const std::exception& e) {
      out.error = e.what();
      return out;
    }
    std::this_thread::sleep_for(cfg.retry_backoff * (1 << std::min(attempt, 6)));
  }
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

nlohmann::ordered_json record_to_json(const EvalRecord& r) {
  nlohmann::ordered_json j;
  j["problem_id"] = r.problem_id;
  j["prompt_sha256"] = r.prompt_sha256;
  j["response"] = r.response;
  j["verdict"] = verdict_to_json(r.verdict);
  if (r.failure) j["failure"] = *r.failure;
  return j;
}

EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  try {
    r.problem_id = j.at("problem_id").get<std::string>();
    r.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.verdict = verdict_from_json(j.at("verdict"));
    if (j.contains("failure")) r.failure = j.at("failure").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("run record: ") + e.what());
  }
  return r;
}

std::vector<EvalRecord> run_eval(std::span<const Problem> problems, ChatBackend& backend,
                                 const BackendConfig& cfg, JudgeClient* judge) {
  cfg.validate();
  std::vector<EvalRecord> records(problems.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> succeeded{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) {
      const Problem& p = problems[i];
      EvalRecord& rec = records[i];
      const std::string prompt = build_prompt(p);
      rec.problem_id = p.id;
      rec.prompt_sha256 = sha256_hex(prompt);
      const Attempt got =
          query_with_retry(backend, {cfg.model_name, prompt, cfg.temperature, cfg.max_tokens}, cfg);
      if (!got.response) {
        rec.verdict = failed_verdict(p);
        rec.failure = got.error;
        continue;
      }
      ++succeeded;
      rec.response = *got.response;
      rec.verdict = verify(rec.response, p, judge);
    }
  };

  const std::size_t n_workers = std::min(cfg.max_parallel, problems.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  if (!problems.empty() && succeeded.load() == 0) {
    throw Error(ErrorCode::BackendUnreachable,
                "no request succeeded; first error: " + records.front().failure.value_or("?"));
  }
  return records;
}

std::vector<EvalRecord> regrade(std::span<const Problem> problems,
                                std::span<const EvalRecord> stored, JudgeClient* judge) {
  std::unordered_map<std::string, const EvalRecord*> by_id;
  for (const auto& r : stored) by_id[r.problem_id] = &r;
  std::vector<EvalRecord> out;
  out.reserve(problems.size());
  for (const auto& p : problems) {
    EvalRecord rec;
    rec.problem_id = p.id;
    rec.prompt_sha256 = sha256_hex(build_prompt(p));
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      rec.verdict = failed_verdict(p);
      rec.failure = "missing from run store";
    } else if (it->second->failure) {
      rec.verdict = failed_verdict(p);
      rec.failure = it->second->failure;
    } else {
      rec.response = it->second->response;
      rec.verdict = verify(rec.response, p, judge);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_run_store(const std::filesystem::path& path, std::span<const EvalRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<EvalRecord> read_run_store(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaViolation,
                  path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rlvr::bench
