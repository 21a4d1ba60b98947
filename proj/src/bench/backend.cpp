#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "rlvr/bench/backend.hpp"

#include <cstdlib>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "rlvr/bench/prompt.hpp"
#include "rlvr/error.hpp"

namespace rlvr::bench {

void BackendConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorCode::InvalidConfig, "endpoint is required");
  if (model_name.empty()) throw Error(ErrorCode::InvalidConfig, "model name is required");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error(ErrorCode::InvalidConfig, "temperature must lie in [0, 2]");
  }
  if (max_tokens <= 0) throw Error(ErrorCode::InvalidConfig, "max_tokens must be positive");
  if (max_parallel == 0) throw Error(ErrorCode::InvalidConfig, "max_parallel must be positive");
  if (retry_limit < 0) throw Error(ErrorCode::InvalidConfig, "retry_limit must be >= 0");
  if (timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "timeout must be positive");
}

std::string api_key_from_env(const BackendConfig& cfg) {
  const char* v = std::getenv(cfg.api_key_env.c_str());
  return v ? std::string(v) : std::string();
}

HttpChatBackend::HttpChatBackend(std::string endpoint, std::string api_key,
                                 std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "endpoint needs an http:// or https:// scheme");
  }
  const std::string scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidConfig, "unsupported scheme '" + scheme + "'");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  origin_ = endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? std::string() : endpoint.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (path_.empty()) {
    path_ = "/v1/chat/completions";
  } else if (path_.size() < 17 || path_.compare(path_.size() - 17, 17, "/chat/completions") != 0) {
    path_ += "/chat/completions";
  }
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  ++calls_;
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

  const nlohmann::json body = {
      {"model", request.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw BackendError(true, "request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw BackendError(true, "HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw BackendError(false, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(false, std::string("malformed completion: ") + e.what());
  }
}

std::string gold_response(const Problem& problem) {
  if (problem.qtype == QType::MCQ) {
    return "\\boxed{" + (problem.gold.empty() ? std::string() : problem.gold.front()) + "}";
  }
  std::string out;
  for (std::size_t i = 0; i < problem.gold.size(); ++i) {
    if (i) out += ", ";
    out += "\\boxed{" + problem.gold[i] + "}";
  }
  return out;
}

ScriptedBackend make_gold_echo_backend(const std::vector<Problem>& problems) {
  auto answers = std::make_shared<std::unordered_map<std::string, std::string>>();
  for (const auto& p : problems) answers->emplace(build_prompt(p), gold_response(p));
  return ScriptedBackend([answers](const ChatRequest& r) {
    const auto it = answers->find(r.prompt);
    return it == answers->end() ? std::string() : it->second;
  });
}

ChatJudge::ChatJudge(ChatBackend& backend, std::string model, int retry_limit,
                     std::chrono::milliseconds backoff)
    : backend_(backend), model_(std::move(model)), retry_limit_(retry_limit), backoff_(backoff) {}

JudgeReply ChatJudge::decide(const JudgeRequest& request) {
  ++calls_;
  ChatRequest chat{model_, build_judge_prompt(request), 0.0, 16};
  for (int attempt = 0;; ++attempt) {
    try {
      return {parse_judge_reply(backend_.complete(chat)) ? JudgeOutcome::Yes : JudgeOutcome::No};
    } catch (const BackendError& e) {
      if (!e.transient() || attempt >= retry_limit_) return {JudgeOutcome::Unavailable};
      std::this_thread::sleep_for(backoff_ * (1 << std::min(attempt, 6)));
    }
  }
}

}  // namespace rlvr::bench
