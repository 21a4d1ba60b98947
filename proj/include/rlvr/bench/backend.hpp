#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlvr/problem.hpp"
#include "rlvr/verify.hpp"

namespace rlvr::bench {

struct BackendConfig {
  std::string endpoint;  // e.g. http://localhost:8000 or https://host/v1/chat/completions
  std::string model_name;
  double temperature = 0.6;
  int max_tokens = 4096;
  std::size_t max_parallel = 4;
  int retry_limit = 3;
  std::chrono::milliseconds timeout{120000};
  std::chrono::milliseconds retry_backoff{500};
  /// Name of the environment variable holding the bearer token.
  std::string api_key_env = "RLVR_API_KEY";

  /// Throws Error{InvalidConfig}.
  void validate() const;
};

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 0;
};

/// Raised by backends. Transient failures (network, 429, 5xx) are retried.
class BackendError : public std::runtime_error {
 public:
  BackendError(bool transient, const std::string& message)
      : std::runtime_error(message), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

/// Single-turn chat completion. Implementations must tolerate concurrent calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::size_t calls() const = 0;
};

/// OpenAI-compatible `/v1/chat/completions` over HTTP or HTTPS.
class HttpChatBackend : public ChatBackend {
 public:
  /// `api_key` may be empty; it is sent as a bearer token otherwise.
  HttpChatBackend(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout);

  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const override { return calls_.load(); }

  const std::string& origin() const { return origin_; }
  const std::string& path() const { return path_; }

 private:
  std::string origin_;
  std::string path_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
  std::atomic<std::size_t> calls_{0};
};

/// In-process backend driven by a function; used for dry runs and tests.
class ScriptedBackend : public ChatBackend {
 public:
  using Script = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  std::string complete(const ChatRequest& request) override {
    ++calls_;
    return script_(request);
  }
  std::size_t calls() const override { return calls_.load(); }

 private:
  Script script_;
  std::atomic<std::size_t> calls_{0};
};

/// The canonical correct response for a problem: `\boxed{L}` for MCQ, one
/// box per gold blank otherwise.
std::string gold_response(const Problem& problem);

/// Answers every benchmark prompt with its gold response (dry runs).
/// Unknown prompts get an empty reply.
ScriptedBackend make_gold_echo_backend(const std::vector<Problem>& problems);

/// LLM-backed equivalence judge. Backend failures that survive the retry
/// budget surface as JudgeOutcome::Unavailable.
class ChatJudge : public JudgeClient {
 public:
  ChatJudge(ChatBackend& backend, std::string model, int retry_limit = 2,
            std::chrono::milliseconds backoff = std::chrono::milliseconds(200));

  JudgeReply decide(const JudgeRequest& request) override;
  std::size_t calls() const override { return calls_.load(); }

 private:
  ChatBackend& backend_;
  std::string model_;
  int retry_limit_;
  std::chrono::milliseconds backoff_;
  std::atomic<std::size_t> calls_{0};
};

/// Reads the bearer token from the configured environment variable.
std::string api_key_from_env(const BackendConfig& cfg);

}  // namespace rlvr::bench
