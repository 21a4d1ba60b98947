#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <list>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rlvr/problem.hpp"
#include "rlvr/reward.hpp"
#include "rlvr/verify.hpp"

namespace rlvr::service {

struct ScoreRequest {
  std::string request_id;
  /// Inline problem, or the id of one in the service's dataset.
  std::variant<Problem, std::string> problem;
  std::vector<std::string> responses;
  std::optional<double> alpha;

  friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

struct ResponseScore {
  RewardBreakdown reward;
  bool correct = false;
  Tier tier = Tier::NO_ANSWER;
  std::vector<bool> per_blank;

  friend bool operator==(const ResponseScore&, const ResponseScore&) = default;
};

struct ScoreResponse {
  std::string request_id;
  std::vector<ResponseScore> per_response;
  std::vector<double> advantages;

  friend bool operator==(const ScoreResponse&, const ScoreResponse&) = default;
};

/// Rewards for each response plus group-normalized advantages (all zero for a
/// degenerate group, including G = 1).
ScoreResponse score_group(const Problem& problem, std::span<const std::string> responses,
                          const RewardConfig& cfg, JudgeClient* judge = nullptr,
                          std::string request_id = {});

nlohmann::ordered_json request_to_json(const ScoreRequest& r);
/// Throws Error{SchemaViolation}.
ScoreRequest request_from_json(const nlohmann::json& j);
nlohmann::ordered_json response_to_json(const ScoreResponse& r);
ScoreResponse response_from_json(const nlohmann::json& j);

/// Line-oriented request handler shared by both transports.
class RewardService {
 public:
  RewardService(std::vector<Problem> dataset, RewardConfig cfg, JudgeClient* judge = nullptr);

  /// One JSON request in, one JSON line out (no newline). Never throws;
  /// failures become `{"request_id", "error", "message"}` objects.
  std::string handle_line(std::string_view line) const;

  /// Reads requests until EOF, answering in request order. Up to `workers`
  /// requests are scored concurrently.
  void serve_stream(std::istream& in, std::ostream& out, std::size_t workers = 4) const;

  const RewardConfig& config() const { return cfg_; }

 private:
  std::unordered_map<std::string, Problem> dataset_;
  RewardConfig cfg_;
  JudgeClient* judge_;
};

/// Loopback TCP transport: newline-delimited requests, one thread per
/// connection, responses in per-connection request order.
class SocketServer {
 public:
  explicit SocketServer(const RewardService& service);
  ~SocketServer();
  SocketServer(const SocketServer&) = delete;
  SocketServer& operator=(const SocketServer&) = delete;

  /// Binds 127.0.0.1:port (0 picks a free port) and starts accepting.
  /// Throws Error{BindFailure}.
  void start(std::uint16_t port);
  std::uint16_t port() const { return port_; }
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);

  const RewardService& service_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::list<std::thread> connections_;
  std::vector<int> open_fds_;
};

}  // namespace rlvr::service
