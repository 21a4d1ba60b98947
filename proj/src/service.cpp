#include "rlvr/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <future>
#include <istream>
#include <ostream>
#include <semaphore>

#include "rlvr/error.hpp"
#include "rlvr/grpo.hpp"

namespace rlvr::service {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json error_json(const json& request_id, std::string_view kind, std::string_view message) {
  ordered_json j;
  j["request_id"] = request_id;
  j["error"] = kind;
  j["message"] = message;
  return j;
}

std::string_view error_kind(ErrorCode c) {
  switch (c) {
    case ErrorCode::SchemaViolation:
    case ErrorCode::UnbalancedBraces:
    case ErrorCode::TypeMismatch:
      return "schema";
    case ErrorCode::InvalidConfig:
      return "invalid_config";
    default:
      return "internal";
  }
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

ScoreResponse score_group(const Problem& problem, std::span<const std::string> responses,
                          const RewardConfig& cfg, JudgeClient* judge, std::string request_id) {
  cfg.validate();
  ScoreResponse out;
  out.request_id = std::move(request_id);
  Eigen::VectorXd totals(static_cast<Eigen::Index>(responses.size()));
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto scored = score_response(responses[i], problem, cfg, judge);
    out.per_response.push_back(
        {scored.reward, scored.verdict.correct, scored.verdict.tier, scored.verdict.per_blank});
    totals(static_cast<Eigen::Index>(i)) = scored.reward.total;
  }
  if (responses.empty()) return out;
  const auto adv = grpo::group_advantages(totals, grpo::GrpoConfig{}.std_floor);
  out.advantages.assign(adv.values.data(), adv.values.data() + adv.values.size());
  return out;
}

ordered_json request_to_json(const ScoreRequest& r) {
  ordered_json j;
  j["request_id"] = r.request_id;
  if (const auto* p = std::get_if<Problem>(&r.problem)) {
    j["problem"] = problem_to_json(*p);
  } else {
    j["problem"] = std::get<std::string>(r.problem);
  }
  j["responses"] = r.responses;
  if (r.alpha) j["alpha"] = *r.alpha;
  return j;
}

ScoreRequest request_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "request must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (k != "request_id" && k != "problem" && k != "responses" && k != "alpha") {
      throw Error(ErrorCode::SchemaViolation, "unknown request field '" + k + "'");
    }
  }
  ScoreRequest r;
  try {
    r.request_id = j.at("request_id").get<std::string>();
    const auto& p = j.at("problem");
    if (p.is_string()) {
      r.problem = p.get<std::string>();
    } else {
      r.problem = problem_from_json(p);
    }
    r.responses = j.at("responses").get<std::vector<std::string>>();
    if (j.contains("alpha") && !j.at("alpha").is_null()) r.alpha = j.at("alpha").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("request: ") + e.what());
  }
  if (r.responses.empty()) throw Error(ErrorCode::SchemaViolation, "request: responses must not be empty");
  return r;
}

ordered_json response_to_json(const ScoreResponse& r) {
  ordered_json j;
  j["request_id"] = r.request_id;
  auto arr = ordered_json::array();
  for (const auto& s : r.per_response) {
    ordered_json e;
    e["format"] = s.reward.format;
    e["accuracy"] = s.reward.accuracy;
    e["total"] = s.reward.total;
    e["correct"] = s.correct;
    e["tier"] = to_string(s.tier);
    e["per_blank"] = s.per_blank;
    arr.push_back(std::move(e));
  }
  j["per_response"] = std::move(arr);
  j["advantages"] = r.advantages;
  return j;
}

ScoreResponse response_from_json(const json& j) {
  ScoreResponse r;
  try {
    r.request_id = j.at("request_id").get<std::string>();
    for (const auto& e : j.at("per_response")) {
      ResponseScore s;
      s.reward.format = e.at("format").get<double>();
      s.reward.accuracy = e.at("accuracy").get<double>();
      s.reward.total = e.at("total").get<double>();
      s.correct = e.at("correct").get<bool>();
      const auto tier = parse_tier(e.at("tier").get<std::string>());
      if (!tier) throw Error(ErrorCode::SchemaViolation, "unknown tier");
      s.tier = *tier;
      s.per_blank = e.at("per_blank").get<std::vector<bool>>();
      r.per_response.push_back(std::move(s));
    }
    r.advantages = j.at("advantages").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("response: ") + e.what());
  }
  return r;
}

RewardService::RewardService(std::vector<Problem> dataset, RewardConfig cfg, JudgeClient* judge)
    : cfg_(cfg), judge_(judge) {
  cfg_.validate();
  for (auto& p : dataset) {
    std::string id = p.id;
    dataset_.emplace(std::move(id), std::move(p));
  }
}

std::string RewardService::handle_line(std::string_view line) const {
  json parsed;
  try {
    parsed = json::parse(line);
  } catch (const json::exception& e) {
    return error_json(nullptr, "parse", e.what()).dump();
  }
  json request_id = nullptr;
  if (parsed.is_object() && parsed.contains("request_id") && parsed["request_id"].is_string()) {
    request_id = parsed["request_id"];
  }
  try {
    const ScoreRequest req = request_from_json(parsed);
    const Problem* problem = std::get_if<Problem>(&req.problem);
    if (!problem) {
      const auto it = dataset_.find(std::get<std::string>(req.problem));
      if (it == dataset_.end()) {
        return error_json(request_id, "unknown_problem",
                          "no problem with id '" + std::get<std::string>(req.problem) + "'")
            .dump();
      }
      problem = &it->second;
    }
    RewardConfig cfg = cfg_;
    if (req.alpha) cfg.alpha = *req.alpha;
    cfg.validate();
    return response_to_json(score_group(*problem, req.responses, cfg,
                                        cfg.use_judge ? judge_ : nullptr, req.request_id))
        .dump();
  } catch (const Error& e) {
    return error_json(request_id, error_kind(e.code()), e.what()).dump();
  } catch (const std::exception& e) {
    return error_json(request_id, "internal", e.what()).dump();
  }
}

void RewardService::serve_stream(std::istream& in, std::ostream& out, std::size_t workers) const {
  if (workers == 0) workers = 1;
  // The reader launches scoring tasks; the writer emits results in request
  // order as soon as each one is ready. `slots` bounds work in flight.
  std::counting_semaphore<> slots(static_cast<std::ptrdiff_t>(workers));
  std::mutex m;
  std::condition_variable cv;
  std::deque<std::future<std::string>> pending;
  bool done = false;

  std::thread writer([&] {
    for (;;) {
      std::future<std::string> next;
      {
        std::unique_lock lock(m);
        cv.wait(lock, [&] { return done || !pending.empty(); });
        if (pending.empty()) return;
        next = std::move(pending.front());
        pending.pop_front();
      }
      out << next.get() << '\n';
      out.flush();
      slots.release();
    }
  });

  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    slots.acquire();
    auto task = std::async(std::launch::async, [this, l = std::move(line)] { return handle_line(l); });
    {
      std::lock_guard lock(m);
      pending.push_back(std::move(task));
    }
    cv.notify_one();
    line.clear();
  }
  {
    std::lock_guard lock(m);
    done = true;
  }
  cv.notify_one();
  writer.join();
}

SocketServer::SocketServer(const RewardService& service) : service_(service) {}

SocketServer::~SocketServer() { stop(); }

void SocketServer::start(std::uint16_t port) {
  if (running_) throw Error(ErrorCode::BindFailure, "server already running");
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::BindFailure, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd);
    throw Error(ErrorCode::BindFailure, "127.0.0.1:" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  listen_fd_ = fd;
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void SocketServer::accept_loop() {
  while (running_) {
    const int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(mutex_);
    if (!running_) {
      ::close(client);
      break;
    }
    open_fds_.push_back(client);
    connections_.emplace_back([this, client] { serve_connection(client); });
  }
}

void SocketServer::serve_connection(int fd) {
  struct Closer {
    SocketServer* self;
    int fd;
    ~Closer() {
      std::lock_guard lock(self->mutex_);
      std::erase(self->open_fds_, fd);
      ::close(fd);
    }
  } closer{this, fd};
  std::string buffer;
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(buffer.data() + start, nl - start);
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      if (!send_all(fd, service_.handle_line(line) + "\n")) return;
    }
    buffer.erase(0, start);
  }
}

void SocketServer::stop() {
  {
    std::lock_guard lock(mutex_);
    if (!running_.exchange(false)) {
      if (acceptor_.joinable()) acceptor_.join();
      return;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  running_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  std::list<std::thread> threads;
  {
    std::lock_guard lock(mutex_);
    threads.swap(connections_);
  }
  for (auto& t : threads) t.join();
}

void SocketServer::wait() { running_.wait(true); }

}  // namespace rlvr::service
