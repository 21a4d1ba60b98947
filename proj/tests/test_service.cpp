#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <random>
#include <sstream>
#include <thread>

#include "rlvr/bench/backend.hpp"
#include "rlvr/error.hpp"
#include "rlvr/grpo.hpp"
#include "rlvr/service.hpp"
#include "support.hpp"

using namespace rlvr;
using namespace rlvr::service;
using nlohmann::json;

namespace {

Problem sample() { return test::fill_problem("p1", QType::FILL_25, "F = (\\sin\\theta)^{[MASK]}", {"\\frac{G}{2}-1"}); }

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string request_line(const std::string& id, const std::vector<std::string>& responses,
                         std::variant<Problem, std::string> problem = sample()) {
  return request_to_json({id, std::move(problem), responses, std::nullopt}).dump();
}

/// Minimal blocking line client for the loopback transport.
class LineClient {
 public:
  explicit LineClient(std::uint16_t port) : fd_(::socket(AF_INET, SOCK_STREAM, 0)) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    connected_ = ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
  }
  ~LineClient() { ::close(fd_); }
  bool connected() const { return connected_; }
  void send(const std::string& line) {
    const std::string data = line + "\n";
    ASSERT_EQ(::send(fd_, data.data(), data.size(), MSG_NOSIGNAL), static_cast<ssize_t>(data.size()));
  }
  std::string read_line() {
    for (;;) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      char tmp[4096];
      const ssize_t n = ::recv(fd_, tmp, sizeof tmp, 0);
      if (n <= 0) return {};
      buf_.append(tmp, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  bool connected_ = false;
  std::string buf_;
};

}  // namespace

TEST(ScoreGroup, TwoOfEight) {
  const std::vector<std::string> group = {"\\boxed{\\frac{G}{2}-1}", "so \\boxed{\\frac{G}{2} - 1}", "\\boxed{G}",
                                          "\\boxed{1}", "\\boxed{G-1}", "\\boxed{2}", "\\boxed{x}", "\\boxed{G/2}"};
  const auto r = score_group(sample(), group, RewardConfig{});
  ASSERT_EQ(r.per_response.size(), 8u);
  Eigen::VectorXd rewards(8);
  for (int i = 0; i < 8; ++i) rewards[i] = r.per_response[static_cast<std::size_t>(i)].reward.total;
  Eigen::VectorXd expected_rewards(8);
  expected_rewards << 1, 1, .1, .1, .1, .1, .1, .1;
  EXPECT_EQ(rewards, expected_rewards);
  const auto oracle = grpo::group_advantages(expected_rewards).values;
  for (int i = 0; i < 8; ++i) EXPECT_EQ(r.advantages[static_cast<std::size_t>(i)], oracle[i]);
  EXPECT_NEAR(r.advantages[0], 1.7320508, 1e-7);
  EXPECT_NEAR(r.advantages[7], -0.5773503, 1e-7);
}

TEST(ScoreGroup, SmallGroups) {
  const std::vector<std::string> pair = {"\\boxed{\\frac{G}{2}-1}", ""};
  const auto r = score_group(sample(), pair, RewardConfig{});
  EXPECT_EQ(r.per_response[0].reward.total, 1.0);
  EXPECT_EQ(r.per_response[1].reward.total, 0.0);
  EXPECT_EQ(r.advantages, (std::vector<double>{1.0, -1.0}));

  const std::vector<std::string> one = {"\\boxed{G}"};
  EXPECT_EQ(score_group(sample(), one, RewardConfig{}).advantages, std::vector<double>{0.0});

  const std::vector<std::string> garbage = {"no box", "still none", "{{"};
  const auto g = score_group(sample(), garbage, RewardConfig{});
  for (const auto& s : g.per_response) EXPECT_EQ(s.reward.total, 0.0);
  EXPECT_EQ(g.advantages, std::vector<double>(3, 0.0));

  const std::vector<std::string> gold(4, "\\boxed{\\frac{G}{2}-1}");
  const auto all = score_group(sample(), gold, RewardConfig{});
  for (const auto& s : all.per_response) EXPECT_EQ(s.reward.total, 1.0);
  EXPECT_EQ(all.advantages, std::vector<double>(4, 0.0));
}

TEST(Protocol, RoundTrip) {
  const ScoreRequest inline_req{"r1", sample(), {"a", "\\boxed{b}"}, 0.25};
  EXPECT_EQ(request_from_json(json::parse(request_to_json(inline_req).dump())), inline_req);
  const ScoreRequest by_id{"r2", std::string("p1"), {"x"}, std::nullopt};
  EXPECT_EQ(request_from_json(json::parse(request_to_json(by_id).dump())), by_id);

  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> responses(static_cast<std::size_t>(test::uniform_int(rng, 1, 8)));
    for (auto& s : responses) {
      const int k = test::uniform_int(rng, 0, 3);
      s = k == 0 ? "\\boxed{\\frac{G}{2}-1}" : k == 1 ? "\\boxed{G}" : k == 2 ? "" : "\"quoted\"\n\\boxed{é}";
    }
    const auto r = score_group(sample(), responses, RewardConfig{}, nullptr, "id" + std::to_string(iter));
    ASSERT_EQ(response_from_json(json::parse(response_to_json(r).dump())), r);
  }
}

TEST(Protocol, StrictRequests) {
  EXPECT_THROW(request_from_json(json::parse(R"({"request_id":"a","problem":"p","responses":["x"],"extra":1})")), Error);
  EXPECT_THROW(request_from_json(json::parse(R"({"request_id":"a","problem":"p","responses":[]})")), Error);
  EXPECT_THROW(request_from_json(json::parse(R"({"problem":"p","responses":["x"]})")), Error);
  EXPECT_THROW(request_from_json(json::parse("[1]")), Error);
}

TEST(RewardService, HandleLineErrors) {
  const RewardService svc({sample()}, RewardConfig{});
  auto reply = json::parse(svc.handle_line("{not json"));
  EXPECT_TRUE(reply["request_id"].is_null());
  EXPECT_EQ(reply["error"], "parse");

  reply = json::parse(svc.handle_line(request_line("q7", {"x"}, std::string("nope"))));
  EXPECT_EQ(reply["request_id"], "q7");
  EXPECT_EQ(reply["error"], "unknown_problem");

  reply = json::parse(svc.handle_line(R"({"request_id":"q8","problem":"p1","responses":["x"],"bogus":true})"));
  EXPECT_EQ(reply["request_id"], "q8");
  EXPECT_EQ(reply["error"], "schema");

  reply = json::parse(svc.handle_line(R"({"request_id":"q9","problem":"p1","responses":["x"],"alpha":2})"));
  EXPECT_EQ(reply["error"], "invalid_config");

  reply = json::parse(svc.handle_line(request_line("ok", {"\\boxed{\\frac{G}{2}-1}"}, std::string("p1"))));
  EXPECT_EQ(reply["request_id"], "ok");
  EXPECT_EQ(reply["per_response"][0]["total"], 1.0);
}

TEST(RewardService, AlphaOverride) {
  const RewardService svc({sample()}, RewardConfig{});
  const auto reply = json::parse(svc.handle_line(
      R"({"request_id":"a","problem":"p1","responses":["\\boxed{G}"],"alpha":0.5})"));
  EXPECT_EQ(reply["per_response"][0]["total"], 0.5);
}

TEST(RewardService, StdioPreservesOrder) {
  const RewardService svc({sample()}, RewardConfig{});
  std::string input;
  std::vector<std::string> expected;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> group(static_cast<std::size_t>(test::uniform_int(rng, 1, 8)));
    for (auto& s : group) s = test::uniform_int(rng, 0, 1) ? "\\boxed{\\frac{G}{2}-1}" : "\\boxed{G}";
    const std::string line = i % 37 == 5 ? "garbage" : request_line("r" + std::to_string(i), group);
    input += line + "\n";
    expected.push_back(svc.handle_line(line));
  }
  input += "\n";  // blank lines are skipped
  std::istringstream in(input);
  std::ostringstream out;
  svc.serve_stream(in, out, 4);
  EXPECT_EQ(lines_of(out.str()), expected);
}

TEST(RewardService, ServiceMatchesDirectScoringBitExact) {
  const RewardService svc({}, RewardConfig{});
  std::mt19937_64 rng(21);
  const std::vector<Problem> problems = {sample(), test::mcq_problem("m", "C"),
                                         test::fill_problem("f", QType::FILL_50, "[MASK] = a + [MASK]", {"y", "b"})};
  for (int iter = 0; iter < 200; ++iter) {
    const auto& p = problems[static_cast<std::size_t>(test::uniform_int(rng, 0, 2))];
    std::vector<std::string> group(static_cast<std::size_t>(test::uniform_int(rng, 1, 16)));
    for (auto& s : group) {
      const int k = test::uniform_int(rng, 0, 3);
      s = k == 0 ? bench::gold_response(p) : k == 1 ? "\\boxed{C}" : k == 2 ? "\\boxed{b} \\boxed{y}" : "none";
    }
    const auto via_service = response_from_json(json::parse(svc.handle_line(request_line("x", group, p))));
    ASSERT_EQ(via_service, score_group(p, group, RewardConfig{}, nullptr, "x"));
  }
}

TEST(SocketServer, ServesAndStops) {
  const RewardService svc({sample()}, RewardConfig{});
  SocketServer server(svc);
  server.start(0);
  ASSERT_NE(server.port(), 0);
  std::thread waiter([&] { server.wait(); });
  {
    LineClient a(server.port());
    LineClient b(server.port());
    ASSERT_TRUE(a.connected());
    ASSERT_TRUE(b.connected());
    const auto l1 = request_line("a1", {"\\boxed{\\frac{G}{2}-1}", ""}, std::string("p1"));
    const auto l2 = request_line("b1", {"\\boxed{G}"});
    a.send(l1);
    b.send(l2);
    a.send("{bad");
    EXPECT_EQ(a.read_line(), svc.handle_line(l1));
    EXPECT_EQ(b.read_line(), svc.handle_line(l2));
    EXPECT_EQ(json::parse(a.read_line())["error"], "parse");
  }
  // a closed client does not take the server down
  LineClient c(server.port());
  ASSERT_TRUE(c.connected());
  c.send(request_line("c1", {"x"}));
  EXPECT_EQ(json::parse(c.read_line())["request_id"], "c1");

  SocketServer clash(svc);
  try {
    clash.start(server.port());
    FAIL() << "expected BindFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BindFailure);
  }
  server.stop();
  waiter.join();
  EXPECT_EQ(c.read_line(), "");
}
