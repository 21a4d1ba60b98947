#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlvr/bench/backend.hpp"
#include "rlvr/bench/dataset_io.hpp"
#include "rlvr/bench/eval.hpp"
#include "rlvr/bench/report.hpp"
#include "rlvr/dataset_tools.hpp"
#include "rlvr/error.hpp"
#include "rlvr/service.hpp"
#include "rlvr/toy_trainer.hpp"
#include "rlvr/verify.hpp"

namespace fs = std::filesystem;
using namespace rlvr;

namespace {

std::vector<Problem> load_problems(const std::string& path) {
  auto loaded = bench::load_dataset(path);
  for (const auto& v : loaded.violations) {
    std::cerr << path << ":" << v.line << ": " << v.message << "\n";
  }
  return std::move(loaded.problems);
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return bench::read_file(path);
}

struct EvalArgs {
  std::string dataset;
  std::string endpoint;
  std::string model;
  double temperature = 0.6;
  std::size_t max_parallel = 4;
  int max_tokens = 4096;
  int retry_limit = 3;
  double timeout_s = 120.0;
  std::string judge_model;
  std::string judge_endpoint;
  std::string judge_cache;
  bool dry_run = false;
  std::string replay;
  std::string out_dir = "eval_out";
};

int run_eval_cmd(const EvalArgs& a) {
  const auto problems = load_problems(a.dataset);
  bench::BackendConfig cfg;
  cfg.endpoint = a.dry_run ? "dry-run" : a.endpoint;
  cfg.model_name = a.dry_run && a.model.empty() ? "dry-run" : a.model;
  cfg.temperature = a.temperature;
  cfg.max_parallel = a.max_parallel;
  cfg.max_tokens = a.max_tokens;
  cfg.retry_limit = a.retry_limit;
  cfg.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout_s * 1000.0));
  if (a.replay.empty()) cfg.validate();

  // Optional judge: HTTP client, wrapped in the persistent cache.
  std::unique_ptr<bench::HttpChatBackend> judge_backend;
  std::unique_ptr<bench::ChatJudge> judge;
  JudgeCache cache;
  if (!a.judge_cache.empty() && fs::exists(a.judge_cache)) {
    cache = JudgeCache::from_json(nlohmann::json::parse(bench::read_file(a.judge_cache)));
  }
  if (!a.judge_model.empty()) {
    const std::string ep = a.judge_endpoint.empty() ? a.endpoint : a.judge_endpoint;
    judge_backend = std::make_unique<bench::HttpChatBackend>(ep, bench::api_key_from_env(cfg), cfg.timeout);
    judge = std::make_unique<bench::ChatJudge>(*judge_backend, a.judge_model);
  }
  CachingJudge caching(judge.get(), &cache);
  JudgeClient* judge_ptr = (judge || !a.judge_cache.empty()) ? &caching : nullptr;

  std::vector<bench::EvalRecord> records;
  if (!a.replay.empty()) {
    records = bench::regrade(problems, bench::read_run_store(a.replay), judge_ptr);
  } else if (a.dry_run) {
    auto backend = bench::make_gold_echo_backend(problems);
    records = bench::run_eval(problems, backend, cfg, judge_ptr);
  } else {
    bench::HttpChatBackend backend(cfg.endpoint, bench::api_key_from_env(cfg), cfg.timeout);
    records = bench::run_eval(problems, backend, cfg, judge_ptr);
  }

  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);
  if (a.replay.empty()) bench::write_run_store(out / "runs.jsonl", records);
  const auto report = bench::aggregate(records, problems, cfg.model_name);
  bench::emit_report(report, bench::ReportFormat::Json, out / "report.json");
  bench::emit_report(report, bench::ReportFormat::Table, out / "report.txt");
  if (!a.judge_cache.empty()) bench::write_file(a.judge_cache, cache.to_json().dump(2) + "\n");
  std::cout << bench::report_table(report);
  return 0;
}

int run_serve(const std::string& dataset, const std::string& transport, int port, double alpha,
              std::size_t workers) {
  std::vector<Problem> problems;
  if (!dataset.empty()) problems = load_problems(dataset);
  RewardConfig cfg;
  cfg.alpha = alpha;
  service::RewardService svc(std::move(problems), cfg);
  if (transport == "stdio") {
    std::ios::sync_with_stdio(false);
    svc.serve_stream(std::cin, std::cout, workers);
    return 0;
  }
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  service::SocketServer server(svc);
  server.start(static_cast<std::uint16_t>(port));
  std::cerr << "listening on 127.0.0.1:" << server.port() << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification rewards, GRPO toolkit and benchmark harness for technical-math answers"};
  app.require_subcommand(1);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Query a model on a benchmark file and grade it");
  eval->add_option("--dataset", ev.dataset, "Benchmark JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--endpoint", ev.endpoint, "OpenAI-compatible base URL");
  eval->add_option("--model", ev.model, "Model name sent to the endpoint");
  eval->add_option("--temperature", ev.temperature)->capture_default_str();
  eval->add_option("--max-parallel", ev.max_parallel)->capture_default_str();
  eval->add_option("--max-tokens", ev.max_tokens)->capture_default_str();
  eval->add_option("--retry-limit", ev.retry_limit)->capture_default_str();
  eval->add_option("--timeout", ev.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  eval->add_option("--judge-model", ev.judge_model, "Enable the LLM judge tier");
  eval->add_option("--judge-endpoint", ev.judge_endpoint, "Defaults to --endpoint");
  eval->add_option("--judge-cache", ev.judge_cache, "JSON file persisting judge decisions");
  eval->add_flag("--dry-run", ev.dry_run, "Answer every prompt with its gold response");
  eval->add_option("--replay", ev.replay, "Re-grade a stored runs.jsonl without any backend");
  eval->add_option("--out-dir", ev.out_dir)->capture_default_str();

  std::string problem_path, response_path;
  auto* verify_cmd = app.add_subcommand("verify", "Grade one response against one problem");
  verify_cmd->add_option("--problem", problem_path, "Problem JSON")->required();
  verify_cmd->add_option("--response", response_path, "Response text file, or - for stdin")->required();

  std::string equation_file;
  int level = 50;
  std::uint64_t mask_seed = 0;
  auto* mask = app.add_subcommand("mask", "Build a masked fill-in variant of an equation");
  mask->add_option("--equation-file", equation_file, "File holding the LaTeX equation, or -")->required();
  mask->add_option("--level", level, "25, 50, 75 or 100")->capture_default_str();
  mask->add_option("--seed", mask_seed)->capture_default_str();

  std::string split_dataset_path, train_out = "train.jsonl", test_out = "test.jsonl";
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Stratified train/test split");
  split->add_option("--dataset", split_dataset_path)->required()->check(CLI::ExistingFile);
  split->add_option("--test-fraction", test_fraction)->capture_default_str();
  split->add_option("--seed", split_seed)->capture_default_str();
  split->add_option("--train-out", train_out)->capture_default_str();
  split->add_option("--test-out", test_out)->capture_default_str();

  std::string stats_path;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Type, quality and source distributions");
  stats->add_option("--dataset", stats_path)->required()->check(CLI::ExistingFile);
  stats->add_flag("--json", stats_json);

  std::string reviews_path;
  auto* consensus = app.add_subcommand("consensus", "Apply the multi-reviewer acceptance rule");
  consensus->add_option("--reviews", reviews_path, "JSONL of {question_id, scores, reviewer_count}")
      ->required()
      ->check(CLI::ExistingFile);

  std::string serve_dataset, transport = "stdio";
  int port = 0;
  double serve_alpha = 0.1;
  std::size_t serve_workers = 4;
  auto* serve = app.add_subcommand("reward-serve", "Score response groups over stdio or TCP");
  serve->add_option("--dataset", serve_dataset, "Problems addressable by id");
  serve->add_option("--transport", transport)->check(CLI::IsMember({"stdio", "socket"}))->capture_default_str();
  serve->add_option("--port", port, "TCP port on 127.0.0.1 (0 = any)")->capture_default_str();
  serve->add_option("--alpha", serve_alpha)->capture_default_str();
  serve->add_option("--workers", serve_workers)->capture_default_str();

  std::uint64_t toy_seed = 0;
  int toy_steps = 500, toy_problems = 20, toy_answers = 10;
  grpo::GrpoConfig toy_cfg;
  toy_cfg.learning_rate = 0.5;
  double toy_alpha = 0.1;
  std::string toy_out;
  auto* toy = app.add_subcommand("grpo-toy", "Train a tabular softmax policy with GRPO on a synthetic task");
  toy->add_option("--seed", toy_seed)->capture_default_str();
  toy->add_option("--steps", toy_steps)->capture_default_str();
  toy->add_option("--problems", toy_problems)->capture_default_str();
  toy->add_option("--answers", toy_answers)->capture_default_str();
  toy->add_option("--group-size", toy_cfg.group_size)->capture_default_str();
  toy->add_option("--clip-eps", toy_cfg.clip_eps)->capture_default_str();
  toy->add_option("--kl-beta", toy_cfg.kl_beta)->capture_default_str();
  toy->add_option("--alpha", toy_alpha)->capture_default_str();
  toy->add_option("--lr", toy_cfg.learning_rate)->capture_default_str();
  toy->add_option("--out", toy_out, "Write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) return run_eval_cmd(ev);

    if (*verify_cmd) {
      const Problem p = problem_from_json(nlohmann::json::parse(bench::read_file(problem_path)));
      const Verdict v = verify(read_text(response_path), p);
      std::cout << verdict_to_json(v).dump(2) << "\n";
      return 0;
    }

    if (*mask) {
      std::string eq = read_text(equation_file);
      while (!eq.empty() && (eq.back() == '\n' || eq.back() == '\r')) eq.pop_back();
      const auto m = dataset::mask_equation(eq, level, mask_seed);
      nlohmann::ordered_json j{{"level", m.level}, {"equation", m.equation}, {"gold", m.gold}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*split) {
      const auto problems = load_problems(split_dataset_path);
      const auto s = dataset::split_dataset(problems, test_fraction, split_seed);
      bench::write_dataset(train_out, s.train);
      bench::write_dataset(test_out, s.test);
      std::cout << "train " << s.train.size() << " -> " << train_out << "\n"
                << "test  " << s.test.size() << " -> " << test_out << "\n";
      return 0;
    }

    if (*stats) {
      const auto r = dataset::dataset_stats(load_problems(stats_path));
      std::cout << (stats_json ? dataset::stats_to_json(r).dump(2) + "\n" : dataset::stats_table(r));
      return 0;
    }

    if (*consensus) {
      std::size_t accepted = 0;
      const auto reviews = bench::load_reviews(reviews_path);
      for (const auto& r : reviews) {
        const auto d = dataset::consensus_decision(r);
        accepted += d.accept ? 1 : 0;
        nlohmann::ordered_json j{{"question_id", r.question_id},
                                 {"consensus", d.consensus},
                                 {"accept", d.accept}};
        std::cout << j.dump() << "\n";
      }
      std::cerr << accepted << " of " << reviews.size() << " accepted\n";
      return 0;
    }

    if (*serve) return run_serve(serve_dataset, transport, port, serve_alpha, serve_workers);

    if (*toy) {
      toy_cfg.validate();
      grpo::ToyTrainOptions opts;
      opts.reward.alpha = toy_alpha;
      opts.reward.validate();
      const auto task = grpo::make_synthetic_task(toy_problems, toy_answers, toy_seed);
      const auto result = grpo::train_toy_policy(task, toy_cfg, toy_steps, toy_seed, opts);
      std::cout << grpo::curve_table(result);
      std::cout << "final greedy accuracy " << result.final_greedy_accuracy << "\n";
      if (!toy_out.empty()) {
        bench::write_file(toy_out, grpo::toy_report(result, toy_cfg, toy_seed, toy_steps).dump(2) + "\n");
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
