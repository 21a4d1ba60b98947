#include "rlvr/toy_trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <random>

#include "rlvr/error.hpp"
#include "rlvr/verify.hpp"

namespace rlvr::grpo {
namespace {

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits, double temperature) {
  const Eigen::VectorXd z = logits / temperature;
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return z.array() - lse;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_index(const Eigen::VectorXd& probs, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

int argmax_first(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<int>(best);
}

CurvePoint evaluate(int step, const Eigen::MatrixXd& logits, const std::vector<int>& correct,
                    double temperature) {
  CurvePoint pt;
  pt.step = step;
  const auto n = static_cast<double>(correct.size());
  int hits = 0;
  for (Eigen::Index p = 0; p < logits.rows(); ++p) {
    const Eigen::VectorXd row = logits.row(p).transpose();
    const Eigen::VectorXd probs = log_softmax(row, temperature).array().exp();
    pt.accuracy += probs[correct[p]] / n;
    if (argmax_first(row) == correct[p]) ++hits;
  }
  pt.greedy_accuracy = hits / n;
  return pt;
}

const char* const kSymbols[] = {"x",       "y",      "h",       "g",        "P",
                                "\\eta",   "\\gamma", "\\sigma", "\\lambda", "\\theta"};

}  // namespace

std::vector<int> ToyTask::correct_indices() const {
  if (problems.size() != answer_vocabulary.size()) {
    throw Error(ErrorCode::InvalidConfig, "one vocabulary per problem required");
  }
  std::vector<int> out;
  out.reserve(problems.size());
  for (std::size_t p = 0; p < problems.size(); ++p) {
    int found = -1;
    for (std::size_t a = 0; a < answer_vocabulary[p].size(); ++a) {
      if (verify(answer_vocabulary[p][a], problems[p]).correct) {
        if (found >= 0) {
          throw Error(ErrorCode::InvalidConfig,
                      "problem " + problems[p].id + " has several verifying answers");
        }
        found = static_cast<int>(a);
      }
    }
    if (found < 0) {
      throw Error(ErrorCode::InvalidConfig, "problem " + problems[p].id + " has no verifying answer");
    }
    out.push_back(found);
  }
  return out;
}

ToyTask make_synthetic_task(int problems, int answers, std::uint64_t seed) {
  if (problems < 1 || answers < 2 || answers > 13) {
    throw Error(ErrorCode::InvalidConfig, "need >= 1 problem and 2..13 answers");
  }
  std::mt19937_64 rng(seed);
  ToyTask task;
  for (int p = 0; p < problems; ++p) {
    const std::string sym = std::string(kSymbols[p % 10]) + "_{" + std::to_string(p) + "}";
    const int k = 2 + p % 5;
    const int c = 1 + p % 3;
    const std::string ks = std::to_string(k);
    const std::string cs = std::to_string(c);
    const std::string gold = "\\frac{" + sym + "}{" + ks + "} + " + cs;

    Problem prob;
    prob.id = "toy-" + std::to_string(p);
    prob.qtype = QType::FEC;
    prob.background = "Synthetic item " + std::to_string(p) + ".";
    prob.question = "Write the complete expression.";
    prob.equation = "z_{" + std::to_string(p) + "} = [MASK]";
    prob.gold = {gold};

    auto boxed = [](const std::string& s) {
      return "Working through the derivation.\n\nThus the answer is $\\boxed{" + s + "}$";
    };
    std::vector<std::string> distractors = {
        boxed("\\frac{" + sym + "}{" + std::to_string(k + 1) + "} + " + cs),
        "Thus the answer is " + gold,
        boxed("\\frac{" + sym + "}{" + ks + "} - " + cs),
        boxed("\\frac{" + ks + "}{" + sym + "} + " + cs),
        "I could not determine the expression.",
        boxed(sym + " " + ks + " + " + cs),
        boxed("\\sqrt{" + sym + "} + " + cs),
        boxed("\\frac{" + sym + "}{" + ks + "}"),
        boxed("(" + sym + ")^{" + ks + "} + " + cs),
        boxed("\\frac{" + sym + "}{" + ks + "} + " + std::to_string(c + 1)),
        boxed("\\log(" + sym + ") + " + cs),
        boxed(cs),
    };
    std::vector<std::string> vocab;
    // cosmetic differences that still verify
    vocab.push_back(boxed("\\frac{\\mathbf{" + sym + "}}{" + ks + "}+" + cs));
    for (int a = 1; a < answers; ++a) vocab.push_back(distractors[static_cast<std::size_t>(a - 1)]);
    for (std::size_t i = vocab.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(vocab[i], vocab[j]);
    }
    task.problems.push_back(std::move(prob));
    task.answer_vocabulary.push_back(std::move(vocab));
  }
  return task;
}

bool apply_group_update(Eigen::Ref<Eigen::VectorXd> logits, const Eigen::VectorXd& ref_logits,
                        const std::vector<int>& samples, const Eigen::VectorXd& rewards,
                        const GrpoConfig& cfg, int inner_epochs) {
  if (group_advantages(rewards, cfg.std_floor).degenerate) return false;
  const double temp = cfg.temperature_train;
  const auto g = static_cast<Eigen::Index>(samples.size());

  RolloutGroup<double> group;
  group.rewards = rewards;
  group.logp_old.resize(g);
  group.logp_new.resize(g);
  Eigen::VectorXd ref(g);
  const Eigen::VectorXd old_lp = log_softmax(logits, temp);
  const Eigen::VectorXd ref_lp = log_softmax(ref_logits, temp);
  for (Eigen::Index i = 0; i < g; ++i) {
    group.logp_old[i] = old_lp[samples[i]];
    ref[i] = ref_lp[samples[i]];
  }
  group.logp_ref = ref;

  for (int epoch = 0; epoch < inner_epochs; ++epoch) {
    const Eigen::VectorXd lp = log_softmax(logits, temp);
    const Eigen::VectorXd probs = lp.array().exp();
    for (Eigen::Index i = 0; i < g; ++i) group.logp_new[i] = lp[samples[i]];
    const Eigen::VectorXd dlogp = grpo_objective_gradient(group, cfg);
    // d log pi(a) / d logits = (onehot(a) - pi) / T
    Eigen::VectorXd step = -dlogp.sum() * probs;
    for (Eigen::Index i = 0; i < g; ++i) step[samples[i]] += dlogp[i];
    logits += (cfg.learning_rate / temp) * step;
  }
  return true;
}

ToyTrainResult train_toy_policy(const ToyTask& task, const GrpoConfig& cfg, int steps,
                                std::uint64_t seed, const ToyTrainOptions& options) {
  cfg.validate();
  options.reward.validate();
  if (steps < 0) throw Error(ErrorCode::InvalidConfig, "steps must be >= 0");
  if (options.eval_every < 1 || options.inner_epochs < 1) {
    throw Error(ErrorCode::InvalidConfig, "eval_every and inner_epochs must be >= 1");
  }
  const auto correct = task.correct_indices();
  const auto num_problems = static_cast<Eigen::Index>(task.problems.size());
  const auto num_answers = static_cast<Eigen::Index>(task.answer_vocabulary.front().size());
  for (const auto& v : task.answer_vocabulary) {
    if (static_cast<Eigen::Index>(v.size()) != num_answers) {
      throw Error(ErrorCode::InvalidConfig, "all problems need the same number of candidates");
    }
  }

  // Rewards are pure in (problem, candidate); memoise them.
  std::vector<std::vector<std::optional<double>>> reward_table(
      task.problems.size(), std::vector<std::optional<double>>(num_answers));
  auto reward_of = [&](Eigen::Index p, int a) {
    auto& slot = reward_table[p][a];
    if (!slot) {
      slot = score_response(task.answer_vocabulary[p][a], task.problems[p], options.reward)
                 .reward.total;
    }
    return *slot;
  };

  std::mt19937_64 rng(seed);
  ToyTrainResult result;
  result.logits = Eigen::MatrixXd::Zero(num_problems, num_answers);
  const Eigen::MatrixXd reference = result.logits;
  result.curve.push_back(evaluate(0, result.logits, correct, cfg.temperature_eval));

  std::vector<int> samples(static_cast<std::size_t>(cfg.group_size));
  Eigen::VectorXd rewards(cfg.group_size);
  for (int step = 1; step <= steps; ++step) {
    for (Eigen::Index p = 0; p < num_problems; ++p) {
      const Eigen::VectorXd row = result.logits.row(p).transpose();
      const Eigen::VectorXd probs = log_softmax(row, cfg.temperature_train).array().exp();
      for (int i = 0; i < cfg.group_size; ++i) {
        samples[i] = sample_index(probs, rng);
        rewards[i] = reward_of(p, samples[i]);
      }
      Eigen::VectorXd updated = row;
      if (apply_group_update(updated, reference.row(p).transpose(), samples, rewards, cfg,
                             options.inner_epochs)) {
        result.logits.row(p) = updated.transpose();
      } else {
        ++result.degenerate_groups;
      }
    }
    if (step % options.eval_every == 0 || step == steps) {
      result.curve.push_back(evaluate(step, result.logits, correct, cfg.temperature_eval));
    }
  }
  result.final_greedy_accuracy = result.curve.back().greedy_accuracy;
  return result;
}

std::string curve_table(const ToyTrainResult& result) {
  std::string out = "step accuracy\n";
  char buf[64];
  for (const auto& pt : result.curve) {
    std::snprintf(buf, sizeof buf, "%d %.6f\n", pt.step, pt.accuracy);
    out += buf;
  }
  return out;
}

nlohmann::ordered_json toy_report(const ToyTrainResult& result, const GrpoConfig& cfg,
                                  std::uint64_t seed, int steps) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["steps"] = steps;
  j["group_size"] = cfg.group_size;
  j["clip_eps"] = cfg.clip_eps;
  j["kl_beta"] = cfg.kl_beta;
  j["learning_rate"] = cfg.learning_rate;
  j["temperature_train"] = cfg.temperature_train;
  j["temperature_eval"] = cfg.temperature_eval;
  j["final_greedy_accuracy"] = result.final_greedy_accuracy;
  j["degenerate_groups"] = result.degenerate_groups;
  auto curve = nlohmann::ordered_json::array();
  for (const auto& pt : result.curve) {
    curve.push_back({{"step", pt.step},
                     {"accuracy", pt.accuracy},
                     {"greedy_accuracy", pt.greedy_accuracy}});
  }
  j["curve"] = std::move(curve);
  return j;
}

}  // namespace rlvr::grpo
