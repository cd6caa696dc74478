#include "tnt/ablation.hpp"

#include <cstdio>

#include "tnt/error.hpp"

namespace tnt {

WindowSummary summarize_window(std::span<const StepLog> logs, std::size_t window) {
  WindowSummary s;
  const std::size_t begin = logs.size() > window ? logs.size() - window : 0;
  double nt_tokens = 0.0, reward = 0.0;
  std::size_t verbs = 0, over = 0;
  for (std::size_t i = begin; i < logs.size(); ++i) {
    const auto& l = logs[i];
    ++s.steps;
    const std::size_t n = l.thinking_count + l.nonthinking_count;
    s.responses += n;
    s.nonthinking += l.nonthinking_count;
    nt_tokens += l.nonthinking_mean_tokens * static_cast<double>(l.nonthinking_count);
    reward += l.mean_reward * static_cast<double>(n);
    verbs += l.verb_count;
    over += l.over_budget_count;
  }
  if (s.responses > 0) {
    s.nonthinking_ratio = static_cast<double>(s.nonthinking) / static_cast<double>(s.responses);
    s.mean_reward = reward / static_cast<double>(s.responses);
  }
  if (s.nonthinking > 0) {
    const auto nt = static_cast<double>(s.nonthinking);
    s.nonthinking_mean_tokens = nt_tokens / nt;
    s.verb_probability = static_cast<double>(verbs) / nt;
    s.over_budget_rate = static_cast<double>(over) / nt;
  }
  return s;
}

std::vector<double> hack_mass(const PolicySnapshot& policy) {
  std::vector<double> out;
  for (std::size_t b = 0; b < policy.buckets(); ++b) {
    out.push_back(policy.probability(
        DecisionStep{static_cast<std::uint16_t>(b), Decision::kPostClose, 1}));
  }
  return out;
}

AblationReport run_ablation(const TrainConfig& base, const Environment& env,
                            std::span<const Prompt> tasks, const PolicySnapshot& initial,
                            std::span<const std::uint64_t> seeds, std::size_t window,
                            std::size_t eval_k, std::uint64_t eval_seed) {
  if (seeds.empty()) throw Error(ErrorKind::kConfig, "ablation: no seeds");
  AblationReport report;
  report.steps = base.steps;
  report.window = window;
  report.seeds.assign(seeds.begin(), seeds.end());
  for (auto seed : seeds) {
    std::size_t divergence = 0;
    const std::size_t first = report.runs.size();
    for (auto mode : {RewardMode::kTnt, RewardMode::kNaive}) {
      TrainConfig cfg = base;
      cfg.seed = seed;
      cfg.reward_mode = mode;
      AblationRun run;
      run.seed = seed;
      run.mode = mode;
      run.result = run_training(cfg, env, tasks, initial);
      run.final_window = summarize_window(run.result.logs, window);
      run.eval = evaluate(run.result.policy, env, tasks, eval_k, eval_seed, base.budget);
      report.runs.push_back(std::move(run));
    }
    const auto& a = report.runs[first].result.logs;
    const auto& b = report.runs[first + 1].result.logs;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      if (!(a[i] == b[i])) {
        divergence = a[i].step;
        break;
      }
    }
    report.first_divergence.push_back(divergence);
  }
  return report;
}

namespace {

nlohmann::json window_json(const WindowSummary& w) {
  return {{"steps", w.steps},
          {"responses", w.responses},
          {"nonthinking", w.nonthinking},
          {"nonthinking_ratio", w.nonthinking_ratio},
          {"nonthinking_mean_tokens", w.nonthinking_mean_tokens},
          {"verb_probability", w.verb_probability},
          {"over_budget_rate", w.over_budget_rate},
          {"mean_reward", w.mean_reward}};
}

}  // namespace

nlohmann::json ablation_to_json(const AblationReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    nlohmann::json eval_rows = nlohmann::json::array();
    for (const auto& row : r.eval.rows) {
      eval_rows.push_back({{"dataset", row.dataset},
                           {"accuracy", row.accuracy},
                           {"mean_tokens", row.mean_tokens},
                           {"te", row.te},
                           {"nonthinking_ratio", row.nonthinking_ratio},
                           {"nonthinking_mean_tokens", row.nonthinking_mean_tokens},
                           {"verb_probability", row.verb_probability},
                           {"over_budget_rate", row.over_budget_rate}});
    }
    runs.push_back({{"seed", r.seed},
                    {"reward_mode", to_string(r.mode)},
                    {"final_window", window_json(r.final_window)},
                    {"hack_mass", hack_mass(r.result.policy)},
                    {"policy_version", r.result.policy.version()},
                    {"eval", eval_rows}});
  }
  // Seed-averaged final-window comparison.
  double tnt_tokens = 0, naive_tokens = 0, tnt_verbs = 0, naive_verbs = 0;
  for (const auto& r : report.runs) {
    (r.mode == RewardMode::kTnt ? tnt_tokens : naive_tokens) +=
        r.final_window.nonthinking_mean_tokens;
    (r.mode == RewardMode::kTnt ? tnt_verbs : naive_verbs) += r.final_window.verb_probability;
  }
  const double n = static_cast<double>(report.seeds.size());
  return {{"steps", report.steps},
          {"window", report.window},
          {"seeds", report.seeds},
          {"first_divergence_step", report.first_divergence},
          {"summary",
           {{"tnt_nonthinking_mean_tokens", tnt_tokens / n},
            {"naive_nonthinking_mean_tokens", naive_tokens / n},
            {"tnt_verb_probability", tnt_verbs / n},
            {"naive_verb_probability", naive_verbs / n}}},
          {"runs", runs}};
}

std::string ablation_curves_csv(const AblationReport& report) {
  std::string out =
      "step,tnt_nonthinking_mean_tokens,naive_nonthinking_mean_tokens,tnt_verb_probability,"
      "naive_verb_probability,tnt_over_budget_rate,naive_over_budget_rate,"
      "tnt_nonthinking_ratio,naive_nonthinking_ratio\n";
  const double n = static_cast<double>(report.seeds.size());
  for (std::size_t i = 0; i < report.steps; ++i) {
    double v[8] = {};
    for (const auto& r : report.runs) {
      const auto& l = r.result.logs.at(i);
      const int o = r.mode == RewardMode::kTnt ? 0 : 1;
      v[0 + o] += l.nonthinking_mean_tokens / n;
      v[2 + o] += l.verb_probability / n;
      v[4 + o] += l.over_budget_rate / n;
      v[6 + o] += l.nonthinking_ratio / n;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", i + 1, v[0],
                  v[1], v[2], v[3], v[4], v[5], v[6], v[7]);
    out += buf;
  }
  return out;
}

}  // namespace tnt
