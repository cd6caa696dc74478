#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnt/trainer.hpp"

namespace tnt {

// Aggregate over the last `window` steps of a log, weighted by response
// counts rather than averaging per-step ratios.
struct WindowSummary {
  std::size_t steps = 0;
  std::size_t responses = 0;
  std::size_t nonthinking = 0;
  double nonthinking_ratio = 0.0;
  double nonthinking_mean_tokens = 0.0;
  double verb_probability = 0.0;
  double over_budget_rate = 0.0;
  double mean_reward = 0.0;
};

WindowSummary summarize_window(std::span<const StepLog> logs, std::size_t window);

// Probability of the hack branch right after a think_close, per bucket.
std::vector<double> hack_mass(const PolicySnapshot& policy);

struct AblationRun {
  std::uint64_t seed = 0;
  RewardMode mode = RewardMode::kTnt;
  TrainResult result;
  WindowSummary final_window;
  RunReport eval;
};

struct AblationReport {
  std::size_t steps = 0;
  std::size_t window = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRun> runs;  // for each seed: TNT then naive
  // First step whose log differs between the paired runs, 0 if none.
  std::vector<std::size_t> first_divergence;
};

// Paired experiment: same environment, tasks, initial policy and seeds; only
// the reward differs.
AblationReport run_ablation(const TrainConfig& base, const Environment& env,
                            std::span<const Prompt> tasks, const PolicySnapshot& initial,
                            std::span<const std::uint64_t> seeds, std::size_t window,
                            std::size_t eval_k, std::uint64_t eval_seed);

nlohmann::json ablation_to_json(const AblationReport& report);
// Per-step curves averaged across seeds, one row per step.
std::string ablation_curves_csv(const AblationReport& report);

}  // namespace tnt
