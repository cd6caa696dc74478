#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnt/analysis.hpp"
#include "tnt/environment.hpp"
#include "tnt/grpo.hpp"
#include "tnt/reward.hpp"

namespace tnt {

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 16;
  std::size_t group_size = 8;  // K responses per prompt
  BudgetParams budget;
  ClipParams clip;
  double learning_rate = 4.0;
  RewardMode reward_mode = RewardMode::kTnt;
  std::uint64_t seed = 1;
  std::size_t eval_every = 500;
  std::size_t reuse_epochs = 1;  // gradient updates per sampled batch

  void validate() const;
};

// Per-step training summary, one JSONL line each.
struct StepLog {
  std::size_t step = 0;
  std::size_t thinking_count = 0;
  std::size_t nonthinking_count = 0;
  double thinking_mean_tokens = 0.0;
  double nonthinking_mean_tokens = 0.0;
  double mean_reward = 0.0;
  double accuracy = 0.0;                // fraction of correct responses
  std::size_t over_budget_count = 0;    // non-thinking responses longer than their budget
  double over_budget_rate = 0.0;        // over_budget_count / nonthinking_count
  double nonthinking_ratio = 0.0;
  std::size_t verb_count = 0;           // non-thinking responses containing a verb
  double verb_probability = 0.0;
  std::size_t fallback_prompts = 0;     // prompts whose budget fell back to l_empty
  std::uint64_t policy_version = 0;

  bool operator==(const StepLog&) const = default;
};

nlohmann::json to_json(const StepLog& log);
StepLog step_log_from_json(const nlohmann::json& j);

struct TrainObserver {
  std::function<void(const StepLog&)> on_step;
  // Called every eval_every steps and after the final step.
  std::function<void(const PolicySnapshot&, std::size_t step)> on_checkpoint;
  std::function<void(std::size_t step, const Prompt&, const Trajectory&, const RewardOutcome&,
                     const BudgetContext&)>
      on_trajectory;
  // Called with the last good policy before a NonFiniteGradient propagates.
  std::function<void(const PolicySnapshot&, std::size_t step)> on_abort;
};

struct TrainResult {
  PolicySnapshot policy;
  std::vector<StepLog> logs;
};

TrainResult run_training(const TrainConfig& config, const Environment& env,
                         std::span<const Prompt> tasks, const PolicySnapshot& initial,
                         const TrainObserver& observer = {});

// Samples k_eval responses per task without learning. Rows: one per bucket
// (named after it) followed by "all".
RunReport evaluate(const PolicySnapshot& policy, const Environment& env,
                   std::span<const Prompt> tasks, std::size_t k_eval, std::uint64_t seed,
                   const BudgetParams& budget = {});

inline constexpr int kCheckpointFormatVersion = 1;

std::string checkpoint_bytes(const PolicySnapshot& policy, std::size_t step);
PolicySnapshot checkpoint_parse(std::string_view bytes);
// Writes via a temporary file and rename.
void checkpoint_save(const PolicySnapshot& policy, std::size_t step,
                     const std::filesystem::path& path);
PolicySnapshot checkpoint_load(const std::filesystem::path& path);

}  // namespace tnt
