#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tnt/response.hpp"

namespace tnt {

struct BudgetParams {
  double omega = 2.0;      // >= 1
  double l_empty = 1000.0; // > 0, used when no thinking sample exists

  void validate() const;
};

// Per-prompt non-thinking budget derived from the prompt's thinking samples.
struct BudgetContext {
  std::string prompt_id;
  std::vector<std::size_t> thinking_solution_lengths;
  double budget = 0.0;
  bool used_fallback = false;
};

BudgetContext compute_budget(std::span<const std::size_t> solution_lengths,
                             const BudgetParams& params, std::string prompt_id = {});

// Collects h(y) over the thinking-mode members of a group, then applies
// compute_budget.
BudgetContext budget_for_group(std::span<const Response> group, const BudgetParams& params,
                               std::string prompt_id = {});

enum class RewardBranch {
  kThinkingCorrect,
  kThinkingWrong,
  kNonThinkingCorrectWithin,
  kNonThinkingWrongWithin,
  kNonThinkingOverBudget,
};

std::string_view to_string(RewardBranch branch);

struct RewardOutcome {
  double value = 0.0;
  RewardBranch branch = RewardBranch::kThinkingWrong;
  Mode mode = Mode::kThinking;
  bool correct = false;
  std::size_t length = 0;
  double budget_used = 0.0;  // 0 for branches that never consult a budget

  bool operator==(const RewardOutcome&) const = default;
};

double branch_value(RewardBranch branch);

RewardOutcome reward_thinking(bool correct);
RewardOutcome reward_nonthinking(bool correct, std::size_t length, double budget);
RewardOutcome reward_tnt(const Response& response, bool correct, const BudgetContext& ctx);
// Mode preference without any length term.
RewardOutcome reward_naive(const Response& response, bool correct);

enum class RewardMode { kTnt, kNaive };

std::string_view to_string(RewardMode mode);
RewardMode reward_mode_from_string(std::string_view text);

}  // namespace tnt
