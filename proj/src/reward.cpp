#include "tnt/reward.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "tnt/error.hpp"

namespace tnt {

void BudgetParams::validate() const {
  if (!(omega >= 1.0) || !std::isfinite(omega)) {
    throw Error(ErrorKind::kInvalidArgument, "budget: omega must be finite and >= 1");
  }
  if (!(l_empty > 0.0) || !std::isfinite(l_empty)) {
    throw Error(ErrorKind::kInvalidArgument, "budget: l_empty must be finite and > 0");
  }
}

BudgetContext compute_budget(std::span<const std::size_t> solution_lengths,
                             const BudgetParams& params, std::string prompt_id) {
  params.validate();
  BudgetContext ctx;
  ctx.prompt_id = std::move(prompt_id);
  ctx.thinking_solution_lengths.assign(solution_lengths.begin(), solution_lengths.end());
  if (solution_lengths.empty()) {
    ctx.budget = params.l_empty;
    ctx.used_fallback = true;
    return ctx;
  }
  // Integer sum is exact; a single rounding in the division keeps the mean exact
  // to half an ulp.
  const std::size_t sum =
      std::accumulate(solution_lengths.begin(), solution_lengths.end(), std::size_t{0});
  const double mean = static_cast<double>(sum) / static_cast<double>(solution_lengths.size());
  ctx.budget = params.omega * mean;
  return ctx;
}

BudgetContext budget_for_group(std::span<const Response> group, const BudgetParams& params,
                               std::string prompt_id) {
  std::vector<std::size_t> lengths;
  for (const auto& r : group) {
    if (!r.empty() && classify_mode(r) == Mode::kThinking && r.tau_index()) {
      lengths.push_back(solution_length(r));
    }
  }
  return compute_budget(lengths, params, std::move(prompt_id));
}

std::string_view to_string(RewardBranch branch) {
  switch (branch) {
    case RewardBranch::kThinkingCorrect: return "T_correct";
    case RewardBranch::kThinkingWrong: return "T_wrong";
    case RewardBranch::kNonThinkingCorrectWithin: return "N_correct_within";
    case RewardBranch::kNonThinkingWrongWithin: return "N_wrong_within";
    case RewardBranch::kNonThinkingOverBudget: return "N_over_budget";
  }
  return "?";
}

double branch_value(RewardBranch branch) {
  switch (branch) {
    case RewardBranch::kThinkingCorrect: return 1.0;
    case RewardBranch::kThinkingWrong: return 0.0;
    case RewardBranch::kNonThinkingCorrectWithin: return 2.0;
    case RewardBranch::kNonThinkingWrongWithin: return -1.0;
    case RewardBranch::kNonThinkingOverBudget: return -2.0;
  }
  return 0.0;
}

RewardOutcome reward_thinking(bool correct) {
  RewardOutcome out;
  out.branch = correct ? RewardBranch::kThinkingCorrect : RewardBranch::kThinkingWrong;
  out.value = branch_value(out.branch);
  out.mode = Mode::kThinking;
  out.correct = correct;
  return out;
}

RewardOutcome reward_nonthinking(bool correct, std::size_t length, double budget) {
  if (!(budget >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "reward: budget must be >= 0");
  RewardOutcome out;
  // size_t -> double is exact for any realistic length (< 2^53).
  if (static_cast<double>(length) <= budget) {
    out.branch = correct ? RewardBranch::kNonThinkingCorrectWithin
                         : RewardBranch::kNonThinkingWrongWithin;
  } else {
    out.branch = RewardBranch::kNonThinkingOverBudget;
  }
  out.value = branch_value(out.branch);
  out.mode = Mode::kNonThinking;
  out.correct = correct;
  out.length = length;
  out.budget_used = budget;
  return out;
}

RewardOutcome reward_tnt(const Response& response, bool correct, const BudgetContext& ctx) {
  if (classify_mode(response) == Mode::kThinking) {
    auto out = reward_thinking(correct);
    out.length = total_length(response);
    return out;
  }
  return reward_nonthinking(correct, total_length(response), ctx.budget);
}

RewardOutcome reward_naive(const Response& response, bool correct) {
  if (classify_mode(response) == Mode::kThinking) {
    auto out = reward_thinking(correct);
    out.length = total_length(response);
    return out;
  }
  // Infinite budget: the over-budget branch can never fire.
  auto out = reward_nonthinking(correct, total_length(response),
                                std::numeric_limits<double>::infinity());
  out.budget_used = 0.0;
  return out;
}

std::string_view to_string(RewardMode mode) {
  return mode == RewardMode::kTnt ? "tnt" : "naive";
}

RewardMode reward_mode_from_string(std::string_view text) {
  if (text == "tnt" || text == "TNT") return RewardMode::kTnt;
  if (text == "naive" || text == "Naive") return RewardMode::kNaive;
  throw Error(ErrorKind::kConfig, "reward_mode must be 'tnt' or 'naive', got '" +
                                      std::string(text) + "'");
}

}  // namespace tnt
