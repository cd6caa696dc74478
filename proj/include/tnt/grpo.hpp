#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tnt/policy.hpp"
#include "tnt/response.hpp"

namespace tnt {

// K sampled responses for one prompt together with their rewards and the
// per-token log-probabilities under the sampling policy.
struct Group {
  std::string prompt_id;
  std::vector<Response> responses;
  std::vector<double> rewards;
  std::vector<std::vector<double>> old_logprobs;
  // Decision trace per token, needed only for gradients of the toy policy.
  std::vector<std::vector<DecisionStep>> decisions;

  void validate(bool need_decisions = false) const;
  std::size_t token_count() const;
};

struct AdvantageSet {
  std::vector<double> per_response;
  double group_mean = 0.0;
  double group_std = 0.0;
  bool degenerate = false;
};

struct ClipParams {
  double epsilon = 0.2;  // in (0, 1)

  void validate() const;
};

// (r_i - mean) / std with the population standard deviation; all zeros when
// the group has no spread.
AdvantageSet group_advantages(std::span<const double> rewards);

std::vector<double> importance_ratios(std::span<const double> new_logprobs,
                                      std::span<const double> old_logprobs);

// new_logprobs[g][i] holds the per-token log-probabilities of response i of
// group g under the policy being optimized.
using BatchLogprobs = std::vector<std::vector<std::vector<double>>>;

BatchLogprobs evaluate_logprobs(std::span<const Group> groups, const PolicySnapshot& policy);

// Token-level clipped surrogate, normalized by the token count of the whole
// batch. Larger is better.
double clipped_objective(std::span<const Group> groups, const BatchLogprobs& new_logprobs,
                         const ClipParams& clip);

// Exact gradient of clipped_objective at `policy`, holding advantages and the
// old log-probabilities fixed.
std::vector<double> objective_gradient(std::span<const Group> groups, const PolicySnapshot& policy,
                                       const ClipParams& clip);

// Ascent step; returns a new snapshot with version + 1.
PolicySnapshot sgd_step(const PolicySnapshot& policy, std::span<const double> gradient,
                        double learning_rate);

}  // namespace tnt
