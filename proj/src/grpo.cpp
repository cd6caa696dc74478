#include "tnt/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "tnt/error.hpp"

namespace tnt {

void Group::validate(bool need_decisions) const {
  const std::size_t k = responses.size();
  if (k == 0) throw Error(ErrorKind::kShapeMismatch, "group '" + prompt_id + "' is empty");
  if (rewards.size() != k || old_logprobs.size() != k) {
    throw Error(ErrorKind::kShapeMismatch,
                "group '" + prompt_id + "': responses, rewards and old_logprobs differ in length");
  }
  if (need_decisions && decisions.size() != k) {
    throw Error(ErrorKind::kShapeMismatch, "group '" + prompt_id + "': missing decision traces");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (old_logprobs[i].size() != total_length(responses[i])) {
      throw Error(ErrorKind::kLengthMismatch, "group '" + prompt_id + "': response " +
                                                  std::to_string(i) +
                                                  " has mismatched old_logprobs");
    }
    if (need_decisions && decisions[i].size() != total_length(responses[i])) {
      throw Error(ErrorKind::kLengthMismatch, "group '" + prompt_id + "': response " +
                                                  std::to_string(i) +
                                                  " has mismatched decision trace");
    }
  }
}

std::size_t Group::token_count() const {
  std::size_t n = 0;
  for (const auto& r : responses) n += total_length(r);
  return n;
}

void ClipParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "clip epsilon must lie in (0, 1)");
  }
}

AdvantageSet group_advantages(std::span<const double> rewards) {
  AdvantageSet out;
  const auto k = static_cast<double>(rewards.size());
  out.per_response.assign(rewards.size(), 0.0);
  if (rewards.empty()) {
    out.degenerate = true;
    return out;
  }
  double sum = 0.0;
  for (double r : rewards) sum += r;
  out.group_mean = sum / k;
  double sq = 0.0;
  for (double r : rewards) sq += (r - out.group_mean) * (r - out.group_mean);
  out.group_std = std::sqrt(sq / k);
  if (out.group_std == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out.per_response[i] = (rewards[i] - out.group_mean) / out.group_std;
  }
  return out;
}

std::vector<double> importance_ratios(std::span<const double> new_logprobs,
                                      std::span<const double> old_logprobs) {
  if (new_logprobs.size() != old_logprobs.size()) {
    throw Error(ErrorKind::kLengthMismatch, "importance_ratios: " +
                                                std::to_string(new_logprobs.size()) + " vs " +
                                                std::to_string(old_logprobs.size()) + " tokens");
  }
  std::vector<double> ratios(new_logprobs.size());
  for (std::size_t t = 0; t < ratios.size(); ++t) {
    if (!std::isfinite(new_logprobs[t]) || !std::isfinite(old_logprobs[t])) {
      throw Error(ErrorKind::kInvalidArgument, "importance_ratios: non-finite log-probability");
    }
    ratios[t] = std::exp(new_logprobs[t] - old_logprobs[t]);
  }
  return ratios;
}

BatchLogprobs evaluate_logprobs(std::span<const Group> groups, const PolicySnapshot& policy) {
  BatchLogprobs out(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].validate(true);
    for (const auto& trace : groups[g].decisions) {
      std::vector<double> lps;
      lps.reserve(trace.size());
      for (const auto& step : trace) lps.push_back(policy.logprob(step));
      out[g].push_back(std::move(lps));
    }
  }
  return out;
}

namespace {

std::size_t batch_tokens(std::span<const Group> groups) {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.token_count();
  return n;
}

}  // namespace

double clipped_objective(std::span<const Group> groups, const BatchLogprobs& new_logprobs,
                         const ClipParams& clip) {
  clip.validate();
  if (new_logprobs.size() != groups.size()) {
    throw Error(ErrorKind::kShapeMismatch, "clipped_objective: group count mismatch");
  }
  const std::size_t total = batch_tokens(groups);
  if (total == 0) return 0.0;
  const double lo = 1.0 - clip.epsilon, hi = 1.0 + clip.epsilon;
  double acc = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& group = groups[g];
    group.validate();
    if (new_logprobs[g].size() != group.responses.size()) {
      throw Error(ErrorKind::kShapeMismatch, "clipped_objective: response count mismatch");
    }
    const auto adv = group_advantages(group.rewards);
    for (std::size_t i = 0; i < group.responses.size(); ++i) {
      const double a = adv.per_response[i];
      const auto ratios = importance_ratios(new_logprobs[g][i], group.old_logprobs[i]);
      for (double r : ratios) acc += std::min(r * a, std::clamp(r, lo, hi) * a);
    }
  }
  return acc / static_cast<double>(total);
}

std::vector<double> objective_gradient(std::span<const Group> groups, const PolicySnapshot& policy,
                                       const ClipParams& clip) {
  clip.validate();
  std::vector<double> grad(policy.param_count(), 0.0);
  const std::size_t total = batch_tokens(groups);
  if (total == 0) return grad;
  const double lo = 1.0 - clip.epsilon, hi = 1.0 + clip.epsilon;
  const double norm = 1.0 / static_cast<double>(total);
  for (const auto& group : groups) {
    group.validate(true);
    const auto adv = group_advantages(group.rewards);
    if (adv.degenerate) continue;
    for (std::size_t i = 0; i < group.responses.size(); ++i) {
      const double a = adv.per_response[i];
      const auto& trace = group.decisions[i];
      for (std::size_t t = 0; t < trace.size(); ++t) {
        if (trace[t].kind == Decision::kEnvironment) continue;
        const double r = std::exp(policy.logprob(trace[t]) - group.old_logprobs[i][t]);
        // The clipped branch is constant in theta; only the unclipped one
        // carries gradient, and it is selected whenever it is the minimum.
        if (r * a <= std::clamp(r, lo, hi) * a) {
          policy.accumulate_score(trace[t], norm * a * r, grad);
        }
      }
    }
  }
  return grad;
}

PolicySnapshot sgd_step(const PolicySnapshot& policy, std::span<const double> gradient,
                        double learning_rate) {
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "sgd_step: learning_rate must be > 0");
  }
  if (gradient.size() != policy.param_count()) {
    throw Error(ErrorKind::kShapeMismatch, "sgd_step: gradient size mismatch");
  }
  std::vector<double> params(policy.params().begin(), policy.params().end());
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (!std::isfinite(gradient[j])) {
      throw Error(ErrorKind::kNonFiniteGradient,
                  "sgd_step: gradient component " + std::to_string(j) + " is not finite");
    }
    params[j] += learning_rate * gradient[j];
  }
  return PolicySnapshot(policy.buckets(), std::move(params), policy.version() + 1);
}

}  // namespace tnt
