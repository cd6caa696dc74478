#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tnt/grpo.hpp"
#include "tnt/policy.hpp"
#include "tnt/vocab.hpp"

namespace tnt::testing {

struct GradInstance {
  std::vector<Group> groups;
  PolicySnapshot policy;  // the "new" policy at which the gradient is taken
};

// Random decision traces. Old log-probabilities come from a base policy; the
// new policy is the base plus a perturbation so ratios differ from 1.
inline GradInstance random_grad_instance(std::mt19937_64& rng, std::size_t max_k = 8,
                                         std::size_t max_len = 8, std::size_t max_buckets = 2,
                                         double perturb = 0.3) {
  std::uniform_real_distribution<double> logit(-2.0, 2.0);
  std::uniform_real_distribution<double> noise(-perturb, perturb);
  std::uniform_real_distribution<double> reward(-2.0, 2.0);
  const std::size_t buckets = 1 + rng() % max_buckets;

  std::vector<double> base(buckets * kParamsPerBucket);
  for (auto& x : base) x = logit(rng);
  const PolicySnapshot old_policy(buckets, base, 0);
  std::vector<double> moved(base);
  for (auto& x : moved) x += noise(rng);
  const PolicySnapshot new_policy(buckets, moved, 1);

  GradInstance inst{{}, new_policy};
  const std::size_t n_groups = 1 + rng() % 2;
  for (std::size_t g = 0; g < n_groups; ++g) {
    Group group;
    group.prompt_id = "p" + std::to_string(g);
    const std::size_t k = 1 + rng() % max_k;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t len = 1 + rng() % max_len;
      TokenSeq tokens(len, 5);
      std::vector<DecisionStep> steps(len);
      std::vector<double> old_lp(len);
      for (std::size_t t = 0; t < len; ++t) {
        const unsigned kind = rng() % 9;
        steps[t].bucket = static_cast<std::uint16_t>(rng() % buckets);
        steps[t].kind = kind < 8 ? static_cast<Decision>(kind / 2) : Decision::kEnvironment;
        steps[t].choice = static_cast<std::uint8_t>(rng() % 2);
        old_lp[t] = old_policy.logprob(steps[t]);
      }
      group.responses.emplace_back(tokens, 1);
      group.old_logprobs.push_back(std::move(old_lp));
      group.decisions.push_back(std::move(steps));
      group.rewards.push_back(std::round(reward(rng) * 2.0) / 2.0);
    }
    inst.groups.push_back(std::move(group));
  }
  return inst;
}

// True when some token's ratio sits within `margin` of a clipping edge,
// where the objective has a kink and finite differences are meaningless.
inline bool near_clip_kink(const GradInstance& inst, double epsilon, double margin = 1e-3) {
  const auto lp = evaluate_logprobs(inst.groups, inst.policy);
  for (std::size_t g = 0; g < inst.groups.size(); ++g) {
    for (std::size_t i = 0; i < lp[g].size(); ++i) {
      for (std::size_t t = 0; t < lp[g][i].size(); ++t) {
        const double r = std::exp(lp[g][i][t] - inst.groups[g].old_logprobs[i][t]);
        if (std::abs(r - (1 - epsilon)) < margin || std::abs(r - (1 + epsilon)) < margin) {
          return true;
        }
      }
    }
  }
  return false;
}

inline std::vector<double> finite_difference_gradient(const GradInstance& inst,
                                                      const ClipParams& clip, double h = 1e-5) {
  const auto params = inst.policy.params();
  std::vector<double> grad(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    std::vector<double> plus(params.begin(), params.end());
    std::vector<double> minus(params.begin(), params.end());
    plus[j] += h;
    minus[j] -= h;
    const double jp =
        clipped_objective(inst.groups, evaluate_logprobs(inst.groups, inst.policy.with_params(plus)), clip);
    const double jm =
        clipped_objective(inst.groups, evaluate_logprobs(inst.groups, inst.policy.with_params(minus)), clip);
    grad[j] = (jp - jm) / (2 * h);
  }
  return grad;
}

inline double relative_error(const std::vector<double>& analytic, const std::vector<double>& fd) {
  double diff = 0, norm = 0;
  for (std::size_t j = 0; j < fd.size(); ++j) {
    diff += (analytic[j] - fd[j]) * (analytic[j] - fd[j]);
    norm += fd[j] * fd[j];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-8);
}

// Textbook mean and population standard deviation, written independently of
// the library.
inline std::pair<double, double> mean_pstd(const std::vector<double>& xs) {
  long double s = 0;
  for (double x : xs) s += x;
  const long double m = s / xs.size();
  long double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  return {static_cast<double>(m), static_cast<double>(std::sqrt(v / xs.size()))};
}

}  // namespace tnt::testing
