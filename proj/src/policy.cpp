#include "tnt/policy.hpp"

#include <algorithm>
#include <cmath>

#include "tnt/error.hpp"

namespace tnt {
namespace {

constexpr std::size_t kFirstClose = 0;
constexpr std::size_t kFirstThink = 1;
constexpr std::size_t kThinkCont = 2;
constexpr std::size_t kPostSolution = 3;
constexpr std::size_t kPostHack = 4;
constexpr std::size_t kSolutionCont = 5;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double logit_for(double p) {
  if (p <= 0.0) return -40.0;
  if (p >= 1.0) return 40.0;
  return std::log(p / (1.0 - p));
}

PolicySnapshot::PolicySnapshot(std::size_t buckets, std::uint64_t version)
    : buckets_(buckets), params_(buckets * kParamsPerBucket, 0.0), version_(version) {}

PolicySnapshot::PolicySnapshot(std::size_t buckets, std::vector<double> params,
                               std::uint64_t version)
    : buckets_(buckets), params_(std::move(params)), version_(version) {
  if (params_.size() != buckets_ * kParamsPerBucket) {
    throw Error(ErrorKind::kShapeMismatch, "policy: expected " +
                                               std::to_string(buckets_ * kParamsPerBucket) +
                                               " parameters, got " + std::to_string(params_.size()));
  }
  if (!std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorKind::kInvalidArgument, "policy: non-finite logit");
  }
}

std::size_t PolicySnapshot::offset(std::size_t bucket) const {
  if (bucket >= buckets_) {
    throw Error(ErrorKind::kInvalidArgument, "policy: bucket " + std::to_string(bucket) +
                                                 " out of range");
  }
  return bucket * kParamsPerBucket;
}

double& PolicySnapshot::logit(std::size_t bucket, std::size_t slot) {
  return params_.at(offset(bucket) + slot);
}

double PolicySnapshot::logit(std::size_t bucket, std::size_t slot) const {
  return params_.at(offset(bucket) + slot);
}

void PolicySnapshot::set_first_token(std::size_t bucket, double p_nonthinking) {
  logit(bucket, kFirstClose) = logit_for(p_nonthinking);
  logit(bucket, kFirstThink) = 0.0;
}

void PolicySnapshot::set_think_continue(std::size_t bucket, double p_continue) {
  logit(bucket, kThinkCont) = logit_for(p_continue);
}

void PolicySnapshot::set_post_close(std::size_t bucket, double p_hack) {
  logit(bucket, kPostSolution) = 0.0;
  logit(bucket, kPostHack) = logit_for(p_hack);
}

void PolicySnapshot::set_solution_continue(std::size_t bucket, double p_continue) {
  logit(bucket, kSolutionCont) = logit_for(p_continue);
}

double PolicySnapshot::logprob(const DecisionStep& step) const {
  const std::size_t o = offset(step.bucket);
  auto pair_logprob = [&](std::size_t a, std::size_t b) {
    const double za = params_[o + a], zb = params_[o + b];
    const double chosen = step.choice == 0 ? za : zb;
    const double other = step.choice == 0 ? zb : za;
    return -softplus(other - chosen);
  };
  auto single_logprob = [&](std::size_t slot) {
    const double z = params_[o + slot];
    return step.choice == 0 ? -softplus(-z) : -softplus(z);
  };
  switch (step.kind) {
    case Decision::kFirstToken: return pair_logprob(kFirstClose, kFirstThink);
    case Decision::kThinkContinue: return single_logprob(kThinkCont);
    case Decision::kPostClose: return pair_logprob(kPostSolution, kPostHack);
    case Decision::kSolutionContinue: return single_logprob(kSolutionCont);
    case Decision::kEnvironment: return 0.0;
  }
  return 0.0;
}

double PolicySnapshot::probability(const DecisionStep& step) const {
  return std::exp(logprob(step));
}

void PolicySnapshot::accumulate_score(const DecisionStep& step, double weight,
                                      std::span<double> grad) const {
  if (step.kind == Decision::kEnvironment || weight == 0.0) return;
  const std::size_t o = offset(step.bucket);
  auto pair_score = [&](std::size_t a, std::size_t b) {
    // d/dz_j log softmax(z)_c = [j == c] - p_j
    const double p_a = sigmoid(params_[o + a] - params_[o + b]);
    const double p_b = 1.0 - p_a;
    grad[o + a] += weight * ((step.choice == 0 ? 1.0 : 0.0) - p_a);
    grad[o + b] += weight * ((step.choice == 1 ? 1.0 : 0.0) - p_b);
  };
  auto single_score = [&](std::size_t slot) {
    const double p = sigmoid(params_[o + slot]);
    grad[o + slot] += weight * (step.choice == 0 ? 1.0 - p : -p);
  };
  switch (step.kind) {
    case Decision::kFirstToken: pair_score(kFirstClose, kFirstThink); break;
    case Decision::kThinkContinue: single_score(kThinkCont); break;
    case Decision::kPostClose: pair_score(kPostSolution, kPostHack); break;
    case Decision::kSolutionContinue: single_score(kSolutionCont); break;
    case Decision::kEnvironment: break;
  }
}

PolicySnapshot PolicySnapshot::with_params(std::vector<double> params) const {
  return PolicySnapshot(buckets_, std::move(params), version_);
}

}  // namespace tnt
