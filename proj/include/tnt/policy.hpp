#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tnt {

// Decision points of the toy autoregressive policy. Each emitted token is
// tagged with the decision that produced it.
enum class Decision : std::uint8_t {
  kFirstToken,        // 0: close immediately (non-thinking), 1: think
  kThinkContinue,     // 0: another thinking token, 1: close
  kPostClose,         // 0: solution token, 1: hack (verb, then more thinking)
  kSolutionContinue,  // 0: another solution token, 1: answer
  kEnvironment,       // not sampled by the policy, log-probability 0
};

inline constexpr std::size_t kParamsPerBucket = 6;

struct DecisionStep {
  std::uint16_t bucket = 0;
  Decision kind = Decision::kEnvironment;
  std::uint8_t choice = 0;

  bool operator==(const DecisionStep&) const = default;
};

// Trainable logits, laid out per bucket as
//   [first_close, first_think, think_continue, post_solution, post_hack,
//    solution_continue].
// Pair decisions use a two-way softmax. The continue decisions use a single
// logit against an implicit 0 for the stop outcome.
class PolicySnapshot {
 public:
  PolicySnapshot() = default;
  explicit PolicySnapshot(std::size_t buckets, std::uint64_t version = 0);
  PolicySnapshot(std::size_t buckets, std::vector<double> params, std::uint64_t version);

  std::size_t buckets() const { return buckets_; }
  std::uint64_t version() const { return version_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  double& logit(std::size_t bucket, std::size_t slot);
  double logit(std::size_t bucket, std::size_t slot) const;

  // Logit setters by outcome probability, convenient for tests and presets.
  void set_first_token(std::size_t bucket, double p_nonthinking);
  void set_think_continue(std::size_t bucket, double p_continue);
  void set_post_close(std::size_t bucket, double p_hack);
  void set_solution_continue(std::size_t bucket, double p_continue);

  double probability(const DecisionStep& step) const;
  double logprob(const DecisionStep& step) const;

  // grad += weight * d logprob(step) / d params
  void accumulate_score(const DecisionStep& step, double weight, std::span<double> grad) const;

  PolicySnapshot with_params(std::vector<double> params) const;

  bool operator==(const PolicySnapshot&) const = default;

 private:
  std::size_t offset(std::size_t bucket) const;

  std::size_t buckets_ = 0;
  std::vector<double> params_;
  std::uint64_t version_ = 0;
};

// Logit giving a binary outcome the requested probability. 0 and 1 map to
// +/-40, which rounds to an exact 0/1 probability in double precision.
double logit_for(double p);

}  // namespace tnt
