#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tnt/policy.hpp"
#include "tnt/response.hpp"
#include "tnt/rng.hpp"
#include "tnt/vocab.hpp"

namespace tnt {

struct BucketSpec {
  std::string name;
  double difficulty = 0.0;    // in [0, 1]
  double base_correct = 0.0;  // P(correct) with zero thinking tokens
  double gain = 0.0;          // extra P(correct) once thinking saturates
};

struct TaskSpec {
  std::vector<BucketSpec> buckets{{"easy", 0.0, 0.9, 0.05},
                                  {"medium", 0.5, 0.5, 0.4},
                                  {"hard", 1.0, 0.1, 0.8}};
  std::size_t think_cap = 16;
  std::size_t max_len = 64;  // generation truncation, plays the role of L^T

  // Buckets ordered by difficulty need strictly decreasing base_correct and
  // base_correct + gain <= 1.
  void validate() const;
  std::size_t bucket_for(double difficulty) const;
  double correct_probability(std::size_t bucket, std::size_t think_tokens) const;
};

struct Trajectory {
  Response response;
  std::vector<double> logprobs;         // one per token
  std::vector<DecisionStep> decisions;  // one per token
  std::size_t effective_think_tokens = 0;
  std::optional<TokenId> answer;        // absent when truncated
  bool truncated = false;
  bool correct = false;
  Mode mode = Mode::kThinking;
  std::size_t bucket = 0;
};

// Mock reasoning model environment: a state machine over the simulator
// vocabulary in which correctness depends on how many thinking tokens were
// emitted, wherever they appear.
class Environment {
 public:
  explicit Environment(TaskSpec spec = {}, Vocab vocab = Vocab::simulator_default());

  const TaskSpec& spec() const { return spec_; }
  const Vocab& vocab() const { return vocab_; }

  TokenId think_token() const { return think_; }
  TokenId solution_token() const { return solution_; }
  TokenId hack_verb() const { return verb_; }

  // policy_rng drives policy decisions; env_rng drives the answer draw.
  Trajectory sample_response(const PolicySnapshot& policy, const Prompt& prompt, Rng& policy_rng,
                             Rng& env_rng) const;

  // counts[i] prompts for bucket i, deterministic per seed.
  std::vector<Prompt> make_taskset(std::uint64_t seed, std::span<const std::size_t> counts) const;

  // Number of thinking fillers and verbs, regardless of position.
  std::size_t count_think_tokens(const TokenSeq& tokens) const;

 private:
  TaskSpec spec_;
  Vocab vocab_;
  TokenId think_ = 0;
  TokenId solution_ = 0;
  TokenId verb_ = 0;
  std::set<TokenId> verb_ids_;
};

bool answer_oracle(const Trajectory& trajectory, const Prompt& prompt);

// Starting point for training: a thinking-leaning model that occasionally
// answers directly and rarely hacks.
PolicySnapshot default_initial_policy(std::size_t buckets);

}  // namespace tnt
