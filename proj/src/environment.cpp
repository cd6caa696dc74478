#include "tnt/environment.hpp"

#include <algorithm>
#include <cmath>

#include "tnt/error.hpp"

namespace tnt {

void TaskSpec::validate() const {
  if (buckets.empty()) throw Error(ErrorKind::kConfig, "environment: no buckets");
  if (think_cap == 0) throw Error(ErrorKind::kConfig, "environment: think_cap must be >= 1");
  if (max_len < 2) throw Error(ErrorKind::kConfig, "environment: max_len must be >= 2");
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto& b = buckets[i];
    if (b.difficulty < 0.0 || b.difficulty > 1.0) {
      throw Error(ErrorKind::kConfig, "environment: bucket '" + b.name + "' difficulty outside [0,1]");
    }
    if (b.base_correct < 0.0 || b.gain < 0.0 || b.base_correct + b.gain > 1.0) {
      throw Error(ErrorKind::kConfig,
                  "environment: bucket '" + b.name + "' needs base_correct, gain >= 0 and sum <= 1");
    }
    if (i > 0) {
      const auto& prev = buckets[i - 1];
      if (!(b.difficulty > prev.difficulty) || !(b.base_correct < prev.base_correct)) {
        throw Error(ErrorKind::kConfig,
                    "environment: buckets must be listed by increasing difficulty with strictly "
                    "decreasing base_correct");
      }
    }
  }
}

std::size_t TaskSpec::bucket_for(double difficulty) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < buckets.size(); ++i) {
    if (std::abs(buckets[i].difficulty - difficulty) <
        std::abs(buckets[best].difficulty - difficulty)) {
      best = i;
    }
  }
  return best;
}

double TaskSpec::correct_probability(std::size_t bucket, std::size_t think_tokens) const {
  const auto& b = buckets.at(bucket);
  const double used = static_cast<double>(std::min(think_tokens, think_cap));
  return b.base_correct + b.gain * used / static_cast<double>(think_cap);
}

Environment::Environment(TaskSpec spec, Vocab vocab)
    : spec_(std::move(spec)), vocab_(std::move(vocab)) {
  spec_.validate();
  think_ = vocab_.at("THINK");
  solution_ = vocab_.at("SOL");
  verb_ids_ = vocab_.verb_ids();
  if (verb_ids_.empty()) throw Error(ErrorKind::kConfig, "environment: vocab has no verb tokens");
  verb_ = vocab_.at(vocab_.verbs().front());
  if (vocab_.answer_tokens().size() < 2) {
    throw Error(ErrorKind::kConfig, "environment: vocab needs at least two answer tokens");
  }
}

std::size_t Environment::count_think_tokens(const TokenSeq& tokens) const {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [&](TokenId t) {
    return t == think_ || verb_ids_.contains(t);
  }));
}

Trajectory Environment::sample_response(const PolicySnapshot& policy, const Prompt& prompt,
                                        Rng& policy_rng, Rng& env_rng) const {
  const std::size_t bucket = spec_.bucket_for(prompt.difficulty);
  const auto b = static_cast<std::uint16_t>(bucket);

  Trajectory traj;
  traj.bucket = bucket;
  TokenSeq tokens;

  auto full = [&] { return tokens.size() >= spec_.max_len; };
  auto decide = [&](Decision kind) -> std::uint8_t {
    DecisionStep step{b, kind, 0};
    const double p0 = policy.probability(step);
    return uniform01(policy_rng) < p0 ? 0 : 1;
  };
  // Emits a token carrying the log-probability of the decision that produced it.
  auto emit = [&](TokenId token, Decision kind, std::uint8_t choice) {
    DecisionStep step{b, kind, choice};
    tokens.push_back(token);
    traj.decisions.push_back(step);
    traj.logprobs.push_back(policy.logprob(step));
  };

  enum class State { kThink, kPostClose, kSolution, kAnswer };
  State state;
  if (decide(Decision::kFirstToken) == 0) {
    emit(vocab_.think_close(), Decision::kFirstToken, 0);
    state = State::kPostClose;
  } else {
    emit(think_, Decision::kFirstToken, 1);
    state = State::kThink;
  }

  while (true) {
    if (full()) {
      traj.truncated = true;
      break;
    }
    if (state == State::kThink) {
      if (decide(Decision::kThinkContinue) == 0) {
        emit(think_, Decision::kThinkContinue, 0);
      } else {
        emit(vocab_.think_close(), Decision::kThinkContinue, 1);
        state = State::kPostClose;
      }
    } else if (state == State::kPostClose) {
      if (decide(Decision::kPostClose) == 0) {
        emit(solution_, Decision::kPostClose, 0);
        state = State::kSolution;
      } else {
        emit(verb_, Decision::kPostClose, 1);
        state = State::kThink;
      }
    } else {
      if (decide(Decision::kSolutionContinue) == 0) {
        emit(solution_, Decision::kSolutionContinue, 0);
        continue;
      }
      // The policy chooses when to answer; which answer appears is drawn by
      // the environment. The answer token carries the stop decision's
      // log-probability and nothing for the answer identity.
      const std::size_t n_think = count_think_tokens(tokens);
      const double p = spec_.correct_probability(bucket, n_think);
      const auto answers = vocab_.answer_tokens();
      TokenId answer = prompt.golden_answer;
      if (!(uniform01(env_rng) < p)) {
        std::vector<TokenId> wrong;
        for (auto a : answers) {
          if (a != prompt.golden_answer) wrong.push_back(a);
        }
        answer = wrong[uniform_index(env_rng, wrong.size())];
      }
      emit(answer, Decision::kSolutionContinue, 1);
      traj.answer = answer;
      break;
    }
  }

  traj.effective_think_tokens = count_think_tokens(tokens);
  traj.response = Response(std::move(tokens), vocab_.think_close(), traj.logprobs);
  traj.mode = classify_mode(traj.response);
  traj.correct = answer_oracle(traj, prompt);
  return traj;
}

bool answer_oracle(const Trajectory& trajectory, const Prompt& prompt) {
  return trajectory.answer.has_value() && *trajectory.answer == prompt.golden_answer;
}

std::vector<Prompt> Environment::make_taskset(std::uint64_t seed,
                                              std::span<const std::size_t> counts) const {
  if (counts.size() > spec_.buckets.size()) {
    throw Error(ErrorKind::kInvalidArgument, "make_taskset: more counts than buckets");
  }
  Rng rng = make_stream(seed, "tasks");
  const auto answers = vocab_.answer_tokens();
  const TokenId query = vocab_.at("Q");
  std::vector<Prompt> out;
  for (std::size_t bucket = 0; bucket < counts.size(); ++bucket) {
    for (std::size_t i = 0; i < counts[bucket]; ++i) {
      Prompt p;
      p.id = spec_.buckets[bucket].name + "-" + std::to_string(i);
      p.query_tokens.assign(3 + uniform_index(rng, 6), query);
      p.ellipsis_suffix = true;
      p.golden_answer = answers[uniform_index(rng, answers.size())];
      p.difficulty = spec_.buckets[bucket].difficulty;
      out.push_back(std::move(p));
    }
  }
  return out;
}

PolicySnapshot default_initial_policy(std::size_t buckets) {
  PolicySnapshot p(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    p.set_first_token(b, 0.2);
    p.set_think_continue(b, 0.85);
    p.set_post_close(b, 0.1);
    p.set_solution_continue(b, 0.6);
  }
  return p;
}

}  // namespace tnt
