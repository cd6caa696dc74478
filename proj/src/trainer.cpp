#include "tnt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tnt/error.hpp"

namespace tnt {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw Error(ErrorKind::kConfig, std::string("train.") + field + ": " + what);
  };
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(group_size >= 1, "group_size", "must be >= 1");
  require(eval_every >= 1, "eval_every", "must be >= 1");
  require(reuse_epochs >= 1, "reuse_epochs", "must be >= 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate", "must be > 0");
  budget.validate();
  clip.validate();
}

nlohmann::json to_json(const StepLog& l) {
  return {{"step", l.step},
          {"thinking_count", l.thinking_count},
          {"nonthinking_count", l.nonthinking_count},
          {"thinking_mean_tokens", l.thinking_mean_tokens},
          {"nonthinking_mean_tokens", l.nonthinking_mean_tokens},
          {"mean_reward", l.mean_reward},
          {"accuracy", l.accuracy},
          {"over_budget_count", l.over_budget_count},
          {"over_budget_rate", l.over_budget_rate},
          {"nonthinking_ratio", l.nonthinking_ratio},
          {"verb_count", l.verb_count},
          {"verb_probability", l.verb_probability},
          {"fallback_prompts", l.fallback_prompts},
          {"policy_version", l.policy_version}};
}

StepLog step_log_from_json(const nlohmann::json& j) {
  StepLog l;
  l.step = j.at("step").get<std::size_t>();
  l.thinking_count = j.at("thinking_count").get<std::size_t>();
  l.nonthinking_count = j.at("nonthinking_count").get<std::size_t>();
  l.thinking_mean_tokens = j.at("thinking_mean_tokens").get<double>();
  l.nonthinking_mean_tokens = j.at("nonthinking_mean_tokens").get<double>();
  l.mean_reward = j.at("mean_reward").get<double>();
  l.accuracy = j.at("accuracy").get<double>();
  l.over_budget_count = j.at("over_budget_count").get<std::size_t>();
  l.over_budget_rate = j.at("over_budget_rate").get<double>();
  l.nonthinking_ratio = j.at("nonthinking_ratio").get<double>();
  l.verb_count = j.at("verb_count").get<std::size_t>();
  l.verb_probability = j.at("verb_probability").get<double>();
  l.fallback_prompts = j.at("fallback_prompts").get<std::size_t>();
  l.policy_version = j.at("policy_version").get<std::uint64_t>();
  return l;
}

namespace {

// Indices of batch_size prompts; without replacement while the task set is
// large enough.
std::vector<std::size_t> sample_batch(std::size_t n_tasks, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> out;
  if (batch_size <= n_tasks) {
    std::vector<std::size_t> idx(n_tasks);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch_size; ++i) {
      std::swap(idx[i], idx[i + uniform_index(rng, n_tasks - i)]);
    }
    out.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(batch_size));
  } else {
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(uniform_index(rng, n_tasks));
  }
  return out;
}

}  // namespace

TrainResult run_training(const TrainConfig& config, const Environment& env,
                         std::span<const Prompt> tasks, const PolicySnapshot& initial,
                         const TrainObserver& observer) {
  config.validate();
  if (tasks.empty()) throw Error(ErrorKind::kInvalidArgument, "run_training: no tasks");
  if (initial.buckets() != env.spec().buckets.size()) {
    throw Error(ErrorKind::kShapeMismatch, "run_training: policy and environment bucket counts differ");
  }
  const auto verbs = env.vocab().verb_ids();
  TrainResult result{initial, {}};

  for (std::size_t step = 1; step <= config.steps; ++step) {
    const PolicySnapshot& policy = result.policy;
    Rng batch_rng = make_stream(config.seed, "batch", step);
    const auto batch = sample_batch(tasks.size(), config.batch_size, batch_rng);

    std::vector<Group> groups;
    groups.reserve(batch.size());
    StepLog log;
    log.step = step;
    std::size_t t_tokens = 0, nt_tokens = 0, correct = 0;
    double reward_sum = 0.0;

    for (std::size_t slot = 0; slot < batch.size(); ++slot) {
      const Prompt& prompt = tasks[batch[slot]];
      Rng policy_rng = make_stream(config.seed, "sampling", step, slot);
      Rng env_rng = make_stream(config.seed, "answers", step, slot);
      std::vector<Trajectory> trajs;
      trajs.reserve(config.group_size);
      for (std::size_t k = 0; k < config.group_size; ++k) {
        trajs.push_back(env.sample_response(policy, prompt, policy_rng, env_rng));
      }

      // Split by mode and derive this prompt's budget from this step's samples.
      std::vector<Response> responses;
      for (const auto& t : trajs) responses.push_back(t.response);
      const auto ctx = budget_for_group(responses, config.budget, prompt.id);
      if (ctx.used_fallback) ++log.fallback_prompts;

      Group group;
      group.prompt_id = prompt.id;
      for (auto& t : trajs) {
        const auto outcome = config.reward_mode == RewardMode::kTnt
                                 ? reward_tnt(t.response, t.correct, ctx)
                                 : reward_naive(t.response, t.correct);
        const std::size_t len = total_length(t.response);
        if (t.mode == Mode::kThinking) {
          ++log.thinking_count;
          t_tokens += len;
        } else {
          ++log.nonthinking_count;
          nt_tokens += len;
          if (static_cast<double>(len) > ctx.budget) ++log.over_budget_count;
          if (contains_thinking_verbs(t.response, verbs)) ++log.verb_count;
        }
        correct += t.correct ? 1 : 0;
        reward_sum += outcome.value;
        if (observer.on_trajectory) observer.on_trajectory(step, prompt, t, outcome, ctx);

        group.rewards.push_back(outcome.value);
        group.old_logprobs.push_back(t.logprobs);
        group.decisions.push_back(std::move(t.decisions));
        group.responses.push_back(std::move(t.response));
      }
      groups.push_back(std::move(group));
    }

    PolicySnapshot updated = result.policy;
    for (std::size_t epoch = 0; epoch < config.reuse_epochs; ++epoch) {
      const auto grad = objective_gradient(groups, updated, config.clip);
      try {
        updated = sgd_step(updated, grad, config.learning_rate);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kNonFiniteGradient && observer.on_abort) {
          observer.on_abort(result.policy, step);
        }
        throw;
      }
    }
    result.policy = std::move(updated);

    const std::size_t total = log.thinking_count + log.nonthinking_count;
    auto ratio = [](double a, std::size_t b) { return b == 0 ? 0.0 : a / static_cast<double>(b); };
    log.thinking_mean_tokens = ratio(static_cast<double>(t_tokens), log.thinking_count);
    log.nonthinking_mean_tokens = ratio(static_cast<double>(nt_tokens), log.nonthinking_count);
    log.mean_reward = ratio(reward_sum, total);
    log.accuracy = ratio(static_cast<double>(correct), total);
    log.over_budget_rate = ratio(static_cast<double>(log.over_budget_count), log.nonthinking_count);
    log.nonthinking_ratio = ratio(static_cast<double>(log.nonthinking_count), total);
    log.verb_probability = ratio(static_cast<double>(log.verb_count), log.nonthinking_count);
    log.policy_version = result.policy.version();
    if (observer.on_step) observer.on_step(log);
    result.logs.push_back(log);

    if (observer.on_checkpoint && (step % config.eval_every == 0 || step == config.steps)) {
      observer.on_checkpoint(result.policy, step);
    }
  }
  return result;
}

RunReport evaluate(const PolicySnapshot& policy, const Environment& env,
                   std::span<const Prompt> tasks, std::size_t k_eval, std::uint64_t seed,
                   const BudgetParams& budget) {
  if (k_eval == 0) throw Error(ErrorKind::kInvalidArgument, "evaluate: k_eval must be >= 1");
  const auto& spec = env.spec();
  const auto verbs = env.vocab().verb_ids();
  const std::size_t n_buckets = spec.buckets.size();

  struct Slice {
    std::vector<Response> responses;
    std::vector<std::optional<bool>> correct;
    std::vector<bool> flags;
  };
  std::vector<Slice> slices(n_buckets + 1);

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Rng policy_rng = make_stream(seed, "eval-sampling", i);
    Rng env_rng = make_stream(seed, "eval-answers", i);
    std::vector<Trajectory> trajs;
    std::vector<Response> responses;
    for (std::size_t k = 0; k < k_eval; ++k) {
      trajs.push_back(env.sample_response(policy, tasks[i], policy_rng, env_rng));
      responses.push_back(trajs.back().response);
    }
    const auto ctx = budget_for_group(responses, budget, tasks[i].id);
    for (const auto& t : trajs) {
      const bool flag = t.mode == Mode::kNonThinking &&
                        static_cast<double>(total_length(t.response)) > ctx.budget;
      for (std::size_t s : {t.bucket, n_buckets}) {
        slices[s].responses.push_back(t.response);
        slices[s].correct.push_back(t.correct);
        slices[s].flags.push_back(flag);
      }
    }
  }

  RunReport report;
  report.tokenizer = "simulator";
  report.lexicon = env.vocab().verbs();
  report.omega = budget.omega;
  report.fallback_budget = budget.l_empty;
  for (std::size_t s = 0; s <= n_buckets; ++s) {
    if (slices[s].responses.empty()) continue;
    const std::string name = s < n_buckets ? spec.buckets[s].name : "all";
    report.rows.push_back(
        build_row(name, slices[s].responses, slices[s].correct, slices[s].flags, verbs));
  }
  return report;
}

std::string checkpoint_bytes(const PolicySnapshot& policy, std::size_t step) {
  nlohmann::json doc;
  doc["format"] = "tnt-policy";
  doc["format_version"] = kCheckpointFormatVersion;
  doc["step"] = step;
  doc["version"] = policy.version();
  doc["buckets"] = policy.buckets();
  doc["params"] = std::vector<double>(policy.params().begin(), policy.params().end());
  return doc.dump(2) + "\n";
}

PolicySnapshot checkpoint_parse(std::string_view bytes) {
  try {
    const auto doc = nlohmann::json::parse(bytes);
    if (doc.at("format").get<std::string>() != "tnt-policy") {
      throw Error(ErrorKind::kCorruptCheckpoint, "checkpoint: unexpected format tag");
    }
    const int fv = doc.at("format_version").get<int>();
    if (fv != kCheckpointFormatVersion) {
      throw Error(ErrorKind::kCorruptCheckpoint,
                  "checkpoint: unsupported format_version " + std::to_string(fv));
    }
    return PolicySnapshot(doc.at("buckets").get<std::size_t>(),
                          doc.at("params").get<std::vector<double>>(),
                          doc.at("version").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCorruptCheckpoint, std::string("checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kCorruptCheckpoint) throw;
    throw Error(ErrorKind::kCorruptCheckpoint, std::string("checkpoint: ") + e.what());
  }
}

void checkpoint_save(const PolicySnapshot& policy, std::size_t step,
                     const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write checkpoint " + tmp);
    out << checkpoint_bytes(policy, step);
    if (!out) throw Error(ErrorKind::kIo, "write failed for checkpoint " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot move checkpoint into place: " + ec.message());
}

PolicySnapshot checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_parse(ss.str());
}

}  // namespace tnt
