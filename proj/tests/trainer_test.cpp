#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "tnt/error.hpp"
#include "tnt/trainer.hpp"

using namespace tnt;
namespace fs = std::filesystem;

namespace {

PolicySnapshot forced(std::size_t buckets, double p_nt, double p_cont, double p_hack,
                      double p_sol) {
  PolicySnapshot p(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    p.set_first_token(b, p_nt);
    p.set_think_continue(b, p_cont);
    p.set_post_close(b, p_hack);
    p.set_solution_continue(b, p_sol);
  }
  return p;
}

TrainConfig small_config(std::size_t steps) {
  TrainConfig c;
  c.steps = steps;
  c.batch_size = 6;
  c.group_size = 4;
  c.learning_rate = 1.0;
  c.eval_every = 5;
  return c;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("tnt_trainer_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("zero steps return the initial policy") {
  const Environment env;
  const auto tasks = env.make_taskset(1, std::vector<std::size_t>{4, 4, 4});
  const auto init = default_initial_policy(3);
  const auto r = run_training(small_config(0), env, tasks, init);
  CHECK(r.logs.empty());
  CHECK(r.policy == init);
}

TEST_CASE("degenerate groups leave the policy unchanged and use the fallback budget") {
  TaskSpec spec;
  spec.buckets = {{"easy", 0.0, 1.0, 0.0}};
  const Environment env(spec);
  const auto tasks = env.make_taskset(1, std::vector<std::size_t>{8});
  const auto init = forced(1, 1.0, 0.0, 0.0, 0.0);
  const auto r = run_training(small_config(1), env, tasks, init);
  REQUIRE(r.logs.size() == 1);
  CHECK(std::equal(r.policy.params().begin(), r.policy.params().end(), init.params().begin()));
  CHECK(r.logs[0].fallback_prompts == 6);
  CHECK(r.logs[0].nonthinking_count == 24);
  CHECK(r.logs[0].mean_reward == 2.0);
}

TEST_CASE("training is deterministic per seed") {
  const Environment env;
  const auto tasks = env.make_taskset(3, std::vector<std::size_t>{5, 5, 5});
  const auto init = default_initial_policy(3);
  auto cfg = small_config(12);
  const auto a = run_training(cfg, env, tasks, init);
  const auto b = run_training(cfg, env, tasks, init);
  CHECK(a.logs == b.logs);
  CHECK(checkpoint_bytes(a.policy, 12) == checkpoint_bytes(b.policy, 12));
  cfg.seed = 2;
  const auto c = run_training(cfg, env, tasks, init);
  CHECK_FALSE(c.logs == a.logs);
}

TEST_CASE("every response is rewarded with that step's budget") {
  const Environment env;
  const auto tasks = env.make_taskset(4, std::vector<std::size_t>{5, 5, 5});
  auto init = default_initial_policy(3);
  for (std::size_t b = 0; b < 3; ++b) init.set_first_token(b, 0.5);
  const auto cfg = small_config(6);

  struct Seen {
    std::vector<std::size_t> thinking_h;
    std::vector<std::pair<Response, bool>> members;
    std::vector<RewardOutcome> outcomes;
    std::vector<BudgetContext> contexts;
  };
  std::map<std::pair<std::size_t, std::string>, Seen> seen;
  std::map<std::size_t, std::size_t> per_step;
  TrainObserver obs;
  obs.on_trajectory = [&](std::size_t step, const Prompt& p, const Trajectory& t,
                          const RewardOutcome& o, const BudgetContext& ctx) {
    auto& s = seen[{step, p.id}];
    if (t.mode == Mode::kThinking && t.response.tau_index()) {
      s.thinking_h.push_back(solution_length(t.response));
    }
    s.members.emplace_back(t.response, t.correct);
    s.outcomes.push_back(o);
    s.contexts.push_back(ctx);
    ++per_step[step];
  };
  std::vector<StepLog> logs;
  obs.on_step = [&](const StepLog& l) { logs.push_back(l); };
  run_training(cfg, env, tasks, init, obs);

  CHECK(logs.size() == 6);
  for (const auto& l : logs) CHECK(l.thinking_count + l.nonthinking_count == 24);
  for (const auto& [step, n] : per_step) CHECK(n == 24);
  std::size_t fallbacks = 0;
  for (const auto& [key, s] : seen) {
    REQUIRE(s.members.size() == 4);
    // Budget recomputed from the group itself, by hand.
    double expected = 1000.0;
    if (!s.thinking_h.empty()) {
      double sum = 0;
      for (auto h : s.thinking_h) sum += static_cast<double>(h);
      expected = 2.0 * sum / static_cast<double>(s.thinking_h.size());
    } else {
      ++fallbacks;
    }
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(s.contexts[i].budget == doctest::Approx(expected).epsilon(1e-15));
      CHECK(s.contexts[i].used_fallback == s.thinking_h.empty());
      CHECK(s.outcomes[i] == reward_tnt(s.members[i].first, s.members[i].second, s.contexts[i]));
    }
  }
  std::size_t logged = 0;
  for (const auto& l : logs) logged += l.fallback_prompts;
  CHECK(logged == fallbacks);
}

TEST_CASE("naive mode ignores the budget") {
  const Environment env;
  const auto tasks = env.make_taskset(4, std::vector<std::size_t>{3, 3, 3});
  auto cfg = small_config(3);
  cfg.reward_mode = RewardMode::kNaive;
  TrainObserver obs;
  obs.on_trajectory = [&](std::size_t, const Prompt&, const Trajectory& t, const RewardOutcome& o,
                          const BudgetContext&) {
    CHECK(o == reward_naive(t.response, t.correct));
  };
  run_training(cfg, env, tasks, default_initial_policy(3), obs);
}

TEST_CASE("checkpoints are emitted on cadence and at the end") {
  const Environment env;
  const auto tasks = env.make_taskset(1, std::vector<std::size_t>{3, 3, 3});
  auto cfg = small_config(12);
  std::vector<std::size_t> steps;
  TrainObserver obs;
  obs.on_checkpoint = [&](const PolicySnapshot&, std::size_t s) { steps.push_back(s); };
  run_training(cfg, env, tasks, default_initial_policy(3), obs);
  CHECK(steps == std::vector<std::size_t>{5, 10, 12});
}

TEST_CASE("checkpoint round trip") {
  const auto dir = temp_dir("ckpt");
  auto p = default_initial_policy(3);
  p.logit(2, 4) = 0.1 + 1e-17;
  p.logit(0, 5) = -3.0000000000000004;
  p = PolicySnapshot(p.buckets(), std::vector<double>(p.params().begin(), p.params().end()), 41);
  checkpoint_save(p, 7, dir / "a.json");
  const auto back = checkpoint_load(dir / "a.json");
  CHECK(back == p);
  CHECK(back.version() == 41);

  checkpoint_save(p, 7, dir / "b.json");
  std::ifstream fa(dir / "a.json", std::ios::binary), fb(dir / "b.json", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(sa == checkpoint_bytes(p, 7));

  {
    std::ofstream trunc(dir / "t.json", std::ios::binary);
    trunc << sa.substr(0, sa.size() / 2);
  }
  try {
    checkpoint_load(dir / "t.json");
    FAIL("expected CorruptCheckpoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCorruptCheckpoint);
  }
  try {
    checkpoint_load(dir / "missing.json");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
  fs::remove_all(dir);
}

TEST_CASE("evaluate") {
  TaskSpec spec;
  spec.buckets = {{"easy", 0.0, 1.0, 0.0}, {"hard", 1.0, 0.1, 0.8}};
  const Environment env(spec);
  const auto easy = env.make_taskset(1, std::vector<std::size_t>{6});

  const auto honest = evaluate(forced(2, 0.0, 0.0, 0.0, 0.0), env, easy, 4, 3);
  REQUIRE(honest.rows.size() >= 2);
  CHECK(honest.rows[0].dataset == "easy");
  CHECK(honest.rows[0].accuracy == 100.0);
  CHECK(honest.rows.back().dataset == "all");

  const auto direct = evaluate(forced(2, 1.0, 0.0, 0.0, 0.0), env, easy, 4, 3);
  CHECK(direct.rows.back().nonthinking_ratio == 100.0);

  const Environment mixed_env;
  const auto tasks = mixed_env.make_taskset(2, std::vector<std::size_t>{4, 4, 4});
  const auto a = evaluate(default_initial_policy(3), mixed_env, tasks, 8, 11);
  const auto b = evaluate(default_initial_policy(3), mixed_env, tasks, 8, 11);
  CHECK(a == b);
  CHECK(emit_report(a, ReportFormat::kJson) == emit_report(b, ReportFormat::kJson));
  CHECK(a.rows.size() == 4);
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.learning_rate = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  const Environment env;
  CHECK_THROWS_AS(run_training(small_config(1), env, {}, default_initial_policy(3)), Error);
}

TEST_CASE("step log json round trip") {
  StepLog l;
  l.step = 3;
  l.thinking_count = 10;
  l.nonthinking_count = 6;
  l.nonthinking_mean_tokens = 1.0 / 3.0;
  l.verb_probability = 0.1 + 0.2;
  CHECK(step_log_from_json(to_json(l)) == l);
}
