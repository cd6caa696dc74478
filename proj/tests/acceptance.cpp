// Acceptance checks, one line per criterion. Exit status is nonzero when any
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "tnt/ablation.hpp"
#include "tnt/analysis.hpp"
#include "tnt/config.hpp"
#include "tnt/grpo.hpp"
#include "tnt/reward.hpp"
#include "tnt/trainer.hpp"

using namespace tnt;
using namespace tnt::testing;

namespace {

constexpr double kBudgetTolerance = 1e-12;
constexpr double kTeTolerance = 0.005;
constexpr double kGradTolerance = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr double kMeanTolerance = 1e-12;
constexpr double kStdTolerance = 1e-9;
constexpr double kTokenRatio = 2.0;
constexpr double kNaiveVerbMin = 0.50;
constexpr double kTntVerbMax = 0.10;
constexpr double kOverBudgetMax = 0.05;
constexpr std::size_t kAblationSteps = 2000;
constexpr std::size_t kAblationWindow = 200;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("[%s] criterion %d: %s (%.2fs) %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(),
              secs, v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Verdict reward_table() {
  const Vocab v = Vocab::simulator_default();
  const TokenId close = v.think_close(), think = v.at("THINK"), sol = v.at("SOL");
  auto make = [&](bool thinking, std::size_t len) {
    TokenSeq s(len, sol);
    s[0] = thinking ? think : close;
    if (thinking && len > 1) s[1] = close;
    return Response(s, close);
  };
  BudgetContext ctx;
  ctx.budget = 10.0;
  struct Case {
    bool thinking;
    std::size_t len;
    bool correct;
    double tnt;
    double naive;
  };
  const Case cases[] = {
      {true, 5, true, 1, 1},    {true, 5, false, 0, 0},    {true, 50, true, 1, 1},
      {false, 5, true, 2, 2},   {false, 5, false, -1, -1}, {false, 10, true, 2, 2},
      {false, 10, false, -1, -1}, {false, 11, true, -2, 2}, {false, 11, false, -2, -1},
  };
  int wrong = 0;
  for (const auto& c : cases) {
    const auto r = make(c.thinking, c.len);
    if (reward_tnt(r, c.correct, ctx).value != c.tnt) ++wrong;
    if (reward_naive(r, c.correct).value != c.naive) ++wrong;
  }
  return {wrong == 0, std::to_string(std::size(cases)) + " cases, " + std::to_string(wrong) +
                          " mismatches"};
}

Verdict budget_formula() {
  std::mt19937_64 rng(1);
  double worst = 0;
  const BudgetParams params;
  if (params.omega != 2.0 || params.l_empty != 1000.0) return {false, "unexpected defaults"};
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::size_t> lengths(1 + rng() % 16);
    long double sum = 0;
    for (auto& x : lengths) {
      x = rng() % 20000;
      sum += x;
    }
    const long double expected = 2.0L * sum / lengths.size();
    const double got = compute_budget(lengths, params).budget;
    worst = std::max(worst, static_cast<double>(std::abs(got - expected) / expected));
  }
  const auto fallback = compute_budget({}, params);
  const bool ok = worst <= kBudgetTolerance && fallback.budget == 1000.0 && fallback.used_fallback;
  return {ok, fmt("max relative error %.3g", worst) + fmt(", empty -> %.0f", fallback.budget)};
}

Verdict te_reproduction() {
  struct Row {
    double acc, tokens, printed;
  };
  const Row rows[] = {{41.0, 5893, 0.53}, {37.0, 12736, 0.33}, {38.1, 5849, 0.50}, {36.1, 5104, 0.50}};
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    const double te = token_efficiency(r.acc, r.tokens);
    const bool hit = std::abs(te - r.printed) <= kTeTolerance;
    ok = ok && hit;
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.1f,%.0f)->%.4f vs %.2f%s; ", r.acc, r.tokens, te, r.printed,
                  hit ? "" : " MISS");
    detail += buf;
  }
  return {ok, detail};
}

Verdict gradient_check() {
  std::mt19937_64 rng(4);
  const ClipParams clip{0.2};
  double worst = 0;
  int done = 0, skipped = 0;
  std::size_t max_params = 0;
  while (done < 200) {
    auto inst = random_grad_instance(rng, 8, 8, 2);
    if (near_clip_kink(inst, clip.epsilon)) {
      ++skipped;
      continue;
    }
    max_params = std::max(max_params, inst.policy.param_count());
    const auto analytic = objective_gradient(inst.groups, inst.policy, clip);
    const auto fd = finite_difference_gradient(inst, clip, kFdStep);
    worst = std::max(worst, relative_error(analytic, fd));
    ++done;
  }
  return {worst < kGradTolerance && max_params <= 12,
          fmt("200 instances, max relative error %.3g", worst) +
              ", params <= " + std::to_string(max_params) + ", kink-adjacent draws skipped " +
              std::to_string(skipped)};
}

Verdict advantage_properties() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  int bad = 0, degenerate = 0;
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> r(1 + rng() % 10);
    const bool flat = i % 10 == 0;
    for (auto& x : r) x = flat ? 1.5 : std::round(u(rng) * 4) / 4;
    const auto a = group_advantages(r);
    if (a.degenerate) {
      ++degenerate;
      for (double x : a.per_response) bad += x != 0.0;
      continue;
    }
    const auto [m, s] = mean_pstd(a.per_response);
    bad += std::abs(m) > kMeanTolerance || std::abs(s - 1) > kStdTolerance;
    const double c = u(rng), k = 0.05 + std::abs(u(rng));
    std::vector<double> shifted(r), scaled(r);
    for (auto& x : shifted) x += c;
    for (auto& x : scaled) x *= k;
    const auto as = group_advantages(shifted).per_response;
    const auto ak = group_advantages(scaled).per_response;
    for (std::size_t j = 0; j < r.size(); ++j) {
      bad += std::abs(as[j] - a.per_response[j]) > 1e-9;
      bad += std::abs(ak[j] - a.per_response[j]) > 1e-9;
    }
  }
  return {bad == 0, "2000 groups (" + std::to_string(degenerate) + " degenerate), " +
                        std::to_string(bad) + " violations"};
}

struct AblationFixture {
  RunConfig config;
  Environment env;
  std::vector<Prompt> tasks;
  PolicySnapshot initial;
  AblationReport report;
};

AblationFixture& ablation() {
  static AblationFixture* fx = [] {
    auto* f = new AblationFixture{RunConfig{}, Environment{}, {}, {}, {}};
    f->config.train.steps = kAblationSteps;
    f->env = Environment(f->config.environment);
    f->tasks = f->env.make_taskset(f->config.task_seed, f->config.tasks_per_bucket);
    f->initial = f->config.initial_policy.build(f->env.spec().buckets.size());
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    f->report = run_ablation(f->config.train, f->env, f->tasks, f->initial, seeds, kAblationWindow,
                             f->config.eval_k, f->config.eval_seed);
    return f;
  }();
  return *fx;
}

Verdict hacking_suppression() {
  const auto& rep = ablation().report;
  double tnt_tokens = 0, naive_tokens = 0;
  double naive_verb_min = 1, tnt_verb_max = 0, tnt_over_max = 0;
  int n = 0;
  std::string per_seed;
  for (std::size_t i = 0; i + 1 < rep.runs.size(); i += 2) {
    const auto& t = rep.runs[i].final_window;
    const auto& nv = rep.runs[i + 1].final_window;
    if (rep.runs[i].mode != RewardMode::kTnt || rep.runs[i + 1].mode != RewardMode::kNaive) {
      return {false, "unexpected run order"};
    }
    tnt_tokens += t.nonthinking_mean_tokens;
    naive_tokens += nv.nonthinking_mean_tokens;
    naive_verb_min = std::min(naive_verb_min, nv.verb_probability);
    tnt_verb_max = std::max(tnt_verb_max, t.verb_probability);
    tnt_over_max = std::max(tnt_over_max, t.over_budget_rate);
    char buf[160];
    std::snprintf(buf, sizeof buf, "[seed %llu: nt tokens %.2f vs %.2f, verb %.3f vs %.3f, over %.4f] ",
                  static_cast<unsigned long long>(rep.runs[i].seed), nv.nonthinking_mean_tokens,
                  t.nonthinking_mean_tokens, nv.verb_probability, t.verb_probability,
                  t.over_budget_rate);
    per_seed += buf;
    ++n;
  }
  tnt_tokens /= n;
  naive_tokens /= n;
  const double ratio = naive_tokens / tnt_tokens;
  const bool ok = n == 5 && ratio >= kTokenRatio && naive_verb_min >= kNaiveVerbMin &&
                  tnt_verb_max <= kTntVerbMax && tnt_over_max < kOverBudgetMax;
  char head[200];
  std::snprintf(head, sizeof head,
                "token ratio naive/tnt %.2f, naive verb min %.3f, tnt verb max %.3f, tnt "
                "over-budget max %.4f; ",
                ratio, naive_verb_min, tnt_verb_max, tnt_over_max);
  return {ok, head + per_seed};
}

double ratio_for(const RunReport& r, const std::string& dataset) {
  for (const auto& row : r.rows) {
    if (row.dataset == dataset) return row.nonthinking_ratio;
  }
  throw std::runtime_error("no row " + dataset);
}

Verdict mode_selection() {
  const auto& rep = ablation().report;
  bool ok = true;
  std::string detail;
  for (const auto& run : rep.runs) {
    if (run.mode != RewardMode::kTnt) continue;
    const double easy = ratio_for(run.eval, "easy"), hard = ratio_for(run.eval, "hard");
    ok = ok && easy > hard;
    char buf[96];
    std::snprintf(buf, sizeof buf, "[seed %llu: easy %.1f%% hard %.1f%%] ",
                  static_cast<unsigned long long>(run.seed), easy, hard);
    detail += buf;
  }
  return {ok, detail};
}

Verdict analyzer_golden() {
  const std::string dir = TNT_FIXTURE_DIR;
  Vocab vocab;
  const auto corpus = ingest_corpus(std::filesystem::path(dir + "/corpus100.jsonl"), vocab);
  const auto csv = emit_report(analyze_corpus(corpus, vocab), ReportFormat::kCsv);
  std::ifstream in(dir + "/golden_report.csv", std::ios::binary);
  std::stringstream golden;
  golden << in.rdbuf();
  return {csv == golden.str(), std::to_string(corpus.records.size()) + " records, " +
                                   std::to_string(csv.size()) + " bytes"};
}

Verdict determinism() {
  auto& fx = ablation();
  TrainConfig cfg = fx.config.train;
  cfg.seed = 1;
  cfg.reward_mode = RewardMode::kTnt;
  const auto rerun = run_training(cfg, fx.env, fx.tasks, fx.initial);
  const auto& first = fx.report.runs.front().result;
  const bool logs = rerun.logs == first.logs;
  std::string a, b;
  for (const auto& l : rerun.logs) a += to_json(l).dump() + "\n";
  for (const auto& l : first.logs) b += to_json(l).dump() + "\n";
  const bool bytes = a == b;
  const bool ckpt = checkpoint_bytes(rerun.policy, cfg.steps) == checkpoint_bytes(first.policy, cfg.steps);
  return {logs && bytes && ckpt, std::string("logs ") + (bytes ? "identical" : "differ") +
                                     ", checkpoint " + (ckpt ? "identical" : "differs")};
}

Verdict cross_module() {
  const Vocab v = Vocab::simulator_default();
  const TokenId close = v.think_close(), think = v.at("THINK"), sol = v.at("SOL");
  std::mt19937_64 rng(10);
  std::size_t total = 0, flagged = 0, mismatched = 0;
  while (total < 10000) {
    std::vector<Response> rs;
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) {
      TokenSeq s(1 + rng() % 40, sol);
      if (rng() % 2) {
        s[0] = close;
      } else {
        s[0] = think;
        s[rng() % s.size()] = close;
      }
      rs.emplace_back(s, close);
      ids.push_back("p" + std::to_string(rng() % 4));
    }
    const auto budgets = budgets_by_prompt(rs, ids, {});
    const auto flags = hacking_flags(rs, ids, budgets);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      BudgetContext ctx;
      ctx.budget = budgets.at(ids[i]);
      const bool over = reward_tnt(rs[i], rng() % 2, ctx).branch == RewardBranch::kNonThinkingOverBudget;
      flagged += flags[i];
      mismatched += flags[i] != over;
      ++total;
    }
  }
  return {mismatched == 0, std::to_string(total) + " responses, " + std::to_string(flagged) +
                               " flagged, " + std::to_string(mismatched) + " disagreements"};
}

}  // namespace

int main() {
  report(1, "reward table exactness", reward_table);
  report(2, "budget formula", budget_formula);
  report(3, "TE reproduction of printed values", te_reproduction);
  std::printf("[INFO] criterion 3: (36.06, 5103.8) -> %.4f using the unrounded table averages\n",
              token_efficiency(36.06, 5103.8));
  report(4, "GRPO gradient check", gradient_check);
  report(5, "advantage properties", advantage_properties);
  report(6, "hacking-suppression ablation", hacking_suppression);
  report(7, "mode selection easy vs hard", mode_selection);
  report(8, "analyzer golden CSV", analyzer_golden);
  report(9, "determinism", determinism);
  report(10, "hacking flags vs reward branch", cross_module);
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
