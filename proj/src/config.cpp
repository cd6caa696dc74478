#include "tnt/config.hpp"

#include <fstream>
#include <set>

#include "tnt/error.hpp"

namespace tnt {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::kConfig, "config field '" + field + "': " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.contains(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(where + "." + key, std::string("wrong type (") + e.what() + ")");
  }
}

}  // namespace

PolicySnapshot InitialPolicySpec::build(std::size_t buckets) const {
  if (checkpoint) {
    auto p = checkpoint_load(*checkpoint);
    if (p.buckets() != buckets) {
      throw Error(ErrorKind::kConfig, "initial_policy.checkpoint has a different bucket count");
    }
    return p;
  }
  PolicySnapshot p(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    p.set_first_token(b, p_nonthinking);
    p.set_think_continue(b, p_think_continue);
    p.set_post_close(b, p_hack);
    p.set_solution_continue(b, p_solution_continue);
  }
  return p;
}

void RunConfig::validate() const {
  try {
    train.validate();
    environment.validate();
    analysis.budget.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  if (tasks_per_bucket.size() != environment.buckets.size()) {
    fail("environment.tasks_per_bucket", "needs one count per bucket");
  }
  std::size_t total = 0;
  for (auto c : tasks_per_bucket) total += c;
  if (total == 0) fail("environment.tasks_per_bucket", "task set would be empty");
  if (eval_k == 0) fail("eval.k", "must be >= 1");
  if (ablation_window == 0) fail("ablation.window", "must be >= 1");
  if (analysis.lexicon.empty()) fail("analysis.lexicon", "must not be empty");
  if (!(max_error_rate >= 0.0 && max_error_rate <= 1.0)) {
    fail("analysis.max_error_rate", "must lie in [0, 1]");
  }
  for (const auto& f : formats) {
    try {
      report_format_from_string(f);
    } catch (const Error& e) {
      fail("output.formats", e.what());
    }
  }
  for (double p : {initial_policy.p_nonthinking, initial_policy.p_think_continue,
                   initial_policy.p_hack, initial_policy.p_solution_continue}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("initial_policy", "probabilities must lie in [0, 1]");
  }
}

RunConfig config_from_json(const json& doc) {
  reject_unknown(doc, "", {"train", "environment", "initial_policy", "eval", "ablation",
                           "analysis", "output"});
  RunConfig c;

  if (!doc.contains("train")) fail("train", "missing required section");
  const auto& t = doc.at("train");
  reject_unknown(t, "train", {"steps", "batch_size", "group_size", "learning_rate",
                              "reward_mode", "seed", "eval_every", "reuse_epochs",
                              "clip_epsilon", "omega", "l_empty"});
  if (!t.contains("steps")) fail("train.steps", "missing required field");
  read(t, "train", "steps", c.train.steps);
  read(t, "train", "batch_size", c.train.batch_size);
  read(t, "train", "group_size", c.train.group_size);
  read(t, "train", "learning_rate", c.train.learning_rate);
  if (t.contains("reward_mode")) {
    std::string mode;
    read(t, "train", "reward_mode", mode);
    try {
      c.train.reward_mode = reward_mode_from_string(mode);
    } catch (const Error&) {
      fail("train.reward_mode", "must be 'tnt' or 'naive'");
    }
  }
  read(t, "train", "seed", c.train.seed);
  read(t, "train", "eval_every", c.train.eval_every);
  read(t, "train", "reuse_epochs", c.train.reuse_epochs);
  read(t, "train", "clip_epsilon", c.train.clip.epsilon);
  read(t, "train", "omega", c.train.budget.omega);
  read(t, "train", "l_empty", c.train.budget.l_empty);

  if (doc.contains("environment")) {
    const auto& e = doc.at("environment");
    reject_unknown(e, "environment",
                   {"think_cap", "max_len", "buckets", "tasks_per_bucket", "task_seed"});
    read(e, "environment", "think_cap", c.environment.think_cap);
    read(e, "environment", "max_len", c.environment.max_len);
    read(e, "environment", "tasks_per_bucket", c.tasks_per_bucket);
    read(e, "environment", "task_seed", c.task_seed);
    if (e.contains("buckets")) {
      c.environment.buckets.clear();
      std::size_t i = 0;
      for (const auto& b : e.at("buckets")) {
        const std::string where = "environment.buckets[" + std::to_string(i++) + "]";
        reject_unknown(b, where, {"name", "difficulty", "base_correct", "gain"});
        for (const char* key : {"name", "difficulty", "base_correct", "gain"}) {
          if (!b.contains(key)) fail(where + "." + key, "missing required field");
        }
        BucketSpec spec;
        read(b, where, "name", spec.name);
        read(b, where, "difficulty", spec.difficulty);
        read(b, where, "base_correct", spec.base_correct);
        read(b, where, "gain", spec.gain);
        c.environment.buckets.push_back(spec);
      }
    }
  }

  if (doc.contains("initial_policy")) {
    const auto& p = doc.at("initial_policy");
    reject_unknown(p, "initial_policy", {"p_nonthinking", "p_think_continue", "p_hack",
                                         "p_solution_continue", "checkpoint"});
    read(p, "initial_policy", "p_nonthinking", c.initial_policy.p_nonthinking);
    read(p, "initial_policy", "p_think_continue", c.initial_policy.p_think_continue);
    read(p, "initial_policy", "p_hack", c.initial_policy.p_hack);
    read(p, "initial_policy", "p_solution_continue", c.initial_policy.p_solution_continue);
    if (p.contains("checkpoint") && !p.at("checkpoint").is_null()) {
      std::string path;
      read(p, "initial_policy", "checkpoint", path);
      c.initial_policy.checkpoint = path;
    }
  }

  if (doc.contains("eval")) {
    const auto& e = doc.at("eval");
    reject_unknown(e, "eval", {"k", "seed"});
    read(e, "eval", "k", c.eval_k);
    read(e, "eval", "seed", c.eval_seed);
  }

  if (doc.contains("ablation")) {
    const auto& a = doc.at("ablation");
    reject_unknown(a, "ablation", {"seeds", "window"});
    read(a, "ablation", "seeds", c.ablation_seeds);
    read(a, "ablation", "window", c.ablation_window);
  }

  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    reject_unknown(a, "analysis",
                   {"lexicon", "tokenizer", "omega", "fallback_budget", "max_error_rate"});
    read(a, "analysis", "lexicon", c.analysis.lexicon);
    if (a.contains("tokenizer")) {
      std::string tok;
      read(a, "analysis", "tokenizer", tok);
      if (tok != "whitespace") fail("analysis.tokenizer", "only 'whitespace' is available");
    }
    read(a, "analysis", "omega", c.analysis.budget.omega);
    read(a, "analysis", "fallback_budget", c.analysis.budget.l_empty);
    read(a, "analysis", "max_error_rate", c.max_error_rate);
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    reject_unknown(o, "output", {"formats"});
    read(o, "output", "formats", c.formats);
  }

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const RunConfig& c) {
  json buckets = json::array();
  for (const auto& b : c.environment.buckets) {
    buckets.push_back({{"name", b.name},
                       {"difficulty", b.difficulty},
                       {"base_correct", b.base_correct},
                       {"gain", b.gain}});
  }
  json initial = {{"p_nonthinking", c.initial_policy.p_nonthinking},
                  {"p_think_continue", c.initial_policy.p_think_continue},
                  {"p_hack", c.initial_policy.p_hack},
                  {"p_solution_continue", c.initial_policy.p_solution_continue},
                  {"checkpoint", c.initial_policy.checkpoint ? json(*c.initial_policy.checkpoint)
                                                             : json(nullptr)}};
  return {
      {"train",
       {{"steps", c.train.steps},
        {"batch_size", c.train.batch_size},
        {"group_size", c.train.group_size},
        {"learning_rate", c.train.learning_rate},
        {"reward_mode", to_string(c.train.reward_mode)},
        {"seed", c.train.seed},
        {"eval_every", c.train.eval_every},
        {"reuse_epochs", c.train.reuse_epochs},
        {"clip_epsilon", c.train.clip.epsilon},
        {"omega", c.train.budget.omega},
        {"l_empty", c.train.budget.l_empty}}},
      {"environment",
       {{"think_cap", c.environment.think_cap},
        {"max_len", c.environment.max_len},
        {"buckets", buckets},
        {"tasks_per_bucket", c.tasks_per_bucket},
        {"task_seed", c.task_seed}}},
      {"initial_policy", initial},
      {"eval", {{"k", c.eval_k}, {"seed", c.eval_seed}}},
      {"ablation", {{"seeds", c.ablation_seeds}, {"window", c.ablation_window}}},
      {"analysis",
       {{"lexicon", c.analysis.lexicon},
        {"tokenizer", "whitespace"},
        {"omega", c.analysis.budget.omega},
        {"fallback_budget", c.analysis.budget.l_empty},
        {"max_error_rate", c.max_error_rate}}},
      {"output", {{"formats", c.formats}}},
  };
}

}  // namespace tnt
