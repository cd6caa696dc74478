#include "tnt/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tnt/ablation.hpp"
#include "tnt/config.hpp"
#include "tnt/error.hpp"

namespace tnt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Verbosity { kQuiet, kInfo, kDebug };

Verbosity verbosity() {
  const char* v = std::getenv("TNT_LOG_LEVEL");
  if (v == nullptr) return Verbosity::kInfo;
  const std::string s(v);
  if (s == "quiet" || s == "error") return Verbosity::kQuiet;
  if (s == "debug") return Verbosity::kDebug;
  return Verbosity::kInfo;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << bytes;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// status.json marks the output directory: "running" until the command
// finishes, then "complete" or "failed".
void set_status(const fs::path& dir, const std::string& status,
                const std::optional<json>& error = std::nullopt) {
  json doc = {{"status", status}};
  if (error) doc["error"] = *error;
  write_file(dir / "status.json", doc.dump(2) + "\n");
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + dir.string());
  set_status(dir, "running");
}

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> formats;
  bool dump_trajectories = false;
};

RunConfig load_effective(const CommonOptions& o) {
  RunConfig config = load_config(o.config);
  if (o.seed) config.train.seed = *o.seed;
  if (!o.formats.empty()) {
    config.formats = o.formats;
    config.validate();
  }
  return config;
}

void write_reports(const RunReport& report, const std::vector<std::string>& formats,
                   const fs::path& dir, const std::string& stem) {
  for (const auto& f : formats) {
    const auto format = report_format_from_string(f);
    write_file(dir / (stem + "." + std::string(extension(format))), emit_report(report, format));
  }
}

std::vector<Prompt> build_tasks(const RunConfig& config, const Environment& env) {
  return env.make_taskset(config.task_seed, config.tasks_per_bucket);
}

int cmd_train(const CommonOptions& o, std::ostream& out, std::ostream& log) {
  const RunConfig config = load_effective(o);
  const fs::path dir = o.out;
  prepare_out_dir(dir);
  write_file(dir / "effective_config.json", config_to_json(config).dump(2) + "\n");
  fs::create_directories(dir / "checkpoints");

  Environment env(config.environment);
  const auto tasks = build_tasks(config, env);
  const auto initial = config.initial_policy.build(env.spec().buckets.size());

  std::ofstream steps(dir / "steps.jsonl", std::ios::trunc);
  std::ofstream trajectories;
  if (o.dump_trajectories) trajectories.open(dir / "trajectories.jsonl", std::ios::trunc);
  const auto verbosity_level = verbosity();

  TrainObserver obs;
  obs.on_step = [&](const StepLog& l) {
    steps << to_json(l).dump() << '\n';
    if (verbosity_level == Verbosity::kDebug) log << to_json(l).dump() << '\n';
  };
  obs.on_checkpoint = [&](const PolicySnapshot& p, std::size_t step) {
    char name[64];
    std::snprintf(name, sizeof name, "step_%06zu.json", step);
    checkpoint_save(p, step, dir / "checkpoints" / name);
    if (verbosity_level != Verbosity::kQuiet) log << "[train] checkpoint at step " << step << '\n';
  };
  obs.on_abort = [&](const PolicySnapshot& p, std::size_t step) {
    checkpoint_save(p, step, dir / "checkpoints" / "abort.json");
  };
  if (o.dump_trajectories) {
    obs.on_trajectory = [&](std::size_t step, const Prompt& prompt, const Trajectory& t,
                            const RewardOutcome& r, const BudgetContext& ctx) {
      json j = {{"step", step},
                {"prompt_id", prompt.id},
                {"tokens", env.vocab().decode(t.response.tokens())},
                {"mode", to_string(t.mode)},
                {"reward", r.value},
                {"branch", to_string(r.branch)},
                {"correct", t.correct},
                {"length", total_length(t.response)},
                {"budget", ctx.budget}};
      trajectories << j.dump() << '\n';
    };
  }

  auto result = run_training(config.train, env, tasks, initial, obs);
  steps.close();
  if (!steps) throw Error(ErrorKind::kIo, "failed writing steps.jsonl");
  if (config.train.steps == 0) checkpoint_save(result.policy, 0, dir / "checkpoints" / "step_000000.json");

  const auto report =
      evaluate(result.policy, env, tasks, config.eval_k, config.eval_seed, config.train.budget);
  write_reports(report, config.formats, dir, "report");
  set_status(dir, "complete");
  out << "train: " << config.train.steps << " steps, reward "
      << to_string(config.train.reward_mode) << ", outputs in " << dir.string() << '\n';
  return 0;
}

int cmd_ablation(const CommonOptions& o, std::ostream& out, std::ostream& log) {
  const RunConfig config = load_effective(o);
  const fs::path dir = o.out;
  prepare_out_dir(dir);
  write_file(dir / "effective_config.json", config_to_json(config).dump(2) + "\n");

  Environment env(config.environment);
  const auto tasks = build_tasks(config, env);
  const auto initial = config.initial_policy.build(env.spec().buckets.size());
  std::vector<std::uint64_t> seeds = config.ablation_seeds;
  if (seeds.empty() || o.seed) seeds = {config.train.seed};

  if (verbosity() != Verbosity::kQuiet) {
    log << "[ablation] " << seeds.size() << " seed(s) x {tnt, naive}, " << config.train.steps
        << " steps each\n";
  }
  const auto report = run_ablation(config.train, env, tasks, initial, seeds,
                                   config.ablation_window, config.eval_k, config.eval_seed);

  for (const auto& run : report.runs) {
    const fs::path run_dir =
        dir / std::string(to_string(run.mode)) / ("seed_" + std::to_string(run.seed));
    fs::create_directories(run_dir);
    std::string lines;
    for (const auto& l : run.result.logs) lines += to_json(l).dump() + "\n";
    write_file(run_dir / "steps.jsonl", lines);
    checkpoint_save(run.result.policy, config.train.steps, run_dir / "final_policy.json");
    write_reports(run.eval, config.formats, run_dir, "report");
  }
  write_file(dir / "ablation.json", ablation_to_json(report).dump(2) + "\n");
  write_file(dir / "ablation_curves.csv", ablation_curves_csv(report));
  set_status(dir, "complete");

  const auto summary = ablation_to_json(report).at("summary");
  out << "ablation: non-thinking mean tokens tnt="
      << summary.at("tnt_nonthinking_mean_tokens").get<double>()
      << " naive=" << summary.at("naive_nonthinking_mean_tokens").get<double>()
      << "; verb probability tnt=" << summary.at("tnt_verb_probability").get<double>()
      << " naive=" << summary.at("naive_verb_probability").get<double>() << '\n';
  return 0;
}

int cmd_analyze(const std::string& corpus, const CommonOptions& o, std::ostream& out,
                std::ostream& log) {
  RunConfig config;
  if (!o.config.empty()) {
    config = load_effective(o);
  } else if (!o.formats.empty()) {
    config.formats = o.formats;
    config.validate();
  }
  const fs::path dir = o.out;
  prepare_out_dir(dir);

  Vocab vocab;
  const auto ingested = ingest_corpus(fs::path(corpus), vocab, {config.max_error_rate});
  for (const auto& d : ingested.diagnostics) log << "[analyze] warning: " << d << '\n';
  if (ingested.records.empty()) log << "[analyze] warning: corpus has no records\n";

  const auto report = analyze_corpus(ingested, vocab, config.analysis);
  write_reports(report, config.formats, dir, "report");
  set_status(dir, "complete");
  out << "analyze: " << ingested.records.size() << " records, " << report.rows.size()
      << " dataset(s), outputs in " << dir.string() << '\n';
  return 0;
}

int cmd_report(const std::string& input, const std::vector<std::string>& formats,
               const std::string& out_path, std::ostream& out) {
  const auto report = parse_report_json(read_file(input));
  if (formats.size() != 1 && out_path.empty()) {
    throw Error(ErrorKind::kConfig, "report: printing to stdout needs exactly one --format");
  }
  if (out_path.empty()) {
    out << emit_report(report, report_format_from_string(formats.front()));
    return 0;
  }
  const fs::path target(out_path);
  if (formats.size() == 1 && target.has_extension()) {
    write_file(target, emit_report(report, report_format_from_string(formats.front())));
    return 0;
  }
  fs::create_directories(target);
  write_reports(report, formats, target, "report");
  return 0;
}

json error_record(const Error& e) {
  return {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mode-aware reward shaping and GRPO simulator for hybrid reasoning models", "tnt"};
  app.require_subcommand(1);

  CommonOptions train_opts, ablation_opts, analyze_opts;
  auto add_common = [](CLI::App* sub, CommonOptions& o, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "Run configuration (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--format", o.formats, "Report format: csv, json or svg (repeatable)");
  };

  auto* train = app.add_subcommand("train", "Run GRPO training with the configured reward");
  add_common(train, train_opts, true);
  train->add_option("--seed", train_opts.seed, "Override train.seed");
  train->add_flag("--dump-trajectories", train_opts.dump_trajectories,
                  "Write every sampled trajectory to trajectories.jsonl");

  auto* ablation = app.add_subcommand("ablation", "Paired TNT vs naive reward experiment");
  add_common(ablation, ablation_opts, true);
  ablation->add_option("--seed", ablation_opts.seed, "Run a single seed instead of ablation.seeds");

  std::string corpus;
  auto* analyze = app.add_subcommand("analyze", "Compute metrics on a JSONL response corpus");
  analyze->add_option("corpus", corpus, "Corpus file (JSONL)")->required();
  add_common(analyze, analyze_opts, false);

  std::string report_input, report_out;
  std::vector<std::string> report_formats;
  auto* report = app.add_subcommand("report", "Re-render a saved JSON report");
  report->add_option("input", report_input, "report.json written by analyze/train")->required();
  report->add_option("--format", report_formats, "csv, json or svg (repeatable)")->required();
  report->add_option("--out", report_out, "Output file or directory (default: stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }

  const std::string* out_dir = nullptr;
  try {
    if (train->parsed()) {
      out_dir = &train_opts.out;
      return cmd_train(train_opts, out, err);
    }
    if (ablation->parsed()) {
      out_dir = &ablation_opts.out;
      return cmd_ablation(ablation_opts, out, err);
    }
    if (analyze->parsed()) {
      out_dir = &analyze_opts.out;
      return cmd_analyze(corpus, analyze_opts, out, err);
    }
    return cmd_report(report_input, report_formats, report_out, out);
  } catch (const Error& e) {
    const auto record = error_record(e);
    err << record.dump() << '\n';
    if (out_dir != nullptr && fs::exists(fs::path(*out_dir) / "status.json")) {
      try {
        set_status(*out_dir, "failed", record);
      } catch (const Error&) {
      }
    }
    return e.kind() == ErrorKind::kConfig ? 1 : 2;
  } catch (const std::exception& e) {
    err << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
}

}  // namespace tnt::cli
