#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnt/analysis.hpp"
#include "tnt/environment.hpp"
#include "tnt/trainer.hpp"

namespace tnt {

struct InitialPolicySpec {
  double p_nonthinking = 0.2;
  double p_think_continue = 0.85;
  double p_hack = 0.1;
  double p_solution_continue = 0.6;
  std::optional<std::string> checkpoint;  // overrides the probabilities

  PolicySnapshot build(std::size_t buckets) const;
};

struct RunConfig {
  TrainConfig train;
  TaskSpec environment;
  std::vector<std::size_t> tasks_per_bucket{32, 32, 32};
  std::uint64_t task_seed = 1;
  InitialPolicySpec initial_policy;
  std::size_t eval_k = 8;
  std::uint64_t eval_seed = 7;
  std::vector<std::uint64_t> ablation_seeds;  // empty: just train.seed
  std::size_t ablation_window = 200;          // final steps summarized
  AnalyzeOptions analysis;
  double max_error_rate = 0.2;
  std::vector<std::string> formats{"csv", "json"};

  void validate() const;
};

// Every key is optional except train.steps; unknown keys are rejected so
// that typos fail fast. Diagnostics name the offending field.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
// Fully materialized config; config_from_json(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace tnt
