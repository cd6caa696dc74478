#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tnt/response.hpp"
#include "tnt/reward.hpp"

namespace tnt {

// A / sqrt(L) with A in percent.
double token_efficiency(double accuracy_percent, double mean_tokens);

struct ModeStatistics {
  std::size_t total = 0;
  std::size_t thinking = 0;
  std::size_t nonthinking = 0;
  double thinking_mean_tokens = 0.0;
  double nonthinking_mean_tokens = 0.0;
  double thinking_accuracy = 0.0;     // fraction in [0, 1]
  double nonthinking_accuracy = 0.0;  // fraction in [0, 1]
  double nonthinking_ratio = 0.0;     // fraction in [0, 1]
};

ModeStatistics mode_statistics(std::span<const Response> responses, const std::vector<bool>& correct);

struct VerbProbability {
  double value = 0.0;  // fraction in [0, 1]
  std::size_t with_verbs = 0;
  std::size_t nonthinking = 0;
  bool empty_denominator = false;
};

// Share of non-thinking responses containing at least one lexicon token.
VerbProbability verb_probability(std::span<const Response> responses,
                                 const std::set<TokenId>& lexicon);

// Non-thinking responses longer than their prompt's budget.
std::vector<bool> hacking_flags(std::span<const Response> responses,
                                std::span<const std::string> prompt_ids,
                                const std::map<std::string, double>& budgets);

// Budgets per prompt id from the thinking-mode responses of each prompt.
std::map<std::string, double> budgets_by_prompt(std::span<const Response> responses,
                                                std::span<const std::string> prompt_ids,
                                                const BudgetParams& params);

// One row per dataset. Percentages are in [0, 100].
struct ReportRow {
  std::string dataset;
  std::size_t records = 0;
  double accuracy = 0.0;
  double accuracy_coverage = 0.0;
  double mean_tokens = 0.0;
  double te = 0.0;
  double nonthinking_ratio = 0.0;
  double thinking_mean_tokens = 0.0;
  double nonthinking_mean_tokens = 0.0;
  double verb_probability = 0.0;
  bool verb_denominator_empty = false;
  double over_budget_rate = 0.0;  // share of non-thinking responses over budget

  bool operator==(const ReportRow&) const = default;
};

struct RunReport {
  int schema_version = 1;
  std::string tokenizer = "whitespace";
  std::vector<std::string> lexicon;
  double omega = 2.0;
  double fallback_budget = 1000.0;
  std::vector<ReportRow> rows;
  std::size_t skipped_empty = 0;
  std::vector<std::string> diagnostics;

  bool operator==(const RunReport&) const = default;
};

// correct[i] may be absent; such records count toward length and mode
// metrics only.
ReportRow build_row(std::string dataset, std::span<const Response> responses,
                    std::span<const std::optional<bool>> correct, const std::vector<bool>& flags,
                    const std::set<TokenId>& lexicon);

enum class ReportFormat { kCsv, kJson, kSvg };

ReportFormat report_format_from_string(std::string_view text);
std::string_view extension(ReportFormat format);

// Column order of the CSV output.
inline constexpr const char* kCsvHeader =
    "dataset,records,accuracy,accuracy_coverage,mean_tokens,te,nonthinking_ratio,"
    "thinking_mean_tokens,nonthinking_mean_tokens,verb_probability,over_budget_rate";

std::string emit_report(const RunReport& report, ReportFormat format);
RunReport parse_report_json(std::string_view text);

// ---- corpus ingestion ----

struct CorpusRecord {
  std::string id;
  std::string dataset;
  std::string prompt_id;  // defaults to id
  std::optional<bool> correct;
  std::optional<std::string> gold;
  Response response;
  std::size_t line = 0;
};

struct IngestOptions {
  double max_error_rate = 0.2;  // fatal when malformed lines exceed this share
};

struct IngestResult {
  std::vector<CorpusRecord> records;  // order of appearance
  std::vector<std::string> diagnostics;
  std::size_t malformed = 0;
  std::size_t empty = 0;  // records whose response has no tokens
  std::size_t lines = 0;  // non-blank lines read
};

// JSONL, one record per line:
//   {"id": str, "dataset": str, "response_text": str | "tokens": [str],
//    "correct": bool?, "gold": str?, "prompt_id": str?}
IngestResult ingest_corpus(std::istream& in, Vocab& vocab, const IngestOptions& options = {});
IngestResult ingest_corpus(const std::filesystem::path& path, Vocab& vocab,
                           const IngestOptions& options = {});

struct AnalyzeOptions {
  std::vector<std::string> lexicon = default_verb_lexicon();
  BudgetParams budget;
};

// Rows are ordered by dataset name.
RunReport analyze_corpus(const IngestResult& corpus, const Vocab& vocab,
                         const AnalyzeOptions& options = {});

}  // namespace tnt
