#include "tnt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tnt/error.hpp"

namespace tnt {

double token_efficiency(double accuracy_percent, double mean_tokens) {
  if (!(mean_tokens > 0.0)) {
    throw Error(ErrorKind::kNonPositiveTokens, "token_efficiency: mean token usage must be > 0");
  }
  if (accuracy_percent < 0.0 || accuracy_percent > 100.0) {
    throw Error(ErrorKind::kInvalidArgument, "token_efficiency: accuracy outside [0, 100]");
  }
  return accuracy_percent / std::sqrt(mean_tokens);
}

ModeStatistics mode_statistics(std::span<const Response> responses, const std::vector<bool>& correct) {
  if (responses.size() != correct.size()) {
    throw Error(ErrorKind::kLengthMismatch, "mode_statistics: responses and correctness differ");
  }
  ModeStatistics s;
  std::size_t t_tokens = 0, n_tokens = 0, t_correct = 0, n_correct = 0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const std::size_t len = total_length(responses[i]);
    if (classify_mode(responses[i]) == Mode::kThinking) {
      ++s.thinking;
      t_tokens += len;
      t_correct += correct[i] ? 1 : 0;
    } else {
      ++s.nonthinking;
      n_tokens += len;
      n_correct += correct[i] ? 1 : 0;
    }
  }
  s.total = responses.size();
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  s.thinking_mean_tokens = ratio(t_tokens, s.thinking);
  s.nonthinking_mean_tokens = ratio(n_tokens, s.nonthinking);
  s.thinking_accuracy = ratio(t_correct, s.thinking);
  s.nonthinking_accuracy = ratio(n_correct, s.nonthinking);
  s.nonthinking_ratio = ratio(s.nonthinking, s.total);
  return s;
}

VerbProbability verb_probability(std::span<const Response> responses,
                                 const std::set<TokenId>& lexicon) {
  if (lexicon.empty()) throw Error(ErrorKind::kInvalidArgument, "verb_probability: empty lexicon");
  VerbProbability out;
  for (const auto& r : responses) {
    if (classify_mode(r) != Mode::kNonThinking) continue;
    ++out.nonthinking;
    if (contains_thinking_verbs(r, lexicon)) ++out.with_verbs;
  }
  if (out.nonthinking == 0) {
    out.empty_denominator = true;
    return out;
  }
  out.value = static_cast<double>(out.with_verbs) / static_cast<double>(out.nonthinking);
  return out;
}

std::vector<bool> hacking_flags(std::span<const Response> responses,
                                std::span<const std::string> prompt_ids,
                                const std::map<std::string, double>& budgets) {
  if (responses.size() != prompt_ids.size()) {
    throw Error(ErrorKind::kLengthMismatch, "hacking_flags: responses and prompt ids differ");
  }
  std::vector<bool> flags(responses.size(), false);
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (classify_mode(responses[i]) != Mode::kNonThinking) continue;
    auto it = budgets.find(prompt_ids[i]);
    if (it == budgets.end()) {
      throw Error(ErrorKind::kMissingBudget, "hacking_flags: no budget for prompt '" +
                                                 prompt_ids[i] + "'");
    }
    flags[i] = static_cast<double>(total_length(responses[i])) > it->second;
  }
  return flags;
}

std::map<std::string, double> budgets_by_prompt(std::span<const Response> responses,
                                                std::span<const std::string> prompt_ids,
                                                const BudgetParams& params) {
  if (responses.size() != prompt_ids.size()) {
    throw Error(ErrorKind::kLengthMismatch, "budgets_by_prompt: responses and prompt ids differ");
  }
  std::map<std::string, std::vector<std::size_t>> lengths;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    auto& bucket = lengths[prompt_ids[i]];
    const auto& r = responses[i];
    if (classify_mode(r) == Mode::kThinking && r.tau_index()) bucket.push_back(solution_length(r));
  }
  std::map<std::string, double> out;
  for (const auto& [id, ls] : lengths) out[id] = compute_budget(ls, params, id).budget;
  return out;
}

ReportRow build_row(std::string dataset, std::span<const Response> responses,
                    std::span<const std::optional<bool>> correct, const std::vector<bool>& flags,
                    const std::set<TokenId>& lexicon) {
  if (responses.size() != correct.size() || responses.size() != flags.size()) {
    throw Error(ErrorKind::kLengthMismatch, "build_row: input lengths differ");
  }
  ReportRow row;
  row.dataset = std::move(dataset);
  row.records = responses.size();
  std::size_t covered = 0, right = 0, tokens = 0, t = 0, t_tokens = 0, nt = 0, nt_tokens = 0,
              flagged = 0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const std::size_t len = total_length(responses[i]);
    tokens += len;
    if (correct[i]) {
      ++covered;
      if (*correct[i]) ++right;
    }
    if (classify_mode(responses[i]) == Mode::kThinking) {
      ++t;
      t_tokens += len;
    } else {
      ++nt;
      nt_tokens += len;
      if (flags[i]) ++flagged;
    }
  }
  auto pct = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : 100.0 * static_cast<double>(a) / static_cast<double>(b);
  };
  auto mean = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  row.accuracy = pct(right, covered);
  row.accuracy_coverage = pct(covered, row.records);
  row.mean_tokens = mean(tokens, row.records);
  row.te = row.mean_tokens > 0.0 ? token_efficiency(row.accuracy, row.mean_tokens) : 0.0;
  row.nonthinking_ratio = pct(nt, row.records);
  row.thinking_mean_tokens = mean(t_tokens, t);
  row.nonthinking_mean_tokens = mean(nt_tokens, nt);
  const auto verbs = verb_probability(responses, lexicon);
  row.verb_probability = pct(verbs.with_verbs, verbs.nonthinking);
  row.verb_denominator_empty = verbs.empty_denominator;
  row.over_budget_rate = pct(flagged, nt);
  return row;
}

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  if (text == "svg") return ReportFormat::kSvg;
  throw Error(ErrorKind::kUnsupportedFormat, "unsupported report format '" + std::string(text) +
                                                 "' (expected csv, json or svg)");
}

std::string_view extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJson: return "json";
    case ReportFormat::kSvg: return "svg";
  }
  return "";
}

}  // namespace tnt
