#include <fstream>
#include <map>

#include <json.hpp>

#include "tnt/analysis.hpp"
#include "tnt/error.hpp"

namespace tnt {
namespace {

std::string bool_or_string(const nlohmann::json& j) {
  return j.is_string() ? j.get<std::string>() : j.dump();
}

}  // namespace

IngestResult ingest_corpus(std::istream& in, Vocab& vocab, const IngestOptions& options) {
  IngestResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++out.lines;
    auto fail = [&](const std::string& why) {
      ++out.malformed;
      out.diagnostics.push_back("line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("invalid JSON (") + e.what() + ")");
      continue;
    }
    if (!j.is_object()) {
      fail("record is not a JSON object");
      continue;
    }
    CorpusRecord rec;
    rec.line = line_no;
    try {
      rec.id = j.contains("id") ? bool_or_string(j.at("id")) : std::to_string(line_no);
      rec.dataset = j.value("dataset", std::string("default"));
      rec.prompt_id = j.contains("prompt_id") ? bool_or_string(j.at("prompt_id")) : rec.id;
      if (j.contains("correct") && !j.at("correct").is_null()) {
        rec.correct = j.at("correct").get<bool>();
      }
      if (j.contains("gold") && !j.at("gold").is_null()) rec.gold = bool_or_string(j.at("gold"));
      TokenSeq tokens;
      if (j.contains("tokens")) {
        for (const auto& t : j.at("tokens")) tokens.push_back(vocab.intern(t.get<std::string>()));
      } else if (j.contains("response_text")) {
        tokens = tokenize(j.at("response_text").get<std::string>(), vocab);
      } else {
        fail("record has neither response_text nor tokens");
        continue;
      }
      rec.response = Response(std::move(tokens), vocab.think_close());
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("bad field (") + e.what() + ")");
      continue;
    }
    if (rec.response.empty()) {
      ++out.empty;
      out.diagnostics.push_back("line " + std::to_string(line_no) + ": record '" + rec.id +
                                "' has an empty response and cannot be classified");
    }
    out.records.push_back(std::move(rec));
  }
  if (out.lines > 0) {
    const double rate = static_cast<double>(out.malformed) / static_cast<double>(out.lines);
    if (rate > options.max_error_rate) {
      throw Error(ErrorKind::kThresholdExceeded,
                  std::to_string(out.malformed) + " of " + std::to_string(out.lines) +
                      " corpus lines are malformed, above the allowed rate " +
                      std::to_string(options.max_error_rate));
    }
  }
  return out;
}

IngestResult ingest_corpus(const std::filesystem::path& path, Vocab& vocab,
                           const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + path.string());
  return ingest_corpus(in, vocab, options);
}

RunReport analyze_corpus(const IngestResult& corpus, const Vocab& vocab,
                         const AnalyzeOptions& options) {
  options.budget.validate();
  if (options.lexicon.empty()) throw Error(ErrorKind::kConfig, "analyze: verb lexicon is empty");
  RunReport report;
  report.lexicon = options.lexicon;
  report.omega = options.budget.omega;
  report.fallback_budget = options.budget.l_empty;
  report.skipped_empty = corpus.empty;
  report.diagnostics = corpus.diagnostics;
  const auto lexicon = vocab.lexicon_ids(options.lexicon);

  std::vector<Response> responses;
  std::vector<std::string> prompt_ids;
  std::vector<const CorpusRecord*> kept;
  for (const auto& rec : corpus.records) {
    if (rec.response.empty()) continue;
    responses.push_back(rec.response);
    prompt_ids.push_back(rec.prompt_id);
    kept.push_back(&rec);
  }
  const auto budgets = budgets_by_prompt(responses, prompt_ids, options.budget);
  const auto flags = hacking_flags(responses, prompt_ids, budgets);

  struct Slice {
    std::vector<Response> responses;
    std::vector<std::optional<bool>> correct;
    std::vector<bool> flags;
  };
  std::map<std::string, Slice> by_dataset;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    auto& s = by_dataset[kept[i]->dataset];
    s.responses.push_back(responses[i]);
    s.correct.push_back(kept[i]->correct);
    s.flags.push_back(flags[i]);
  }
  for (const auto& [name, s] : by_dataset) {
    report.rows.push_back(build_row(name, s.responses, s.correct, s.flags, lexicon));
  }
  return report;
}

}  // namespace tnt
