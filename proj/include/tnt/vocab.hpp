#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace tnt {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";

// Verbs whose presence in a non-thinking response signals hidden reasoning.
std::vector<std::string> default_verb_lexicon();

// Dense token table. Ids start at 0 and are bijective with entries.
class Vocab {
 public:
  // Empty open vocabulary holding only the think markers.
  Vocab();

  // Closed vocabulary used by the simulator.
  static Vocab simulator_default();

  // {"tokens": {"<str>": id, ...}, "special": {"think_open", "think_close",
  //  "answer_tokens": [...], "verbs": [...], "ellipsis": [...]}}
  static Vocab from_json(const nlohmann::json& doc);
  static Vocab load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  std::size_t size() const { return entries_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view text) const;
  TokenId at(std::string_view text) const;  // throws if absent

  // Returns the existing id or appends a new entry.
  TokenId intern(std::string_view text);

  TokenId think_open() const { return think_open_; }
  TokenId think_close() const { return think_close_; }
  std::span<const TokenId> answer_tokens() const { return answers_; }
  std::span<const TokenId> ellipsis_tokens() const { return ellipsis_; }
  const std::vector<std::string>& verbs() const { return verbs_; }

  // Ids whose normalized text matches a lexicon word. Normalization trims
  // surrounding punctuation and lowercases, so "Wait," matches "Wait".
  std::set<TokenId> lexicon_ids(std::span<const std::string> words) const;
  std::set<TokenId> verb_ids() const { return lexicon_ids(verbs_); }

  std::vector<std::string> decode(std::span<const TokenId> tokens) const;

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId think_open_ = 0;
  TokenId think_close_ = 1;
  std::vector<TokenId> answers_;
  std::vector<TokenId> ellipsis_;
  std::vector<std::string> verbs_;
};

std::string normalize_word(std::string_view word);

// Whitespace tokenizer. "<think>" and "</think>" are split out as standalone
// tokens even when glued to neighbouring text.
std::vector<std::string> whitespace_split(std::string_view text);
TokenSeq tokenize(std::string_view text, Vocab& vocab);

}  // namespace tnt
