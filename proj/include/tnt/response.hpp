#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tnt/vocab.hpp"

namespace tnt {

enum class Mode { kThinking, kNonThinking };

std::string_view to_string(Mode mode);

// A generated response y, excluding the prompt. Immutable once built.
class Response {
 public:
  Response() = default;
  // tau_index is derived from the first occurrence of think_close.
  // logprobs, when given, must have one entry per token, each <= 0.
  Response(TokenSeq tokens, TokenId think_close,
           std::optional<std::vector<double>> logprobs = std::nullopt);

  const TokenSeq& tokens() const { return tokens_; }
  const std::optional<std::vector<double>>& logprobs() const { return logprobs_; }
  std::optional<std::size_t> tau_index() const { return tau_index_; }
  TokenId think_close() const { return think_close_; }

  bool empty() const { return tokens_.empty(); }
  std::size_t size() const { return tokens_.size(); }

 private:
  TokenSeq tokens_;
  std::optional<std::vector<double>> logprobs_;
  std::optional<std::size_t> tau_index_;
  TokenId think_close_ = 1;
};

// NonThinking iff the first generated token is think_close.
Mode classify_mode(const Response& response);

// h(y): tokens strictly after the first think_close of a thinking response.
std::size_t solution_length(const Response& response);

// |y|, counting a leading think_close.
inline std::size_t total_length(const Response& response) { return response.size(); }

bool contains_thinking_verbs(const Response& response, const std::set<TokenId>& lexicon);

struct Prompt {
  std::string id;
  TokenSeq query_tokens;
  bool ellipsis_suffix = true;
  TokenId golden_answer = 0;
  double difficulty = 0.0;  // in [0, 1]
};

// Query tokens followed, for ellipsis prompts, by think_open and the padding.
TokenSeq serialize_prompt(const Prompt& prompt, const Vocab& vocab);

}  // namespace tnt
