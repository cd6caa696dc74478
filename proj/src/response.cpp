#include "tnt/response.hpp"

#include <algorithm>
#include <cmath>

#include "tnt/error.hpp"

namespace tnt {

std::string_view to_string(Mode mode) {
  return mode == Mode::kThinking ? "thinking" : "non_thinking";
}

Response::Response(TokenSeq tokens, TokenId think_close,
                   std::optional<std::vector<double>> logprobs)
    : tokens_(std::move(tokens)), logprobs_(std::move(logprobs)), think_close_(think_close) {
  if (logprobs_) {
    if (logprobs_->size() != tokens_.size()) {
      throw Error(ErrorKind::kLengthMismatch,
                  "response: logprobs has " + std::to_string(logprobs_->size()) +
                      " entries for " + std::to_string(tokens_.size()) + " tokens");
    }
    for (double lp : *logprobs_) {
      if (!(lp <= 0.0)) throw Error(ErrorKind::kInvalidArgument, "response: logprob > 0 or NaN");
    }
  }
  auto it = std::find(tokens_.begin(), tokens_.end(), think_close_);
  if (it != tokens_.end()) tau_index_ = static_cast<std::size_t>(it - tokens_.begin());
}

Mode classify_mode(const Response& response) {
  if (response.empty()) throw Error(ErrorKind::kEmptyResponse, "cannot classify an empty response");
  return response.tokens().front() == response.think_close() ? Mode::kNonThinking
                                                             : Mode::kThinking;
}

std::size_t solution_length(const Response& response) {
  if (classify_mode(response) != Mode::kThinking) {
    throw Error(ErrorKind::kWrongMode, "solution_length requires a thinking-mode response");
  }
  const auto tau = response.tau_index();
  if (!tau) throw Error(ErrorKind::kNoThinkClose, "thinking response has no think_close");
  return response.size() - *tau - 1;
}

bool contains_thinking_verbs(const Response& response, const std::set<TokenId>& lexicon) {
  return std::any_of(response.tokens().begin(), response.tokens().end(),
                     [&](TokenId t) { return lexicon.contains(t); });
}

TokenSeq serialize_prompt(const Prompt& prompt, const Vocab& vocab) {
  TokenSeq out = prompt.query_tokens;
  if (prompt.ellipsis_suffix) {
    out.push_back(vocab.think_open());
    out.insert(out.end(), vocab.ellipsis_tokens().begin(), vocab.ellipsis_tokens().end());
  }
  return out;
}

}  // namespace tnt
