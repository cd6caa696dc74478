#include "tnt/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "tnt/error.hpp"

namespace tnt {

std::vector<std::string> default_verb_lexicon() {
  return {"Wait", "Alternatively", "Double-Check"};
}

Vocab::Vocab() {
  think_open_ = intern(kThinkOpen);
  think_close_ = intern(kThinkClose);
  verbs_ = default_verb_lexicon();
}

Vocab Vocab::simulator_default() {
  Vocab v;
  v.ellipsis_ = {v.intern("\n"), v.intern("..."), v.intern("\n")};
  v.intern("Q");
  v.intern("THINK");
  v.intern("SOL");
  for (const auto& verb : v.verbs_) v.intern(verb);
  for (int i = 0; i < 4; ++i) v.answers_.push_back(v.intern("ANS_" + std::to_string(i)));
  return v;
}

Vocab Vocab::from_json(const nlohmann::json& doc) {
  try {
    const auto& tokens = doc.at("tokens");
    std::vector<std::string> entries(tokens.size());
    std::vector<bool> seen(tokens.size(), false);
    for (const auto& [text, id_json] : tokens.items()) {
      const auto id = id_json.get<std::int64_t>();
      if (id < 0 || id >= static_cast<std::int64_t>(entries.size()) || seen[id]) {
        throw Error(ErrorKind::kParse, "vocab: ids must be dense and unique, bad id for '" +
                                           text + "'");
      }
      seen[id] = true;
      entries[id] = text;
    }
    Vocab v;
    v.entries_.clear();
    v.index_.clear();
    for (const auto& e : entries) v.intern(e);

    const auto& special = doc.at("special");
    v.think_open_ = v.at(special.value("think_open", std::string(kThinkOpen)));
    v.think_close_ = v.at(special.value("think_close", std::string(kThinkClose)));
    if (v.think_open_ == v.think_close_) {
      throw Error(ErrorKind::kParse, "vocab: think_open and think_close must differ");
    }
    for (const auto& a : special.value("answer_tokens", std::vector<std::string>{})) {
      v.answers_.push_back(v.at(a));
    }
    for (const auto& e : special.value("ellipsis", std::vector<std::string>{})) {
      v.ellipsis_.push_back(v.at(e));
    }
    v.verbs_ = special.value("verbs", default_verb_lexicon());
    if (v.verbs_.empty()) throw Error(ErrorKind::kParse, "vocab: verb lexicon is empty");
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("vocab: ") + e.what());
  }
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open vocab file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, "vocab " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Vocab::to_json() const {
  nlohmann::json tokens = nlohmann::json::object();
  for (std::size_t i = 0; i < entries_.size(); ++i) tokens[entries_[i]] = i;
  nlohmann::json special;
  special["think_open"] = token(think_open_);
  special["think_close"] = token(think_close_);
  special["answer_tokens"] = decode(answers_);
  special["ellipsis"] = decode(ellipsis_);
  special["verbs"] = verbs_;
  return {{"tokens", tokens}, {"special", special}};
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entries_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "token id out of range: " + std::to_string(id));
  }
  return entries_[id];
}

std::optional<TokenId> Vocab::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocab::at(std::string_view text) const {
  if (auto id = find(text)) return *id;
  throw Error(ErrorKind::kInvalidArgument, "unknown token '" + std::string(text) + "'");
}

TokenId Vocab::intern(std::string_view text) {
  if (auto id = find(text)) return *id;
  const auto id = static_cast<TokenId>(entries_.size());
  entries_.emplace_back(text);
  index_.emplace(entries_.back(), id);
  return id;
}

std::set<TokenId> Vocab::lexicon_ids(std::span<const std::string> words) const {
  std::set<std::string> wanted;
  for (const auto& w : words) wanted.insert(normalize_word(w));
  std::set<TokenId> ids;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (wanted.contains(normalize_word(entries_[i]))) ids.insert(static_cast<TokenId>(i));
  }
  return ids;
}

std::vector<std::string> Vocab::decode(std::span<const TokenId> tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto t : tokens) out.push_back(token(t));
  return out;
}

std::string normalize_word(std::string_view word) {
  auto keep = [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; };
  std::size_t b = 0, e = word.size();
  while (b < e && !keep(word[b])) ++b;
  while (e > b && !keep(word[e - 1])) --e;
  std::string out(word.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> whitespace_split(std::string_view text) {
  std::vector<std::string> out;
  auto push_piece = [&](std::string_view piece) {
    while (!piece.empty()) {
      const auto open = piece.find(kThinkOpen);
      const auto close = piece.find(kThinkClose);
      const auto pos = std::min(open, close);
      if (pos == std::string_view::npos) {
        out.emplace_back(piece);
        return;
      }
      const auto len = pos == close ? kThinkClose.size() : kThinkOpen.size();
      if (pos > 0) out.emplace_back(piece.substr(0, pos));
      out.emplace_back(piece.substr(pos, len));
      piece.remove_prefix(pos + len);
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) push_piece(text.substr(i, j - i));
    i = j;
  }
  return out;
}

TokenSeq tokenize(std::string_view text, Vocab& vocab) {
  TokenSeq seq;
  for (const auto& piece : whitespace_split(text)) seq.push_back(vocab.intern(piece));
  return seq;
}

}  // namespace tnt
