#include "sgforge/tokenizer.hpp"

#include <algorithm>
#include <limits>

#include "sgforge/error.hpp"
#include "sgforge/graph.hpp"

namespace sgforge {

std::string_view to_string(TokenizerMode m) noexcept { return m == TokenizerMode::Bpe ? "bpe" : "word"; }

TokenizerMode parse_tokenizer_mode(std::string_view s) {
  if (s == "word") return TokenizerMode::Word;
  if (s == "bpe") return TokenizerMode::Bpe;
  throw Error(ErrorKind::InvalidConfig, "tokenizer_mode must be 'word' or 'bpe', got '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() {
  for (auto r : kReserved) add(std::string(r));
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  if (tokens.size() < 4)
    throw Error(ErrorKind::InvalidConfig, "vocabulary needs the 4 reserved entries");
  for (std::size_t i = 0; i < 4; ++i)
    if (tokens[i] != kReserved[i])
      throw Error(ErrorKind::InvalidConfig, "vocabulary line " + std::to_string(i) + " must be " + std::string(kReserved[i]));
  for (auto& t : tokens) {
    if (index_.count(t)) throw Error(ErrorKind::InvalidConfig, "duplicate vocabulary entry '" + t + "'");
    add(t);
  }
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

TokenId Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    tokens.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return Vocabulary(std::move(tokens));
}

// ---------------------------------------------------------------------------

std::vector<std::string> utf8_chars(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto c = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    if (i + len > word.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) len = 1;
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

BpeMerges::BpeMerges(std::vector<std::pair<std::string, std::string>> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) rank_.emplace(merges_[i], i);
}

std::vector<std::string> BpeMerges::apply(std::string_view word) const {
  std::vector<std::string> pieces = utf8_chars(word);
  while (pieces.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
      auto it = rank_.find({pieces[i], pieces[i + 1]});
      if (it != rank_.end()) best_rank = std::min(best_rank, it->second);
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    const auto& [left, right] = merges_[best_rank];
    std::vector<std::string> merged;
    merged.reserve(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i + 1 < pieces.size() && pieces[i] == left && pieces[i + 1] == right) {
        merged.push_back(left + right);
        ++i;
      } else {
        merged.push_back(pieces[i]);
      }
    }
    pieces = std::move(merged);
  }
  return pieces;
}

std::string BpeMerges::to_text() const {
  std::string out;
  for (const auto& [l, r] : merges_) out += l + " " + r + "\n";
  return out;
}

BpeMerges BpeMerges::from_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> merges;
  std::size_t line_no = 0;
  for (const auto& line : [&] {
         std::vector<std::string_view> lines;
         std::size_t pos = 0;
         while (pos < text.size()) {
           std::size_t nl = text.find('\n', pos);
           if (nl == std::string_view::npos) nl = text.size();
           lines.push_back(text.substr(pos, nl - pos));
           pos = nl + 1;
         }
         return lines;
       }()) {
    ++line_no;
    if (line.empty()) continue;
    auto parts = split_words(line);
    if (parts.size() != 2) throw ParseError(line_no, "merge lines hold exactly two pieces");
    merges.emplace_back(parts[0], parts[1]);
  }
  return BpeMerges(std::move(merges));
}

BpeMerges BpeMerges::learn(const std::map<std::string, std::size_t>& word_counts, std::size_t num_merges) {
  std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
  for (const auto& [w, c] : word_counts) words.emplace_back(utf8_chars(w), c);

  std::vector<std::pair<std::string, std::string>> merges;
  while (merges.size() < num_merges) {
    std::map<std::pair<std::string, std::string>, std::size_t> pair_counts;
    for (const auto& [pieces, count] : words)
      for (std::size_t i = 0; i + 1 < pieces.size(); ++i) pair_counts[{pieces[i], pieces[i + 1]}] += count;
    if (pair_counts.empty()) break;
    // std::map iteration is lexicographic, so strict > keeps the smallest pair on ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
      if (it->second > best->second) best = it;
    const auto pair = best->first;
    merges.push_back(pair);
    for (auto& [pieces, count] : words) {
      std::vector<std::string> merged;
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i + 1 < pieces.size() && pieces[i] == pair.first && pieces[i + 1] == pair.second) {
          merged.push_back(pair.first + pair.second);
          ++i;
        } else {
          merged.push_back(pieces[i]);
        }
      }
      pieces = std::move(merged);
    }
  }
  return BpeMerges(std::move(merges));
}

// ---------------------------------------------------------------------------

Tokenizer Tokenizer::fit(const std::vector<std::string>& descriptions, TokenizerMode mode,
                         std::size_t min_count, std::size_t num_merges) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : descriptions)
    for (auto& w : split_words(canonicalize_text(d))) ++counts[w];

  Vocabulary vocab;
  BpeMerges merges;
  // Most frequent first, then lexicographic, so ids are stable across runs.
  auto add_sorted = [&](const std::map<std::string, std::size_t>& c, std::size_t threshold) {
    std::vector<std::pair<std::string, std::size_t>> items(c.begin(), c.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [tok, n] : items)
      if (n >= threshold) vocab.add(tok);
  };
  if (mode == TokenizerMode::Word) {
    add_sorted(counts, min_count);
  } else {
    merges = BpeMerges::learn(counts, num_merges);
    std::map<std::string, std::size_t> piece_counts;
    for (const auto& [w, c] : counts)
      for (auto& p : merges.apply(w)) piece_counts[p] += c;
    // Single characters are always kept so unseen words decompose without UNK.
    for (const auto& [w, c] : counts)
      for (auto& ch : utf8_chars(w)) piece_counts.emplace(ch, 0);
    add_sorted(piece_counts, 0);
  }
  return Tokenizer(mode, std::move(vocab), std::move(merges));
}

TokenSequence Tokenizer::tokenize(std::string_view text) const {
  TokenSequence seq;
  seq.ids.push_back(Vocabulary::kRoot);
  seq.pieces.emplace_back(Vocabulary::kReserved[0]);
  seq.words = split_words(canonicalize_text(text));
  for (const auto& w : seq.words) {
    if (mode_ == TokenizerMode::Word) {
      seq.ids.push_back(vocab_.id(w));
      seq.pieces.push_back(w);
    } else {
      for (auto& p : merges_.apply(w)) {
        seq.ids.push_back(vocab_.id(p));
        seq.pieces.push_back(std::move(p));
      }
    }
    seq.word_heads.push_back(seq.ids.size() - 1);
  }
  return seq;
}

}  // namespace sgforge
