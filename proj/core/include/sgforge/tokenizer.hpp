#pragma once

// Word and byte-pair-encoding tokenizers feeding the model. Position 0 of
// every TokenSequence is the reserved ROOT token.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sgforge {

enum class TokenizerMode { Word, Bpe };

std::string_view to_string(TokenizerMode m) noexcept;
TokenizerMode parse_tokenizer_mode(std::string_view s);

using TokenId = std::int32_t;

/// Line number = id. Ids 0..3 are reserved for ROOT, UNK, PAD, EOS.
class Vocabulary {
 public:
  static constexpr TokenId kRoot = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kPad = 2;
  static constexpr TokenId kEos = 3;
  static constexpr std::string_view kReserved[] = {"<root>", "<unk>", "<pad>", "<eos>"};

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Adds `token` if absent; returns its id.
  TokenId add(const std::string& token);

  std::string to_text() const;
  static Vocabulary from_text(std::string_view text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Merge table in priority order (earlier = applied first).
class BpeMerges {
 public:
  BpeMerges() = default;
  explicit BpeMerges(std::vector<std::pair<std::string, std::string>> merges);

  /// Splits one word into subword pieces by repeatedly applying the
  /// highest-priority adjacent merge.
  std::vector<std::string> apply(std::string_view word) const;

  const std::vector<std::pair<std::string, std::string>>& merges() const noexcept { return merges_; }
  std::size_t size() const noexcept { return merges_.size(); }

  /// One "left right" pair per line.
  std::string to_text() const;
  static BpeMerges from_text(std::string_view text);

  /// Learns `num_merges` merges from word frequencies (most frequent pair
  /// first, ties broken lexicographically).
  static BpeMerges learn(const std::map<std::string, std::size_t>& word_counts, std::size_t num_merges);

  friend bool operator==(const BpeMerges& a, const BpeMerges& b) { return a.merges_ == b.merges_; }

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::pair<std::string, std::string>, std::size_t> rank_;
};

/// Splits a UTF-8 word into code points (malformed bytes become single units).
std::vector<std::string> utf8_chars(std::string_view word);

struct TokenSequence {
  std::vector<TokenId> ids;               // ids[0] == Vocabulary::kRoot
  std::vector<std::string> pieces;        // surface piece per position; pieces[0] is "<root>"
  std::vector<std::size_t> word_heads;    // per source word, position of its final piece
  std::vector<std::string> words;         // source words after canonicalization

  std::size_t length() const noexcept { return ids.size(); }  // includes ROOT
};

class Tokenizer {
 public:
  Tokenizer() = default;
  Tokenizer(TokenizerMode mode, Vocabulary vocab, BpeMerges merges = {})
      : mode_(mode), vocab_(std::move(vocab)), merges_(std::move(merges)) {}

  /// Builds a vocabulary from training descriptions. Word mode keeps words
  /// seen at least `min_count` times; bpe mode learns `num_merges` merges and
  /// keeps every piece they produce.
  static Tokenizer fit(const std::vector<std::string>& descriptions, TokenizerMode mode,
                       std::size_t min_count = 1, std::size_t num_merges = 200);

  TokenSequence tokenize(std::string_view text) const;

  TokenizerMode mode() const noexcept { return mode_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const BpeMerges& merges() const noexcept { return merges_; }

  friend bool operator==(const Tokenizer& a, const Tokenizer& b) {
    return a.mode_ == b.mode_ && a.vocab_ == b.vocab_ && a.merges_ == b.merges_;
  }

 private:
  TokenizerMode mode_ = TokenizerMode::Word;
  Vocabulary vocab_;
  BpeMerges merges_;
};

}  // namespace sgforge
