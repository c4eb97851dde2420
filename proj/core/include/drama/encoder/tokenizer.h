#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace drama::encoder {

struct EncoderConfig;

/// Token ids plus a pad mask (1 = real token, 0 = padding).
struct TokenSequence {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> mask;

  static TokenSequence unpadded(std::vector<std::int32_t> ids);
  std::size_t size() const { return ids.size(); }
  std::size_t active() const;
  /// Throws ConfigError (or DataError for an empty / all-padding sequence).
  void validate(const EncoderConfig& cfg) const;
};

/// Splits text on ASCII whitespace. Chunking and sentence cropping operate
/// on these pieces, so joining them with single spaces reproduces the
/// tokenized text exactly.
std::vector<std::string> split_pieces(std::string_view text);
std::string join_pieces(std::span<const std::string> pieces, std::size_t begin, std::size_t end);

/// Lowercases ASCII and strips surrounding punctuation; used for vocabulary
/// lookup and lexical overlap.
std::string normalize_piece(std::string_view piece);

class Tokenizer {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kEos = 1;

  virtual ~Tokenizer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual std::int32_t id_of(std::string_view piece) const = 0;

  /// Tokenizes and appends EOS. Inputs longer than max_positions keep their
  /// first max_positions - 1 pieces; `truncated` reports whether that
  /// happened.
  TokenSequence encode(std::string_view text, std::size_t max_positions,
                       bool* truncated = nullptr) const;
  std::size_t count(std::string_view text) const { return split_pieces(text).size(); }
};

/// Whitespace tokenizer over a fixed vocabulary file. Ids: 0 pad, 1 eos,
/// then one id per vocabulary word, then hash buckets (FNV-1a of the
/// normalized piece) for everything out of vocabulary.
class WordTokenizer final : public Tokenizer {
 public:
  explicit WordTokenizer(std::size_t vocab_size, std::vector<std::string> words = {});

  static WordTokenizer from_vocab_file(const std::filesystem::path& path, std::size_t vocab_size);
  /// Most frequent normalized pieces (ties by lexicographic order), at most
  /// `max_words` of them.
  static std::vector<std::string> build_vocab(std::span<const std::string> texts, std::size_t max_words);
  void save_vocab(const std::filesystem::path& path) const;

  std::size_t vocab_size() const override { return vocab_size_; }
  std::int32_t id_of(std::string_view piece) const override;
  const std::vector<std::string>& words() const { return words_; }
  std::size_t num_buckets() const { return vocab_size_ - 2 - words_.size(); }

 private:
  std::size_t vocab_size_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> index_;
};

}  // namespace drama::encoder
