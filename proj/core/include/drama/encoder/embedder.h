#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drama/encoder/config.h"
#include "drama/encoder/parameters.h"
#include "drama/encoder/tokenizer.h"

namespace drama::encoder {

using Embedding = std::vector<double>;

/// Anything that maps text to a fixed-width vector: the trained encoder, a
/// lexical teacher, or a test oracle.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::size_t dim() const = 0;
  /// `truncated`, when given, is set if the text had to be cut to fit.
  virtual Embedding embed(std::string_view text, bool* truncated = nullptr) const = 0;

  /// Embeds every text in order; counts truncations when asked.
  std::vector<Embedding> embed_all(std::span<const std::string> texts,
                                   std::size_t* truncated = nullptr) const;
};

/// Tokenize -> encode -> truncate to target_dim -> normalize.
class EncoderEmbedder final : public TextEmbedder {
 public:
  EncoderEmbedder(EncoderConfig cfg, ParameterSet params, std::shared_ptr<const Tokenizer> tokenizer,
                  std::optional<std::size_t> target_dim = std::nullopt);

  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text, bool* truncated = nullptr) const override;

  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  ParameterSet params_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::size_t dim_;
};

}  // namespace drama::encoder
