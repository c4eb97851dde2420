#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "drama/encoder/embedder.h"

namespace drama::eval {

struct LexicalOptions {
  bool log_tf = true;
  bool idf = true;
};

/// Bag-of-words embedder over the exact vocabulary of a fitting corpus (no
/// hashing, so two texts overlap only when they share a normalized piece).
/// Coordinate 0 collects out-of-vocabulary pieces, which keeps every
/// nonempty text away from the zero vector.
class LexicalEmbedder final : public encoder::TextEmbedder {
 public:
  LexicalEmbedder(std::span<const std::string> corpus, LexicalOptions opts = {});

  std::size_t dim() const override { return vocab_.size() + 1; }
  encoder::Embedding embed(std::string_view text, bool* truncated = nullptr) const override;

  const std::vector<std::string>& vocabulary() const { return vocab_; }

 private:
  LexicalOptions opts_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> idf_;
};

/// Number of distinct normalized pieces shared by two texts.
std::size_t token_overlap(std::string_view a, std::string_view b);

}  // namespace drama::eval
