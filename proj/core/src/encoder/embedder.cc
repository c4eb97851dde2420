#include "drama/encoder/embedder.h"

#include "drama/encoder/model.h"
#include "drama/util/error.h"
#include "drama/util/parallel.h"

namespace drama::encoder {

std::vector<Embedding> TextEmbedder::embed_all(std::span<const std::string> texts,
                                               std::size_t* truncated) const {
  std::vector<Embedding> out(texts.size());
  std::vector<std::uint8_t> cut(texts.size(), 0);
  parallel_for(texts.size(), [&](std::size_t i) {
    bool t = false;
    out[i] = embed(texts[i], &t);
    cut[i] = t ? 1 : 0;
  });
  if (truncated) {
    *truncated = 0;
    for (auto c : cut) *truncated += c;
  }
  return out;
}

EncoderEmbedder::EncoderEmbedder(EncoderConfig cfg, ParameterSet params,
                                 std::shared_ptr<const Tokenizer> tokenizer,
                                 std::optional<std::size_t> target_dim)
    : cfg_(cfg), params_(std::move(params)), tokenizer_(std::move(tokenizer)) {
  cfg_.validate();
  check_parameters(cfg_, params_);
  if (tokenizer_->vocab_size() != cfg_.vocab_size) {
    throw ConfigError("tokenizer vocabulary (" + std::to_string(tokenizer_->vocab_size()) +
                      ") does not match encoder vocab_size (" + std::to_string(cfg_.vocab_size) + ")");
  }
  dim_ = target_dim.value_or(cfg_.hidden_dim);
  if (dim_ < 1 || dim_ > cfg_.hidden_dim) {
    throw ConfigError("embedding dimension " + std::to_string(dim_) + " outside [1, " +
                      std::to_string(cfg_.hidden_dim) + "]");
  }
}

Embedding EncoderEmbedder::embed(std::string_view text, bool* truncated) const {
  const TokenSequence seq = tokenizer_->encode(text, cfg_.max_positions, truncated);
  const Tensor e = encode(cfg_, params_, seq, dim_);
  return Embedding(e.data().begin(), e.data().end());
}

}  // namespace drama::encoder
