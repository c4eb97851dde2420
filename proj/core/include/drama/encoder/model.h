#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "drama/encoder/config.h"
#include "drama/encoder/parameters.h"
#include "drama/encoder/tokenizer.h"

namespace drama::encoder {

/// Multiplicative structure masks, each recorded on the same tape as the
/// parameters. Absent groups are treated as all-ones.
///   head[l]         : [num_heads]         scales each head's output
///   intermediate[l] : [intermediate_dim]  scales gated activations
///   layer           : [num_layers]        scales both residual branches
///   hidden          : [hidden_dim]        shared across layers; scales the
///                     embedding output and every residual branch, and its
///                     sum replaces hidden_dim in the RMS denominators
struct StructureMasks {
  std::vector<Var> head;
  std::vector<Var> intermediate;
  std::optional<Var> layer;
  std::optional<Var> hidden;
};

/// Per-position final hidden states [T, hidden_dim], post final norm.
Var forward_states(const EncoderConfig& cfg, const BoundParameters& params,
                   const TokenSequence& seq, const StructureMasks* masks = nullptr);

/// Next-token logits [T, vocab] from the tied embedding matrix.
Var lm_logits(const EncoderConfig& cfg, const BoundParameters& params, const TokenSequence& seq,
              const StructureMasks* masks = nullptr);

/// Masked mean or last-unmasked-position pooling; result is [1, d].
/// Throws DataError if every position is padding.
Var pool(Var states, std::span<const std::uint8_t> mask, Pooling mode);
Tensor pool(const Tensor& states, std::span<const std::uint8_t> mask, Pooling mode);

/// Pooled vector [1, hidden_dim] before truncation/normalization.
Var pooled(const EncoderConfig& cfg, const BoundParameters& params, const TokenSequence& seq,
           const StructureMasks* masks = nullptr);

/// Keeps the first `dim` coordinates of each row and L2-normalizes them.
/// Throws DegenerateEmbeddingError (naming the dimension) on a zero prefix.
Var truncate_normalize(Var x, std::size_t dim);

/// forward_states -> pool -> truncate -> L2 normalize. `target_dim` defaults
/// to the full hidden dimension.
Tensor encode(const EncoderConfig& cfg, const ParameterSet& params, const TokenSequence& seq,
              std::optional<std::size_t> target_dim = std::nullopt);

/// encode() over many sequences; output order matches input order.
std::vector<Tensor> encode_batch(const EncoderConfig& cfg, const ParameterSet& params,
                                 std::span<const TokenSequence> seqs,
                                 std::optional<std::size_t> target_dim = std::nullopt);

}  // namespace drama::encoder
