#pragma once

#include <cstddef>
#include <string>

#include "drama/numerics/ops.h"
#include "drama/util/io.h"

namespace drama::encoder {

enum class AttentionMode { kBidirectional, kUnidirectional };
enum class Pooling { kMean, kEos };

/// Architecture of the decoder-style backbone. `head_dim` is stored
/// explicitly because structured pruning removes heads and hidden channels
/// independently, after which hidden_dim / num_heads no longer has to equal
/// the per-head width.
struct EncoderConfig {
  std::size_t num_layers = 4;
  std::size_t hidden_dim = 64;
  std::size_t num_heads = 4;
  std::size_t head_dim = 16;
  std::size_t intermediate_dim = 256;
  std::size_t vocab_size = 512;
  std::size_t max_positions = 256;
  double rope_theta = 10000.0;
  double norm_eps = 1e-6;
  AttentionMode attention_mode = AttentionMode::kBidirectional;
  Pooling pooling = Pooling::kMean;
  numerics::ops::Activation activation = numerics::ops::Activation::kSilu;

  std::size_t attn_dim() const { return num_heads * head_dim; }

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// The desk-scale default: 4 layers, hidden 64, 4 heads, intermediate 256,
/// vocabulary 512, 256 positions.
EncoderConfig desk_config();

Json to_json(const EncoderConfig& c);
/// Accepts a partial object over the defaults. A missing head_dim is derived
/// as hidden_dim / num_heads. Unknown keys are rejected.
EncoderConfig config_from_json(const Json& j, const EncoderConfig& defaults = {});

std::string to_string(AttentionMode m);
std::string to_string(Pooling p);
AttentionMode attention_mode_from_string(const std::string& s);
Pooling pooling_from_string(const std::string& s);

/// Non-embedding and total parameter counts implied by the config.
std::size_t non_embedding_parameter_count(const EncoderConfig& c);
std::size_t parameter_count(const EncoderConfig& c);

}  // namespace drama::encoder
