#include "drama/encoder/config.h"

#include "drama/util/json_config.h"

namespace drama::encoder {

void EncoderConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("encoder config: " + msg);
  };
  need(num_layers >= 1, "num_layers must be >= 1");
  need(hidden_dim >= 1, "hidden_dim must be >= 1");
  need(num_heads >= 1, "num_heads must be >= 1");
  need(head_dim >= 2 && head_dim % 2 == 0, "head_dim must be even and >= 2 (rotary pairs)");
  need(hidden_dim % num_heads == 0, "hidden_dim must be divisible by num_heads");
  need(intermediate_dim >= 1, "intermediate_dim must be >= 1");
  need(vocab_size >= 3, "vocab_size must be >= 3");
  need(max_positions >= 1, "max_positions must be >= 1");
  need(rope_theta > 0.0, "rope_theta must be > 0");
  need(norm_eps >= 0.0, "norm_eps must be >= 0");
}

EncoderConfig desk_config() { return EncoderConfig{}; }

std::string to_string(AttentionMode m) {
  return m == AttentionMode::kBidirectional ? "bidirectional" : "unidirectional";
}

std::string to_string(Pooling p) { return p == Pooling::kMean ? "mean" : "eos"; }

AttentionMode attention_mode_from_string(const std::string& s) {
  if (s == "bidirectional") return AttentionMode::kBidirectional;
  if (s == "unidirectional") return AttentionMode::kUnidirectional;
  throw ConfigError("attention_mode must be bidirectional|unidirectional, got '" + s + "'");
}

Pooling pooling_from_string(const std::string& s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "eos") return Pooling::kEos;
  throw ConfigError("pooling must be mean|eos, got '" + s + "'");
}

namespace {

std::string activation_name(numerics::ops::Activation a) {
  return a == numerics::ops::Activation::kSilu ? "silu" : "gelu_tanh";
}

numerics::ops::Activation activation_from_string(const std::string& s) {
  if (s == "silu") return numerics::ops::Activation::kSilu;
  if (s == "gelu_tanh") return numerics::ops::Activation::kGeluTanh;
  throw ConfigError("activation must be silu|gelu_tanh, got '" + s + "'");
}

}  // namespace

Json to_json(const EncoderConfig& c) {
  return Json{{"num_layers", c.num_layers},
              {"hidden_dim", c.hidden_dim},
              {"num_heads", c.num_heads},
              {"head_dim", c.head_dim},
              {"intermediate_dim", c.intermediate_dim},
              {"vocab_size", c.vocab_size},
              {"max_positions", c.max_positions},
              {"rope_theta", c.rope_theta},
              {"norm_eps", c.norm_eps},
              {"attention_mode", to_string(c.attention_mode)},
              {"pooling", to_string(c.pooling)},
              {"activation", activation_name(c.activation)}};
}

EncoderConfig config_from_json(const Json& j, const EncoderConfig& defaults) {
  constexpr std::string_view ctx = "encoder";
  reject_unknown_keys(j,
                      {"num_layers", "hidden_dim", "num_heads", "head_dim", "intermediate_dim",
                       "vocab_size", "max_positions", "rope_theta", "norm_eps", "attention_mode",
                       "pooling", "activation"},
                      ctx);
  EncoderConfig c = defaults;
  read_opt(j, "num_layers", c.num_layers, ctx);
  read_opt(j, "hidden_dim", c.hidden_dim, ctx);
  read_opt(j, "num_heads", c.num_heads, ctx);
  read_opt(j, "intermediate_dim", c.intermediate_dim, ctx);
  read_opt(j, "vocab_size", c.vocab_size, ctx);
  read_opt(j, "max_positions", c.max_positions, ctx);
  read_opt(j, "rope_theta", c.rope_theta, ctx);
  read_opt(j, "norm_eps", c.norm_eps, ctx);
  if (j.contains("head_dim")) {
    read_opt(j, "head_dim", c.head_dim, ctx);
  } else if (j.contains("hidden_dim") || j.contains("num_heads")) {
    if (c.num_heads == 0) throw ConfigError("encoder.num_heads must be >= 1");
    c.head_dim = c.hidden_dim / c.num_heads;
  }
  std::string s;
  if (j.contains("attention_mode")) {
    read_opt(j, "attention_mode", s, ctx);
    c.attention_mode = attention_mode_from_string(s);
  }
  if (j.contains("pooling")) {
    read_opt(j, "pooling", s, ctx);
    c.pooling = pooling_from_string(s);
  }
  if (j.contains("activation")) {
    read_opt(j, "activation", s, ctx);
    c.activation = activation_from_string(s);
  }
  c.validate();
  return c;
}

std::size_t non_embedding_parameter_count(const EncoderConfig& c) {
  const std::size_t d = c.hidden_dim, a = c.attn_dim(), i = c.intermediate_dim;
  const std::size_t per_layer = 2 * d + 3 * d * a + a * d + 3 * d * i;
  return c.num_layers * per_layer + d;
}

std::size_t parameter_count(const EncoderConfig& c) {
  return c.vocab_size * c.hidden_dim + non_embedding_parameter_count(c);
}

}  // namespace drama::encoder
