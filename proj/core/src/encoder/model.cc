#include "drama/encoder/model.h"

#include <cmath>
#include <limits>
#include <string>

#include "drama/numerics/ops.h"
#include "drama/util/error.h"
#include "drama/util/parallel.h"

namespace drama::encoder {

namespace ops = numerics::ops;
using numerics::Tape;

namespace {

// mask[q * T + k] != 0 where query q may not attend to key k.
std::vector<std::uint8_t> attention_mask(const TokenSequence& seq, AttentionMode mode) {
  const std::size_t T = seq.size();
  std::vector<std::uint8_t> m(T * T, 0);
  for (std::size_t q = 0; q < T; ++q) {
    for (std::size_t k = 0; k < T; ++k) {
      const bool blocked = !seq.mask[k] || (mode == AttentionMode::kUnidirectional && k > q);
      m[q * T + k] = blocked ? 1 : 0;
    }
  }
  return m;
}

Var norm(Var x, Var weight, std::optional<Var> hidden_count, double eps) {
  Var n = hidden_count ? ops::rms_normalize_counted(x, *hidden_count, eps) : ops::rms_normalize(x, eps);
  return ops::mul_row(n, weight);
}

Var scale_branch(Var branch, const StructureMasks* masks, std::size_t layer) {
  if (!masks) return branch;
  if (masks->hidden) branch = ops::mul_row(branch, *masks->hidden);
  if (masks->layer) branch = ops::mul_scalar(branch, ops::slice_cols(*masks->layer, layer, 1));
  return branch;
}

}  // namespace

Var forward_states(const EncoderConfig& cfg, const BoundParameters& p, const TokenSequence& seq,
                   const StructureMasks* masks) {
  seq.validate(cfg);
  if (masks) {
    if (!masks->head.empty() && masks->head.size() != cfg.num_layers)
      throw ConfigError("head masks: one per layer required");
    if (!masks->intermediate.empty() && masks->intermediate.size() != cfg.num_layers)
      throw ConfigError("intermediate masks: one per layer required");
  }
  const std::size_t H = cfg.num_heads, dh = cfg.head_dim;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto attn_mask = attention_mask(seq, cfg.attention_mode);

  std::optional<Var> hidden_count;
  if (masks && masks->hidden) hidden_count = ops::sum(*masks->hidden);

  Var h = ops::embedding(p["embed"], seq.ids);
  if (masks && masks->hidden) h = ops::mul_row(h, *masks->hidden);

  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    Var a = norm(h, p[layer_key(l, "attn_norm")], hidden_count, cfg.norm_eps);
    Var q = ops::rope(ops::matmul(a, p[layer_key(l, "wq")]), dh, cfg.rope_theta);
    Var k = ops::rope(ops::matmul(a, p[layer_key(l, "wk")]), dh, cfg.rope_theta);
    Var v = ops::matmul(a, p[layer_key(l, "wv")]);
    std::vector<Var> heads;
    heads.reserve(H);
    for (std::size_t hh = 0; hh < H; ++hh) {
      Var qh = ops::slice_cols(q, hh * dh, dh);
      Var kh = ops::slice_cols(k, hh * dh, dh);
      Var vh = ops::slice_cols(v, hh * dh, dh);
      Var scores = ops::scale(ops::matmul_nt(qh, kh), inv_sqrt_dh);
      scores = ops::masked_fill(scores, attn_mask, -std::numeric_limits<double>::infinity());
      Var out = ops::matmul(ops::row_softmax(scores), vh);
      if (masks && !masks->head.empty()) out = ops::mul_scalar(out, ops::slice_cols(masks->head[l], hh, 1));
      heads.push_back(out);
    }
    Var attn = ops::matmul(H == 1 ? heads[0] : ops::concat_cols(heads), p[layer_key(l, "wo")]);
    h = ops::add(h, scale_branch(attn, masks, l));

    Var f = norm(h, p[layer_key(l, "ffn_norm")], hidden_count, cfg.norm_eps);
    Var act = ops::gated_linear(ops::matmul(f, p[layer_key(l, "w_gate")]),
                                ops::matmul(f, p[layer_key(l, "w_up")]), cfg.activation);
    if (masks && !masks->intermediate.empty()) act = ops::mul_row(act, masks->intermediate[l]);
    Var ffn = ops::matmul(act, p[layer_key(l, "w_down")]);
    h = ops::add(h, scale_branch(ffn, masks, l));
  }
  return norm(h, p["final_norm"], hidden_count, cfg.norm_eps);
}

Var lm_logits(const EncoderConfig& cfg, const BoundParameters& params, const TokenSequence& seq,
              const StructureMasks* masks) {
  return ops::matmul_nt(forward_states(cfg, params, seq, masks), params["embed"]);
}

namespace {

Tensor pool_weights(std::size_t T, std::span<const std::uint8_t> mask, Pooling mode) {
  if (mask.size() != T) {
    throw ShapeError("pool: mask of " + std::to_string(mask.size()) + " entries for " +
                     std::to_string(T) + " positions");
  }
  std::size_t active = 0, last = 0;
  for (std::size_t i = 0; i < T; ++i) {
    if (mask[i]) {
      ++active;
      last = i;
    }
  }
  if (active == 0) throw DataError("pool: all positions are masked");
  Tensor w({1, T}, 0.0);
  if (mode == Pooling::kMean) {
    for (std::size_t i = 0; i < T; ++i)
      if (mask[i]) w[i] = 1.0 / static_cast<double>(active);
  } else {
    w[last] = 1.0;
  }
  return w;
}

}  // namespace

Var pool(Var states, std::span<const std::uint8_t> mask, Pooling mode) {
  const std::size_t T = states.value().rows();
  Tensor w = pool_weights(T, mask, mode);
  if (mode == Pooling::kEos) {
    std::size_t last = 0;
    for (std::size_t i = 0; i < T; ++i)
      if (mask[i]) last = i;
    return ops::slice_rows(states, last, 1);
  }
  return ops::matmul(states.tape->constant(std::move(w)), states);
}

Tensor pool(const Tensor& states, std::span<const std::uint8_t> mask, Pooling mode) {
  Tape tape(false);
  return pool(tape.constant(states), mask, mode).value();
}

Var pooled(const EncoderConfig& cfg, const BoundParameters& params, const TokenSequence& seq,
           const StructureMasks* masks) {
  return pool(forward_states(cfg, params, seq, masks), seq.mask, cfg.pooling);
}

Var truncate_normalize(Var x, std::size_t dim) {
  const std::size_t full = x.value().cols();
  if (dim < 1 || dim > full) {
    throw ConfigError("target dimension " + std::to_string(dim) + " outside [1, " +
                      std::to_string(full) + "]");
  }
  Var t = dim == full ? x : ops::slice_cols(x, 0, dim);
  try {
    return ops::l2_normalize_rows(t);
  } catch (const DegenerateEmbeddingError&) {
    throw DegenerateEmbeddingError("degenerate embedding: zero vector after truncation to dim " +
                                   std::to_string(dim));
  }
}

Tensor encode(const EncoderConfig& cfg, const ParameterSet& params, const TokenSequence& seq,
              std::optional<std::size_t> target_dim) {
  Tape tape(false);
  BoundParameters bound(tape, params, false);
  Var v = pooled(cfg, bound, seq);
  Tensor out = truncate_normalize(v, target_dim.value_or(cfg.hidden_dim)).value();
  out.set_requires_grad(false);
  return out;
}

std::vector<Tensor> encode_batch(const EncoderConfig& cfg, const ParameterSet& params,
                                 std::span<const TokenSequence> seqs,
                                 std::optional<std::size_t> target_dim) {
  std::vector<Tensor> out(seqs.size());
  parallel_for(seqs.size(), [&](std::size_t i) { out[i] = encode(cfg, params, seqs[i], target_dim); });
  return out;
}

}  // namespace drama::encoder
