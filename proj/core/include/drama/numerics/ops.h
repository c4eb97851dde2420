#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drama/numerics/tape.h"

// Differentiable primitives. Matrix ops treat a rank-1 tensor as one row.
// Shape mismatches raise ShapeError naming both shapes.
namespace drama::numerics::ops {

Var matmul(Var a, Var b);     // [m,k] x [k,n]
Var matmul_nt(Var a, Var b);  // [m,k] x [n,k]^T
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
/// a[m,n] * r[n], broadcast over rows.
Var mul_row(Var a, Var r);
/// a * s where s is a one-element tensor.
Var mul_scalar(Var a, Var s);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);

Var sum(Var a);
Var mean(Var a);
Var sigmoid(Var a);
Var log(Var a);
Var exp(Var a);
/// Clamp with zero gradient outside (lo, hi).
Var clamp(Var a, double lo, double hi);

Var row_softmax(Var a);
/// Positions with mask[i] != 0 are replaced by `fill`; their gradient is 0.
Var masked_fill(Var a, std::vector<std::uint8_t> mask, double fill);

/// x / sqrt(mean(x^2) + eps), row-wise.
Var rms_normalize(Var x, double eps);
/// x / sqrt(sum(x^2) / count + eps), row-wise; `count` is a one-element
/// tensor (the number of active channels under a hidden-dimension mask).
Var rms_normalize_counted(Var x, Var count, double eps);
/// Row-wise x / ||x||_2. A zero row raises DegenerateEmbeddingError.
Var l2_normalize_rows(Var x);

enum class Activation { kSilu, kGeluTanh };
/// act(gate) * up, elementwise.
Var gated_linear(Var gate, Var up, Activation act = Activation::kSilu);

/// Row gather from table[V,d]; ids must lie in [0, V).
Var embedding(Var table, std::vector<std::int32_t> ids);

Var slice_cols(Var a, std::size_t start, std::size_t len);
Var slice_rows(Var a, std::size_t start, std::size_t len);
Var reshape(Var a, Shape shape);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);

/// Rotary position embedding applied to each head_dim-wide column block
/// of x[T, H*head_dim] (rotate-half pairing), positions 0..T-1.
Var rope(Var x, std::size_t head_dim, double theta);

/// Mean of -log softmax(logits[r])[targets[r]] over rows with targets[r] >= 0.
Var cross_entropy(Var logits, std::vector<std::int32_t> targets);

}  // namespace drama::numerics::ops

namespace drama::numerics {



inline Var operator+(Var a, Var b) { return ops::add(a, b); }
inline Var operator-(Var a, Var b) { return ops::sub(a, b); }
inline Var operator*(Var a, Var b) { return ops::mul(a, b); }

}  // namespace drama::numerics
