#pragma once

#include "drama/numerics/tape.h"
#include "drama/util/io.h"
#include "drama/util/rng.h"

namespace drama::pruning {

using numerics::Tensor;
using numerics::Var;

/// Stretch interval (gamma, zeta) and temperature beta of the hard concrete
/// distribution.
struct HardConcreteParams {
  double gamma = -0.1;
  double zeta = 1.1;
  double beta = 2.0 / 3.0;

  void validate() const;
};

Json to_json(const HardConcreteParams& p);
HardConcreteParams hard_concrete_from_json(const Json& j, const HardConcreteParams& defaults = {});

/// One learnable gate per maskable unit.
struct HardConcreteMask {
  Tensor log_alpha;  // [units]
  HardConcreteParams params;

  std::size_t units() const { return log_alpha.size(); }
};

/// z = clamp(sigmoid(log_alpha) * (zeta - gamma) + gamma, 0, 1).
Tensor mask_deterministic(const HardConcreteMask& mask);
Var mask_deterministic(Var log_alpha, const HardConcreteParams& p);

/// u ~ Uniform(0, 1) per unit, drawn from `rng`.
Tensor draw_uniforms(std::size_t units, Rng& rng);

/// s = sigmoid((log u - log(1 - u) + log_alpha) / beta),
/// z = clamp(s * (zeta - gamma) + gamma, 0, 1); differentiable wrt
/// log_alpha through the unclamped region. Passing the noise explicitly
/// lets callers reuse it (common random numbers).
Var mask_sample(Var log_alpha, const Tensor& uniforms, const HardConcreteParams& p);
Tensor mask_sample(const HardConcreteMask& mask, Rng& rng);

}  // namespace drama::pruning
