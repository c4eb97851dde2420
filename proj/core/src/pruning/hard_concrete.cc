#include "drama/pruning/hard_concrete.h"

#include <cmath>

#include "drama/numerics/ops.h"
#include "drama/util/error.h"
#include "drama/util/json_config.h"

namespace drama::pruning {

namespace ops = numerics::ops;

void HardConcreteParams::validate() const {
  if (!(gamma < 0.0)) throw ConfigError("hard_concrete.gamma must be < 0");
  if (!(zeta > 1.0)) throw ConfigError("hard_concrete.zeta must be > 1");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("hard_concrete.beta must lie in (0, 1)");
}

Json to_json(const HardConcreteParams& p) {
  return Json{{"gamma", p.gamma}, {"zeta", p.zeta}, {"beta", p.beta}};
}

HardConcreteParams hard_concrete_from_json(const Json& j, const HardConcreteParams& defaults) {
  reject_unknown_keys(j, {"gamma", "zeta", "beta"}, "hard_concrete");
  HardConcreteParams p = defaults;
  read_opt(j, "gamma", p.gamma, "hard_concrete");
  read_opt(j, "zeta", p.zeta, "hard_concrete");
  read_opt(j, "beta", p.beta, "hard_concrete");
  p.validate();
  return p;
}

Var mask_deterministic(Var log_alpha, const HardConcreteParams& p) {
  Var s = ops::sigmoid(log_alpha);
  return ops::clamp(ops::add_scalar(ops::scale(s, p.zeta - p.gamma), p.gamma), 0.0, 1.0);
}

Tensor mask_deterministic(const HardConcreteMask& mask) {
  numerics::Tape tape(false);
  return mask_deterministic(tape.constant(mask.log_alpha), mask.params).value();
}

Tensor draw_uniforms(std::size_t units, Rng& rng) {
  Tensor u({units});
  for (double& x : u.data()) x = uniform_open(rng);
  return u;
}

Var mask_sample(Var log_alpha, const Tensor& uniforms, const HardConcreteParams& p) {
  if (uniforms.size() != log_alpha.value().size()) {
    throw ShapeError("mask_sample: " + std::to_string(uniforms.size()) + " uniforms for " +
                     std::to_string(log_alpha.value().size()) + " units");
  }
  Tensor noise(log_alpha.value().shape());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = std::log(uniforms[i]) - std::log1p(-uniforms[i]);
  Var logits = ops::add(log_alpha, log_alpha.tape->constant(std::move(noise)));
  Var s = ops::sigmoid(ops::scale(logits, 1.0 / p.beta));
  return ops::clamp(ops::add_scalar(ops::scale(s, p.zeta - p.gamma), p.gamma), 0.0, 1.0);
}

Tensor mask_sample(const HardConcreteMask& mask, Rng& rng) {
  numerics::Tape tape(false);
  const Tensor u = draw_uniforms(mask.units(), rng);
  return mask_sample(tape.constant(mask.log_alpha), u, mask.params).value();
}

}  // namespace drama::pruning
