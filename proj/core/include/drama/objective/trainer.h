#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "drama/encoder/config.h"
#include "drama/encoder/parameters.h"
#include "drama/encoder/tokenizer.h"
#include "drama/objective/loss.h"

namespace drama::objective {

using encoder::ParameterSet;

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. State is owned by one trainer and mutated
/// only by step().
class Adam {
 public:
  explicit Adam(const ParameterSet& like, AdamConfig cfg = {});

  /// p -= lr * m_hat / (sqrt(v_hat) + eps). Throws NumericError, leaving
  /// everything untouched, if any gradient is non-finite.
  void step(ParameterSet& params, const ParameterSet& grads, double lr);

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  /// Stores moments as "adam.m.<name>" / "adam.v.<name>" plus "adam.t".
  void save_to(ParameterSet& extra) const;
  static Adam load_from(const ParameterSet& extra, const ParameterSet& like, AdamConfig cfg = {});

 private:
  AdamConfig cfg_;
  ParameterSet m_;
  ParameterSet v_;
  std::size_t t_ = 0;
};

struct TrainConfig {
  std::size_t steps = 200;
  std::size_t batch_size = 8;
  double lr = 1e-3;
  /// Linear warmup over this many steps, then constant (or linear decay to
  /// zero when `linear_decay`).
  std::size_t warmup_steps = 0;
  bool linear_decay = false;
  std::uint64_t seed = 0;
  LossConfig loss;
};

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, const TrainConfig& defaults = {});

double learning_rate_at(const TrainConfig& cfg, std::size_t step);

struct StepResult {
  double loss = 0.0;
  std::size_t duplicate_candidates = 0;
};

/// One Adam update on mrl_loss for the given triplets. On a non-finite loss
/// or gradient the step is aborted with NumericError and neither the
/// parameters nor the optimizer change.
StepResult train_step(const encoder::EncoderConfig& cfg, ParameterSet& params,
                      const encoder::Tokenizer& tokenizer, std::span<const TrainingTriplet> triplets,
                      const LossConfig& loss, Adam& opt, double lr, Rng& rng);

/// Indices of the triplets used at `step`: consecutive slices of per-epoch
/// seeded permutations, so any step can be recomputed on resume.
std::vector<std::size_t> batch_indices(std::size_t num_triplets, std::size_t batch_size,
                                       std::uint64_t seed, std::size_t step);

struct TrainReport {
  std::vector<double> losses;
  std::size_t duplicate_candidates = 0;
};

using StepCallback = std::function<void(std::size_t step, const StepResult&)>;

/// Runs steps [opt.steps(), cfg.steps). Resuming from a saved optimizer
/// reproduces the uninterrupted trajectory.
TrainReport train_retriever(const encoder::EncoderConfig& cfg, ParameterSet& params,
                            const encoder::Tokenizer& tokenizer,
                            std::span<const TrainingTriplet> triplets, const TrainConfig& tc, Adam& opt,
                            const StepCallback& on_step = {});

}  // namespace drama::objective
