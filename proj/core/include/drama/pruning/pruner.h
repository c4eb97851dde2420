#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drama/encoder/config.h"
#include "drama/encoder/model.h"
#include "drama/encoder/parameters.h"
#include "drama/objective/trainer.h"
#include "drama/pruning/hard_concrete.h"

namespace drama::pruning {

using encoder::EncoderConfig;
using encoder::ParameterSet;
using encoder::TokenSequence;

/// Target architecture of the pruned model.
struct PruneTarget {
  std::size_t heads_per_layer = 2;
  std::size_t hidden_dim = 32;
  std::size_t num_layers = 3;
  std::size_t intermediate_dim = 128;

  /// Every target must lie in [1, source quantity].
  void validate(const EncoderConfig& source) const;
  friend bool operator==(const PruneTarget&, const PruneTarget&) = default;
};

Json to_json(const PruneTarget& t);
PruneTarget prune_target_from_json(const Json& j, const PruneTarget& defaults = {});

/// Hard concrete gates for every prunable structure of an encoder.
struct MaskSet {
  std::vector<HardConcreteMask> head;          // per layer, num_heads units
  std::vector<HardConcreteMask> intermediate;  // per layer, intermediate_dim units
  HardConcreteMask layer;                      // num_layers units
  HardConcreteMask hidden;                     // hidden_dim units, shared

  static MaskSet init(const EncoderConfig& cfg, double init_log_alpha, const HardConcreteParams& p);
  /// Flattened log_alpha values in a fixed group order (head..., int...,
  /// layer, hidden), and the inverse.
  ParameterSet as_parameters() const;
  void assign(const ParameterSet& p);
};

/// Lagrange multiplier pair for one constraint.
struct Multiplier {
  double lambda = 0.0;
  double phi = 0.0;
};

struct LagrangeState {
  std::vector<Multiplier> head;          // per layer
  std::vector<Multiplier> intermediate;  // per layer
  Multiplier layer;
  Multiplier hidden;

  static LagrangeState init(std::size_t num_layers);
  bool all_finite() const;
};

/// lambda * (z_sum - target) + phi * (z_sum - target)^2.
double constraint_loss(double z_sum, double target, double lambda, double phi);
Var constraint_loss(Var z_sum, double target, double lambda, double phi);

/// lm + sum_j head_j + sum_j int_j + layer + hidden.
double prune_total_loss(double lm, std::span<const double> head_terms, std::span<const double> int_terms,
                        double layer_term, double hidden_term);
Var prune_total_loss(Var lm, std::span<const Var> head_terms, std::span<const Var> int_terms, Var layer_term,
                     Var hidden_term);

/// Mean next-token cross-entropy over positions whose own and next tokens
/// are both unmasked. Attention is forced to unidirectional. Throws
/// DataError for sequences shorter than 2.
Var lm_loss(const EncoderConfig& cfg, const encoder::BoundParameters& params, const TokenSequence& seq,
            const encoder::StructureMasks* masks = nullptr);

/// Mean of lm_loss over sequences, on one tape.
Var lm_loss_batch(const EncoderConfig& cfg, const encoder::BoundParameters& params,
                  std::span<const TokenSequence> seqs, const encoder::StructureMasks* masks = nullptr);

enum class MaskOptimizer { kAdam, kSgd };
/// Which gate values enter the constraint terms. The language-model term
/// always uses sampled gates.
enum class ConstraintGates { kSampled, kDeterministic };

struct PruneRates {
  double theta = 1e-3;
  double log_alpha = 0.05;
  double lambda = 0.05;
  double phi = 0.05;
  MaskOptimizer mask_optimizer = MaskOptimizer::kAdam;
  ConstraintGates constraint_gates = ConstraintGates::kDeterministic;
};

struct PruneConfig {
  PruneTarget target;
  HardConcreteParams hard_concrete;
  PruneRates rates;
  /// Linearly decay the log_alpha rate to zero over prune_steps.
  bool decay_log_alpha = true;
  double init_log_alpha = 0.5;
  std::size_t prune_steps = 500;
  std::size_t pretrain_steps = 2000;
  std::size_t batch_size = 4;
  double pretrain_lr = 1e-3;
  bool fold_mask_values = true;
};

Json to_json(const PruneConfig& c);
/// Rates used at `step` of a prune_steps-long run.
PruneRates rates_at(const PruneConfig& c, std::size_t step);
PruneConfig prune_config_from_json(const Json& j, const PruneConfig& defaults = {});

/// Everything prune_step mutates.
struct PruneState {
  EncoderConfig config;
  ParameterSet params;
  MaskSet masks;
  LagrangeState lagrange;
  objective::Adam theta_opt;
  objective::Adam alpha_opt;
  std::size_t step = 0;

  static PruneState init(const EncoderConfig& cfg, ParameterSet params, const PruneConfig& pc);
};

/// Mask sums per constraint group.
struct MaskSums {
  std::vector<double> head;
  std::vector<double> intermediate;
  double layer = 0.0;
  double hidden = 0.0;
};

MaskSums deterministic_sums(const MaskSet& masks);

struct PruneStepResult {
  double lm = 0.0;
  double total = 0.0;
  MaskSums sampled;
};

/// One descent step on L_prune in (theta, log_alpha) with sampled masks,
/// then one ascent step on the multipliers using the sampled violations:
///   lambda += eta_lambda * (sum z - target),
///   phi    += eta_phi * (sum z - target)^2.
/// A non-finite loss aborts with NumericError and leaves `state` unchanged.
PruneStepResult prune_step(PruneState& state, std::span<const TokenSequence> batch, const PruneTarget& target,
                           const PruneRates& rates, Rng& rng);

/// Builds the masks, constraint terms, and L_prune on `tape` for fixed noise;
/// used by prune_step and by gradient checks with common random numbers.
struct PruneGraph {
  Var total;
  Var lm;
  MaskSums sums;
};
struct PruneNoise {
  std::vector<Tensor> head, intermediate;
  Tensor layer, hidden;
  static PruneNoise draw(const MaskSet& masks, Rng& rng);
};
PruneGraph build_prune_graph(const EncoderConfig& cfg, const encoder::BoundParameters& params,
                             const MaskSet& masks, std::span<const Var> log_alpha_vars,
                             const LagrangeState& lagrange, const PruneTarget& target,
                             const PruneNoise& noise, std::span<const TokenSequence> batch,
                             ConstraintGates gates = ConstraintGates::kSampled);

struct SnapResult {
  EncoderConfig config;
  ParameterSet params;
  std::vector<std::vector<std::size_t>> kept_heads;         // per kept layer
  std::vector<std::vector<std::size_t>> kept_intermediate;  // per kept layer
  std::vector<std::size_t> kept_layers;
  std::vector<std::size_t> kept_hidden;
};

/// Indices of the `k` largest values, ties to the lower index, returned in
/// ascending index order.
std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k);

/// Keeps the top-target units of each group by deterministic mask value and
/// copies the surviving weights into a dense model whose config matches the
/// target. With `fold_mask_values` the kept head, intermediate, layer, and
/// hidden gate values are multiplied into the weights they scale.
SnapResult snap_architecture(const EncoderConfig& cfg, const ParameterSet& params, const MaskSet& masks,
                             const PruneTarget& target, bool fold_mask_values = true);

struct PretrainConfig {
  std::size_t steps = 0;
  std::size_t batch_size = 4;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

/// Plain language-model training (no masks, no constraints). Runs steps
/// [opt.steps(), cfg.steps). Throws DataError on an empty corpus.
std::vector<double> continued_pretrain(const EncoderConfig& cfg, ParameterSet& params,
                                       std::span<const TokenSequence> corpus, const PretrainConfig& pc,
                                       objective::Adam& opt);

/// Mean lm_loss over `seqs` without gradients.
double evaluate_lm(const EncoderConfig& cfg, const ParameterSet& params, std::span<const TokenSequence> seqs);

}  // namespace drama::pruning
