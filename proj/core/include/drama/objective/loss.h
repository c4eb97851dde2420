#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drama/numerics/tape.h"
#include "drama/objective/triplet.h"
#include "drama/util/io.h"
#include "drama/util/rng.h"

namespace drama::objective {

using numerics::Tensor;
using numerics::Var;

struct LossConfig {
  double temperature = 0.05;
  /// Ascending; the last entry is the full embedding width. Empty means
  /// "full width only" and is resolved by resolved_dims().
  std::vector<std::size_t> mrl_dims;
  /// Same length as mrl_dims; empty means uniform weights of 1.
  std::vector<double> mrl_weights;
  std::size_t num_hard_negatives = 7;

  void validate() const;
  std::vector<std::size_t> resolved_dims(std::size_t full_dim) const;
  std::vector<double> resolved_weights(std::size_t full_dim) const;
};

Json to_json(const LossConfig& c);
LossConfig loss_config_from_json(const Json& j, const LossConfig& defaults = {});

/// a.b / (|a||b|). Throws ConfigError on a zero-norm input.
double cosine_sim(std::span<const double> a, std::span<const double> b);

/// -log softmax over {positive} + negatives at index 0, with cosine
/// similarities divided by tau. `negatives` may be an empty optional.
/// Throws NumericError on a non-finite similarity.
Var infonce(Var query, Var positive, std::optional<Var> negatives, double tau);

/// Encoded contrastive batch. Candidate rows are laid out query by query:
/// query i's positive at row i*(1+N), its N negatives following.
struct Batch {
  Var queries;      // [B, d]
  Var candidates;   // [B*(1+N), d]
  std::vector<std::size_t> positive_index;
  std::size_t duplicate_candidates = 0;
};

/// Mean over queries of the InfoNCE loss against the whole candidate pool
/// (every other query's positive and negatives act as in-batch negatives).
/// Rows are L2-normalized first, so the similarity is cosine.
Var batch_loss(const Batch& batch, const LossConfig& cfg);

/// sum_m w_m * batch_loss(batch truncated to mrl_dims[m]); truncation
/// precedes normalization. A zero prefix raises DegenerateEmbeddingError
/// naming the dimension.
Var mrl_loss(const Batch& raw, const LossConfig& cfg);

/// Text layout of a batch, before encoding.
struct BatchTexts {
  std::vector<std::string> queries;
  std::vector<std::string> candidates;
  std::vector<std::size_t> positive_index;
  std::size_t duplicate_candidates = 0;
};

/// Lays out triplets with exactly N negatives each: extra negatives beyond
/// N are dropped (stored order kept); a shortfall is filled by resampling the
/// triplet's own negatives with replacement from `rng`. Throws DataError on
/// an empty list, or when N > 0 and a triplet has no negatives at all.
BatchTexts layout_batch(std::span<const TrainingTriplet> triplets, std::size_t num_negatives, Rng& rng);

using EncodeFn = std::function<Var(const std::string& text)>;

/// layout_batch + encoding of every text with `encode` (raw [1, d] rows).
Batch assemble_batch(std::span<const TrainingTriplet> triplets, std::size_t num_negatives,
                     const EncodeFn& encode, Rng& rng);

}  // namespace drama::objective
