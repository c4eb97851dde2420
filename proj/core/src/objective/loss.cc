#include "drama/objective/loss.h"

#include <cmath>
#include <set>

#include "drama/encoder/model.h"
#include "drama/numerics/ops.h"
#include "drama/util/error.h"
#include "drama/util/json_config.h"

namespace drama::objective {

namespace ops = numerics::ops;

void LossConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("loss.temperature must be > 0");
  for (std::size_t i = 0; i < mrl_dims.size(); ++i) {
    if (mrl_dims[i] == 0) throw ConfigError("loss.mrl_dims entries must be >= 1");
    if (i > 0 && mrl_dims[i] <= mrl_dims[i - 1]) throw ConfigError("loss.mrl_dims must be strictly ascending");
  }
  if (!mrl_weights.empty() && mrl_weights.size() != mrl_dims.size()) {
    throw ConfigError("loss.mrl_weights must match mrl_dims in length");
  }
  for (double w : mrl_weights)
    if (!(w > 0.0)) throw ConfigError("loss.mrl_weights must be positive");
}

std::vector<std::size_t> LossConfig::resolved_dims(std::size_t full_dim) const {
  if (mrl_dims.empty()) return {full_dim};
  if (mrl_dims.back() != full_dim) {
    throw ConfigError("loss.mrl_dims must end at the full embedding width " + std::to_string(full_dim) +
                      ", got " + std::to_string(mrl_dims.back()));
  }
  return mrl_dims;
}

std::vector<double> LossConfig::resolved_weights(std::size_t full_dim) const {
  const auto dims = resolved_dims(full_dim);
  if (mrl_weights.empty()) return std::vector<double>(dims.size(), 1.0);
  return mrl_weights;
}

Json to_json(const LossConfig& c) {
  return Json{{"temperature", c.temperature},
              {"mrl_dims", c.mrl_dims},
              {"mrl_weights", c.mrl_weights},
              {"num_hard_negatives", c.num_hard_negatives}};
}

LossConfig loss_config_from_json(const Json& j, const LossConfig& defaults) {
  constexpr std::string_view ctx = "loss";
  reject_unknown_keys(j, {"temperature", "mrl_dims", "mrl_weights", "num_hard_negatives"}, ctx);
  LossConfig c = defaults;
  read_opt(j, "temperature", c.temperature, ctx);
  read_opt(j, "mrl_dims", c.mrl_dims, ctx);
  read_opt(j, "mrl_weights", c.mrl_weights, ctx);
  read_opt(j, "num_hard_negatives", c.num_hard_negatives, ctx);
  c.validate();
  return c;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_sim: dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ConfigError("cosine_sim: zero-norm input");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

void require_finite(Var sims) {
  const auto& v = sims.value();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw NumericError("infonce: non-finite similarity at index " + std::to_string(i));
  }
}

}  // namespace

Var infonce(Var query, Var positive, std::optional<Var> negatives, double tau) {
  if (!(tau > 0.0)) throw ConfigError("infonce: temperature must be > 0");
  std::vector<Var> rows{positive};
  if (negatives) rows.push_back(*negatives);
  Var cands = ops::l2_normalize_rows(rows.size() == 1 ? positive : ops::concat_rows(rows));
  Var q = ops::l2_normalize_rows(query);
  Var sims = ops::matmul_nt(q, cands);
  require_finite(sims);
  return ops::cross_entropy(ops::scale(sims, 1.0 / tau), {0});
}

Var batch_loss(const Batch& batch, const LossConfig& cfg) {
  if (!(cfg.temperature > 0.0)) throw ConfigError("batch_loss: temperature must be > 0");
  const std::size_t B = batch.queries.value().rows();
  if (batch.positive_index.size() != B) {
    throw ShapeError("batch_loss: " + std::to_string(batch.positive_index.size()) + " positive indices for " +
                     std::to_string(B) + " queries");
  }
  const std::size_t P = batch.candidates.value().rows();
  std::vector<std::int32_t> targets;
  targets.reserve(B);
  for (auto idx : batch.positive_index) {
    if (idx >= P) throw ShapeError("batch_loss: positive index " + std::to_string(idx) + " outside pool of " + std::to_string(P));
    targets.push_back(static_cast<std::int32_t>(idx));
  }
  Var q = ops::l2_normalize_rows(batch.queries);
  Var c = ops::l2_normalize_rows(batch.candidates);
  Var sims = ops::matmul_nt(q, c);
  require_finite(sims);
  return ops::cross_entropy(ops::scale(sims, 1.0 / cfg.temperature), std::move(targets));
}

Var mrl_loss(const Batch& raw, const LossConfig& cfg) {
  const std::size_t full = raw.queries.value().cols();
  const auto dims = cfg.resolved_dims(full);
  const auto weights = cfg.resolved_weights(full);
  std::optional<Var> total;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    Batch view = raw;
    if (dims[m] != full) {
      view.queries = ops::slice_cols(raw.queries, 0, dims[m]);
      view.candidates = ops::slice_cols(raw.candidates, 0, dims[m]);
    }
    Var term;
    try {
      term = batch_loss(view, cfg);
    } catch (const DegenerateEmbeddingError&) {
      throw DegenerateEmbeddingError("mrl_loss: zero vector after truncation to dim " + std::to_string(dims[m]));
    }
    term = ops::scale(term, weights[m]);
    total = total ? ops::add(*total, term) : term;
  }
  return *total;
}

BatchTexts layout_batch(std::span<const TrainingTriplet> triplets, std::size_t num_negatives, Rng& rng) {
  if (triplets.empty()) throw DataError("assemble_batch: empty triplet list");
  BatchTexts out;
  for (const auto& t : triplets) {
    if (num_negatives > 0 && t.negatives.empty()) {
      throw DataError("assemble_batch: triplet for query '" + t.query +
                      "' has no negatives but num_hard_negatives = " + std::to_string(num_negatives));
    }
    out.queries.push_back(t.query);
    out.positive_index.push_back(out.candidates.size());
    out.candidates.push_back(t.positive);
    for (std::size_t j = 0; j < num_negatives; ++j) {
      if (j < t.negatives.size()) {
        out.candidates.push_back(t.negatives[j]);
      } else {
        out.candidates.push_back(t.negatives[uniform_index(rng, t.negatives.size())]);
      }
    }
  }
  std::set<std::string> seen;
  for (const auto& c : out.candidates)
    if (!seen.insert(c).second) ++out.duplicate_candidates;
  return out;
}

Batch assemble_batch(std::span<const TrainingTriplet> triplets, std::size_t num_negatives,
                     const EncodeFn& encode, Rng& rng) {
  BatchTexts texts = layout_batch(triplets, num_negatives, rng);
  std::vector<Var> q, c;
  q.reserve(texts.queries.size());
  c.reserve(texts.candidates.size());
  for (const auto& s : texts.queries) q.push_back(encode(s));
  for (const auto& s : texts.candidates) c.push_back(encode(s));
  Batch b;
  b.queries = q.size() == 1 ? q[0] : ops::concat_rows(q);
  b.candidates = c.size() == 1 ? c[0] : ops::concat_rows(c);
  b.positive_index = std::move(texts.positive_index);
  b.duplicate_candidates = texts.duplicate_candidates;
  return b;
}

}  // namespace drama::objective
