#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drama/augment/chunk.h"
#include "drama/augment/mining.h"
#include "drama/encoder/embedder.h"
#include "drama/eval/index.h"
#include "drama/llm/client.h"
#include "drama/objective/triplet.h"
#include "drama/util/io.h"

namespace drama::augment {

enum class AugmentMode { kSent, kQgen, kRerank, kTriplet };
std::string to_string(AugmentMode m);
AugmentMode augment_mode_from_string(const std::string& s);

struct AugmentConfig {
  /// Mining bands for sent / qgen.
  std::size_t k = 50;
  std::size_t m = 10;
  std::size_t n = 20;
  /// Rerank window and negative band.
  std::size_t rerank_k = 20;
  std::size_t rerank_n = 10;
  std::size_t max_sentences = 3;
  /// Chunks (or synthetic tasks) sampled as query sources; 0 means all
  /// chunks.
  std::size_t num_queries = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

Json to_json(const AugmentConfig& c);
AugmentConfig augment_config_from_json(const Json& j, const AugmentConfig& defaults = {});

/// One record per dropped query.
struct FailureRecord {
  std::string query_id;
  std::string raw;
  std::string reason;
};
Json to_json(const FailureRecord& r);

struct AugmentOutput {
  std::vector<MinedExample> examples;
  std::vector<objective::TrainingTriplet> triplets;
  std::vector<FailureRecord> failures;
  std::size_t dropped = 0;
};

/// Chunks used as query sources: all of them, or a seeded sample of
/// num_queries, returned in id order.
std::vector<std::size_t> sample_sources(const std::vector<Chunk>& chunks, const AugmentConfig& cfg,
                                        AugmentMode mode);

/// Cropped-sentence queries mined against `index` (query id "sent:{chunk}").
AugmentOutput run_sent(const std::vector<Chunk>& chunks, const eval::ExactIndex& index,
                       const encoder::TextEmbedder& teacher, const AugmentConfig& cfg);

/// LLM-generated queries mined against `index` (query id "qgen:{chunk}").
AugmentOutput run_qgen(const std::vector<Chunk>& chunks, const eval::ExactIndex& index,
                       const encoder::TextEmbedder& teacher, const llm::Client& client, const AugmentConfig& cfg);

/// Generated queries, top rerank_k retrieval, listwise rerank, refine
/// (query id "rerank:{chunk}").
AugmentOutput run_rerank(const std::vector<Chunk>& chunks, const eval::ExactIndex& index,
                         const encoder::TextEmbedder& teacher, const llm::Client& client,
                         const AugmentConfig& cfg);

/// Result of the two-call synthetic flow. `triplet` is empty when dropped.
struct SyntheticResult {
  std::optional<objective::TrainingTriplet> triplet;
  std::vector<FailureRecord> failures;
};

/// Task + query, then positive + negative. A malformed reply at either step
/// is retried once; a second failure drops the task with a record.
SyntheticResult gen_synthetic_triplet(std::uint64_t task_seed, const llm::Client& client);

/// cfg.num_queries synthetic triplets with task seeds derived from cfg.seed.
AugmentOutput run_triplet(const llm::Client& client, const AugmentConfig& cfg);

}  // namespace drama::augment
