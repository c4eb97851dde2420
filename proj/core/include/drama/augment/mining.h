#pragma once

#include <map>
#include <string>
#include <vector>

#include "drama/encoder/embedder.h"
#include "drama/eval/index.h"
#include "drama/llm/tasks.h"
#include "drama/objective/triplet.h"

namespace drama::augment {

enum class QueryKind { kCropped, kGenerated };
std::string to_string(QueryKind k);

struct MinedExample {
  std::string query_id;
  std::string query;
  QueryKind kind = QueryKind::kCropped;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  /// 1-based rank of every kept id in the retrieval that produced it.
  std::map<std::string, std::size_t> retrieval_ranks;
  /// After a listwise rerank: 1-based reranked rank of every kept id.
  std::map<std::string, std::size_t> reranked_ranks;

  friend bool operator==(const MinedExample&, const MinedExample&) = default;
};

/// Throws ConfigError unless 1 <= m < k - n and k <= index_size.
void check_mining_bands(std::size_t index_size, std::size_t k, std::size_t m, std::size_t n);

/// Top-k retrieval; positives are ranks [1, m], hard negatives ranks
/// [k - n, k] inclusive (n + 1 ids). The query's own source chunk is not
/// excluded.
MinedExample mine_from_index(const std::string& query, const eval::ExactIndex& index,
                             const encoder::TextEmbedder& embedder, std::size_t k, std::size_t m, std::size_t n);

/// Same, from an already computed ranked list.
MinedExample mine_from_hits(const std::string& query, const std::vector<eval::Hit>& hits, std::size_t m,
                            std::size_t n);

/// `candidates` is the top-k retrieval, `order` the reranker's 1-based
/// permutation. Positive = reranked rank 1, negatives = reranked ranks
/// [k - n, k] inclusive. Throws ConfigError if the permutation is invalid or
/// the bands overlap.
MinedExample rerank_refine(const std::string& query, const std::vector<eval::Hit>& candidates,
                           const std::vector<std::size_t>& order, std::size_t n);

/// One triplet per positive; negatives shared. `texts` maps chunk id to
/// text. Ranks go into the triplet's metadata.
std::vector<objective::TrainingTriplet> to_triplets(const MinedExample& ex,
                                                    const std::map<std::string, std::string>& texts,
                                                    objective::Source source);

}  // namespace drama::augment
