#include "drama/augment/mining.h"

#include <algorithm>

#include "drama/util/error.h"

namespace drama::augment {

std::string to_string(QueryKind k) { return k == QueryKind::kCropped ? "cropped" : "generated"; }

void check_mining_bands(std::size_t index_size, std::size_t k, std::size_t m, std::size_t n) {
  if (k < 1 || k > index_size) {
    throw ConfigError("mining: k=" + std::to_string(k) + " outside [1, " + std::to_string(index_size) + "]");
  }
  if (n >= k) throw ConfigError("mining: n=" + std::to_string(n) + " must be < k=" + std::to_string(k));
  if (m < 1 || m >= k - n) {
    throw ConfigError("mining: positive band [1, " + std::to_string(m) + "] overlaps negative band [" +
                      std::to_string(k - n) + ", " + std::to_string(k) + "]");
  }
}

MinedExample mine_from_hits(const std::string& query, const std::vector<eval::Hit>& hits, std::size_t m,
                            std::size_t n) {
  const std::size_t k = hits.size();
  check_mining_bands(k, k, m, n);
  MinedExample ex;
  ex.query = query;
  for (std::size_t r = 1; r <= m; ++r) {
    ex.positives.push_back(hits[r - 1].id);
    ex.retrieval_ranks[hits[r - 1].id] = r;
  }
  for (std::size_t r = k - n; r <= k; ++r) {
    ex.negatives.push_back(hits[r - 1].id);
    ex.retrieval_ranks[hits[r - 1].id] = r;
  }
  return ex;
}

MinedExample mine_from_index(const std::string& query, const eval::ExactIndex& index,
                             const encoder::TextEmbedder& embedder, std::size_t k, std::size_t m, std::size_t n) {
  check_mining_bands(index.size(), k, m, n);
  const auto q = embedder.embed(query);
  return mine_from_hits(query, index.search_topk(q, k), m, n);
}

MinedExample rerank_refine(const std::string& query, const std::vector<eval::Hit>& candidates,
                           const std::vector<std::size_t>& order, std::size_t n) {
  const std::size_t k = candidates.size();
  if (order.size() != k) throw ConfigError("rerank_refine: permutation length differs from candidate count");
  std::vector<bool> seen(k + 1, false);
  for (std::size_t i : order) {
    if (i < 1 || i > k || seen[i]) throw ConfigError("rerank_refine: not a permutation of 1..k");
    seen[i] = true;
  }
  check_mining_bands(k, k, 1, n);
  MinedExample ex;
  ex.query = query;
  auto keep = [&](std::size_t reranked, std::vector<std::string>& into) {
    const std::size_t orig = order[reranked - 1];
    const std::string& id = candidates[orig - 1].id;
    into.push_back(id);
    ex.retrieval_ranks[id] = orig;
    ex.reranked_ranks[id] = reranked;
  };
  keep(1, ex.positives);
  for (std::size_t r = k - n; r <= k; ++r) keep(r, ex.negatives);
  return ex;
}

std::vector<objective::TrainingTriplet> to_triplets(const MinedExample& ex,
                                                    const std::map<std::string, std::string>& texts,
                                                    objective::Source source) {
  auto text_of = [&](const std::string& id) -> const std::string& {
    auto it = texts.find(id);
    if (it == texts.end()) throw DataError("mining: no text for chunk '" + id + "'");
    return it->second;
  };
  Json neg_ranks = Json::object();
  for (const auto& id : ex.negatives) neg_ranks[id] = ex.retrieval_ranks.at(id);
  std::vector<objective::TrainingTriplet> out;
  for (const auto& pid : ex.positives) {
    objective::TrainingTriplet t;
    t.query = ex.query;
    t.positive = text_of(pid);
    for (const auto& nid : ex.negatives) {
      const std::string& nt = text_of(nid);
      if (nt != t.positive) t.negatives.push_back(nt);
    }
    t.source = source;
    t.ranks = Json{{"query_id", ex.query_id},
                   {"kind", to_string(ex.kind)},
                   {"positive", {{pid, ex.retrieval_ranks.at(pid)}}},
                   {"negatives", neg_ranks}};
    if (!ex.reranked_ranks.empty()) {
      Json rr = Json::object();
      for (const auto& [id, r] : ex.reranked_ranks) rr[id] = r;
      t.ranks["reranked"] = rr;
    }
    if (t.negatives.empty()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace drama::augment
