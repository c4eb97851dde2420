#pragma once

#include <string>
#include <vector>

#include "drama/llm/client.h"

namespace drama::llm {

struct RankParse {
  /// 1-based candidate indices, always a permutation of 1..k.
  std::vector<std::size_t> order;
  std::vector<std::string> repairs;
  /// No in-range index was found; `order` is the identity.
  bool unrepairable = false;
};

/// Bracketed integers in order of appearance; out-of-range and repeated
/// indices are dropped (first occurrence wins) and missing ones appended in
/// ascending order. Every repair is logged.
RankParse parse_ranking(const std::string& reply, std::size_t k);

struct GeneratedQuery {
  std::string query;
  int attempts = 0;
};

/// First nonempty line of the reply; an empty reply is retried. Throws
/// ConfigError for an empty document.
GeneratedQuery generate_query(const Client& client, const std::string& document);

struct RerankResult {
  RankParse parse;
  std::string raw_reply;
  int attempts = 0;
};

/// Lists the candidates as [1]..[k]; requires 2 <= k <= 20.
RerankResult listwise_rerank(const Client& client, const std::string& query,
                             const std::vector<std::string>& candidates);

}  // namespace drama::llm
