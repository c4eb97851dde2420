#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "drama/util/io.h"

namespace drama::eval {

/// query id -> doc id -> grade (>= 0).
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct RankedList {
  std::vector<std::string> ids;
  std::vector<double> scores;
};

/// query id -> ranked documents, best first.
using Run = std::map<std::string, RankedList>;

/// TSV "query_id<TAB>doc_id<TAB>relevance". Negative grades, duplicate
/// pairs and malformed lines raise DataError.
Qrels read_qrels(const std::filesystem::path& path);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);

/// TREC six-column "qid Q0 docid rank score tag". Scores are written with
/// 17 significant digits so they round-trip.
void write_trec_run(const std::filesystem::path& path, const Run& run, const std::string& tag);
Run read_trec_run(const std::filesystem::path& path);

struct NdcgResult {
  std::map<std::string, double> per_query;
  double mean = 0.0;
  /// Queries in the run with no qrels entry.
  std::vector<std::string> missing_qrels;
  /// Queries whose judged grades are all zero.
  std::vector<std::string> zero_qrels;
};

/// One query: DCG = sum_{r<=k} (2^rel - 1) / log2(r + 1), divided by the
/// DCG of the ideal ordering of all judged documents. Unjudged documents
/// count as grade 0. Returns -1 if the ideal DCG is zero.
double ndcg_query(const std::vector<std::string>& ranked, const std::map<std::string, int>& grades, std::size_t k);

/// Per-query scores and their mean over scorable queries. Throws
/// ConfigError for k < 1.
NdcgResult ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k = 10);

Json to_json(const NdcgResult& r);

}  // namespace drama::eval
