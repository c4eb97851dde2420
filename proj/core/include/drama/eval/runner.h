#pragma once

#include <map>
#include <string>
#include <vector>

#include "drama/data/corpus.h"
#include "drama/encoder/embedder.h"
#include "drama/eval/index.h"
#include "drama/eval/metrics.h"
#include "drama/eval/needle.h"

namespace drama::eval {

inline constexpr int kReportSchemaVersion = 1;

struct Timings {
  double encode_corpus_s = 0.0;
  double encode_queries_s = 0.0;
  double search_s = 0.0;
};

struct EvalReport {
  std::size_t k = 10;
  std::size_t embedding_dim = 0;
  NdcgResult ndcg;
  std::size_t num_docs = 0;
  std::size_t num_queries = 0;
  std::size_t truncated_docs = 0;
  std::size_t truncated_queries = 0;
  Run run;
  Timings timings;
};

/// Wall-clock timings are kept out of the report JSON so that report files
/// stay byte-identical across runs; timings_json() gives the sidecar.
Json report_json(const EvalReport& r);
Json timings_json(const Timings& t);

/// Encodes the corpus into an ExactIndex.
ExactIndex build_index(const encoder::TextEmbedder& embedder, const std::vector<data::Document>& corpus,
                       std::size_t* truncated = nullptr);

/// Searches every query (depth = min(k, corpus size)) and scores nDCG@k.
EvalReport run_eval(const encoder::TextEmbedder& embedder, const std::vector<data::Document>& corpus,
                    const std::vector<data::Query>& queries, const Qrels& qrels, std::size_t k = 10);

/// Same, against a prebuilt index.
EvalReport run_eval(const encoder::TextEmbedder& embedder, const ExactIndex& index,
                    const std::vector<data::Query>& queries, const Qrels& qrels, std::size_t k = 10);

struct NeedleReport {
  std::map<std::size_t, EvalReport> per_length;
};

NeedleReport run_needle_eval(const encoder::TextEmbedder& embedder, const std::vector<NeedleSet>& sets,
                             std::size_t k = 10);
Json report_json(const NeedleReport& r);

}  // namespace drama::eval
