#include "drama/eval/runner.h"

#include <chrono>

#include "drama/util/error.h"
#include "drama/util/parallel.h"

namespace drama::eval {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Json timings_json(const Timings& t) {
  return Json{{"encode_corpus_s", t.encode_corpus_s},
              {"encode_queries_s", t.encode_queries_s},
              {"search_s", t.search_s}};
}

Json report_json(const EvalReport& r) {
  return Json{{"schema_version", kReportSchemaVersion},
              {"metric", "ndcg@" + std::to_string(r.k)},
              {"k", r.k},
              {"embedding_dim", r.embedding_dim},
              {"num_docs", r.num_docs},
              {"num_queries", r.num_queries},
              {"ndcg", to_json(r.ndcg)},
              {"truncation", {{"docs", r.truncated_docs}, {"queries", r.truncated_queries}}}};
}

ExactIndex build_index(const encoder::TextEmbedder& embedder, const std::vector<data::Document>& corpus,
                       std::size_t* truncated) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& d : corpus) texts.push_back(d.text);
  auto embs = embedder.embed_all(texts, truncated);
  std::vector<std::pair<std::string, std::vector<double>>> pairs;
  pairs.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) pairs.emplace_back(corpus[i].id, std::move(embs[i]));
  return ExactIndex::build(std::move(pairs));
}

EvalReport run_eval(const encoder::TextEmbedder& embedder, const std::vector<data::Document>& corpus,
                    const std::vector<data::Query>& queries, const Qrels& qrels, std::size_t k) {
  const auto t0 = Clock::now();
  std::size_t truncated = 0;
  const ExactIndex index = build_index(embedder, corpus, &truncated);
  const double enc = seconds_since(t0);
  EvalReport r = run_eval(embedder, index, queries, qrels, k);
  r.truncated_docs = truncated;
  r.timings.encode_corpus_s = enc;
  return r;
}

EvalReport run_eval(const encoder::TextEmbedder& embedder, const ExactIndex& index,
                    const std::vector<data::Query>& queries, const Qrels& qrels, std::size_t k) {
  if (k < 1) throw ConfigError("eval: k must be >= 1");
  if (index.size() == 0) throw DataError("eval: empty corpus");
  if (embedder.dim() != index.dim()) {
    throw ConfigError("eval: embedder dimension " + std::to_string(embedder.dim()) +
                      " does not match index dimension " + std::to_string(index.dim()));
  }
  EvalReport r;
  r.k = k;
  r.embedding_dim = index.dim();
  r.num_docs = index.size();
  r.num_queries = queries.size();

  std::vector<std::string> texts;
  for (const auto& q : queries) texts.push_back(q.text);
  auto t0 = Clock::now();
  const auto qembs = embedder.embed_all(texts, &r.truncated_queries);
  r.timings.encode_queries_s = seconds_since(t0);

  t0 = Clock::now();
  const std::size_t depth = std::min(k, index.size());
  std::vector<std::vector<Hit>> hits(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) { hits[i] = index.search_topk(qembs[i], depth); });
  r.timings.search_s = seconds_since(t0);

  for (std::size_t i = 0; i < queries.size(); ++i) {
    RankedList& list = r.run[queries[i].id];
    for (const auto& h : hits[i]) {
      list.ids.push_back(h.id);
      list.scores.push_back(h.score);
    }
  }
  r.ndcg = ndcg_at_k(r.run, qrels, k);
  return r;
}

NeedleReport run_needle_eval(const encoder::TextEmbedder& embedder, const std::vector<NeedleSet>& sets,
                             std::size_t k) {
  NeedleReport out;
  for (const auto& s : sets) out.per_length[s.length] = run_eval(embedder, s.corpus, s.queries, s.qrels, k);
  return out;
}

Json report_json(const NeedleReport& r) {
  Json per = Json::object();
  for (const auto& [len, rep] : r.per_length) per[std::to_string(len)] = report_json(rep);
  Json means = Json::object();
  for (const auto& [len, rep] : r.per_length) means[std::to_string(len)] = rep.ndcg.mean;
  return Json{{"schema_version", kReportSchemaVersion}, {"ndcg_by_length", means}, {"per_length", per}};
}

}  // namespace drama::eval
