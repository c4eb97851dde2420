#include "drama/augment/pipeline.h"

#include <algorithm>

#include "drama/llm/tasks.h"
#include "drama/util/error.h"
#include "drama/util/json_config.h"
#include "drama/util/parallel.h"

namespace drama::augment {
namespace {

using objective::Source;

std::map<std::string, std::string> text_map(const std::vector<Chunk>& chunks) {
  std::map<std::string, std::string> out;
  for (const auto& c : chunks) out.emplace(c.id, c.text);
  return out;
}

struct Slot {
  std::optional<MinedExample> example;
  std::optional<FailureRecord> failure;
};

// Runs one job per sampled chunk into its own slot, then emits examples and
// triplets sorted by query id.
AugmentOutput collect(const std::vector<Chunk>& chunks, const std::vector<std::size_t>& sources, Source source,
                      const std::function<Slot(const Chunk&)>& job) {
  std::vector<Slot> slots(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) { slots[i] = job(chunks[sources[i]]); });
  AugmentOutput out;
  for (auto& s : slots) {
    if (s.example) out.examples.push_back(std::move(*s.example));
    if (s.failure) {
      out.failures.push_back(std::move(*s.failure));
      ++out.dropped;
    }
  }
  std::sort(out.examples.begin(), out.examples.end(),
            [](const MinedExample& a, const MinedExample& b) { return a.query_id < b.query_id; });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const FailureRecord& a, const FailureRecord& b) { return a.query_id < b.query_id; });
  const auto texts = text_map(chunks);
  for (const auto& ex : out.examples) {
    auto ts = to_triplets(ex, texts, source);
    out.triplets.insert(out.triplets.end(), ts.begin(), ts.end());
  }
  return out;
}

}  // namespace

std::string to_string(AugmentMode m) {
  switch (m) {
    case AugmentMode::kSent: return "sent";
    case AugmentMode::kQgen: return "qgen";
    case AugmentMode::kRerank: return "rerank";
    case AugmentMode::kTriplet: return "triplet";
  }
  return "?";
}

AugmentMode augment_mode_from_string(const std::string& s) {
  if (s == "sent") return AugmentMode::kSent;
  if (s == "qgen") return AugmentMode::kQgen;
  if (s == "rerank") return AugmentMode::kRerank;
  if (s == "triplet") return AugmentMode::kTriplet;
  throw ConfigError("unknown augment mode '" + s + "' (expected sent|qgen|rerank|triplet)");
}

void AugmentConfig::validate() const {
  if (k < 1 || n >= k || m < 1 || m >= k - n)
    throw ConfigError("augment: need 1 <= m < k - n (k=" + std::to_string(k) + ", m=" + std::to_string(m) +
                      ", n=" + std::to_string(n) + ")");
  if (rerank_k < 2 || rerank_k > 20) throw ConfigError("augment.rerank_k: must lie in [2, 20]");
  if (rerank_n + 2 > rerank_k) throw ConfigError("augment.rerank_n: must be <= rerank_k - 2");
  if (max_sentences < 1) throw ConfigError("augment.max_sentences: must be >= 1");
}

Json to_json(const AugmentConfig& c) {
  return Json{{"k", c.k},
              {"m", c.m},
              {"n", c.n},
              {"rerank_k", c.rerank_k},
              {"rerank_n", c.rerank_n},
              {"max_sentences", c.max_sentences},
              {"num_queries", c.num_queries},
              {"seed", c.seed}};
}

AugmentConfig augment_config_from_json(const Json& j, const AugmentConfig& defaults) {
  if (!j.is_object()) throw ConfigError("augment: expected an object");
  reject_unknown_keys(j, {"k", "m", "n", "rerank_k", "rerank_n", "max_sentences", "num_queries", "seed"}, "augment");
  AugmentConfig c = defaults;
  read_opt(j, "k", c.k, "augment");
  read_opt(j, "m", c.m, "augment");
  read_opt(j, "n", c.n, "augment");
  read_opt(j, "rerank_k", c.rerank_k, "augment");
  read_opt(j, "rerank_n", c.rerank_n, "augment");
  read_opt(j, "max_sentences", c.max_sentences, "augment");
  read_opt(j, "num_queries", c.num_queries, "augment");
  read_opt(j, "seed", c.seed, "augment");
  c.validate();
  return c;
}

Json to_json(const FailureRecord& r) { return Json{{"query_id", r.query_id}, {"raw", r.raw}, {"reason", r.reason}}; }

std::vector<std::size_t> sample_sources(const std::vector<Chunk>& chunks, const AugmentConfig& cfg,
                                        AugmentMode mode) {
  std::vector<std::size_t> idx(chunks.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (cfg.num_queries != 0 && cfg.num_queries < chunks.size()) {
    Rng rng = make_rng(cfg.seed, "augment." + to_string(mode) + ".sample");
    shuffle(idx, rng);
    idx.resize(cfg.num_queries);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return chunks[a].id < chunks[b].id; });
  return idx;
}

AugmentOutput run_sent(const std::vector<Chunk>& chunks, const eval::ExactIndex& index,
                       const encoder::TextEmbedder& teacher, const AugmentConfig& cfg) {
  cfg.validate();
  check_mining_bands(index.size(), cfg.k, cfg.m, cfg.n);
  return collect(chunks, sample_sources(chunks, cfg, AugmentMode::kSent), Source::kSent, [&](const Chunk& c) {
    Rng rng = make_rng(cfg.seed, "augment.sent." + c.id);
    const std::string q = crop_query_random(c.text, rng, cfg.max_sentences);
    Slot s;
    s.example = mine_from_index(q, index, teacher, cfg.k, cfg.m, cfg.n);
    s.example->query_id = "sent:" + c.id;
    s.example->kind = QueryKind::kCropped;
    return s;
  });
}

AugmentOutput run_qgen(const std::vector<Chunk>& chunks, const eval::ExactIndex& index,
                       const encoder::TextEmbedder& teacher, const llm::Client& client, const AugmentConfig& cfg) {
  cfg.validate();
  check_mining_bands(index.size(), cfg.k, cfg.m, cfg.n);
  return collect(chunks, sample_sources(chunks, cfg, AugmentMode::kQgen), Source::kQgen, [&](const Chunk& c) {
    Slot s;
    const std::string qid = "qgen:" + c.id;
    try {
      const auto q = llm::generate_query(client, c.text);
      s.example = mine_from_index(q.query, index, teacher, cfg.k, cfg.m, cfg.n);
      s.example->query_id = qid;
      s.example->kind = QueryKind::kGenerated;
    } catch (const ClientError& e) {
      s.failure = FailureRecord{qid, "", e.what()};
    }
    return s;
  });
}

AugmentOutput run_rerank(const std::vector<Chunk>& chunks, const eval::ExactIndex& index,
                         const encoder::TextEmbedder& teacher, const llm::Client& client,
                         const AugmentConfig& cfg) {
  cfg.validate();
  check_mining_bands(index.size(), cfg.rerank_k, 1, cfg.rerank_n);
  const auto texts = text_map(chunks);
  return collect(chunks, sample_sources(chunks, cfg, AugmentMode::kRerank), Source::kRerank, [&](const Chunk& c) {
    Slot s;
    const std::string qid = "rerank:" + c.id;
    try {
      const auto q = llm::generate_query(client, c.text);
      const auto hits = index.search_topk(teacher.embed(q.query), cfg.rerank_k);
      std::vector<std::string> cand_texts;
      for (const auto& h : hits) cand_texts.push_back(texts.at(h.id));
      const auto rr = llm::listwise_rerank(client, q.query, cand_texts);
      if (rr.parse.unrepairable) {
        s.failure = FailureRecord{qid, rr.raw_reply, "unrepairable ranking"};
        return s;
      }
      s.example = rerank_refine(q.query, hits, rr.parse.order, cfg.rerank_n);
      s.example->query_id = qid;
      s.example->kind = QueryKind::kGenerated;
    } catch (const ClientError& e) {
      s.failure = FailureRecord{qid, "", e.what()};
    }
    return s;
  });
}

SyntheticResult gen_synthetic_triplet(std::uint64_t task_seed, const llm::Client& client) {
  SyntheticResult out;
  const std::string qid = "triplet:" + std::to_string(task_seed);
  // Up to two tries; the parser returns nullopt for a malformed reply.
  auto two_tries = [&](const std::string& tpl, const std::map<std::string, std::string>& vars,
                       const std::vector<std::string>& fields) -> std::optional<Json> {
    std::string raw;
    std::string reason;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        raw = client.call(tpl, vars).reply;
      } catch (const ClientError& e) {
        out.failures.push_back({qid, "", e.what()});
        return std::nullopt;
      }
      try {
        const Json j = Json::parse(raw);
        bool ok = j.is_object();
        for (const auto& f : fields) ok = ok && j.contains(f) && j[f].is_string() && !j[f].get<std::string>().empty();
        if (ok) return std::optional<Json>(std::in_place, j);
        reason = tpl + ": reply lacks required fields";
      } catch (const Json::exception&) {
        reason = tpl + ": reply is not JSON";
      }
    }
    out.failures.push_back({qid, raw, reason});
    return std::nullopt;
  };
  const auto task = two_tries("triplet_task", {{"task_seed", std::to_string(task_seed)}}, {"task", "query"});
  if (!task) return out;
  const std::string t = task->at("task"), q = task->at("query");
  const auto docs = two_tries("triplet_docs", {{"task", t}, {"query", q}}, {"positive", "negative"});
  if (!docs) return out;
  objective::TrainingTriplet trip;
  trip.query = q;
  trip.positive = docs->at("positive");
  trip.negatives = {docs->at("negative").get<std::string>()};
  trip.source = Source::kTriplet;
  trip.ranks = Json{{"query_id", qid}, {"task", t}};
  if (trip.negatives[0] == trip.positive) {
    out.failures.push_back({qid, docs->dump(), "negative equals positive"});
    return out;
  }
  out.triplet = std::move(trip);
  return out;
}

AugmentOutput run_triplet(const llm::Client& client, const AugmentConfig& cfg) {
  cfg.validate();
  if (cfg.num_queries < 1) throw ConfigError("augment.num_queries: triplet mode needs >= 1 task");
  std::vector<SyntheticResult> slots(cfg.num_queries);
  parallel_for(slots.size(), [&](std::size_t i) {
    slots[i] = gen_synthetic_triplet(derive_seed(cfg.seed, "augment.triplet." + std::to_string(i)), client);
  });
  AugmentOutput out;
  for (auto& s : slots) {
    if (s.triplet) {
      out.triplets.push_back(std::move(*s.triplet));
    } else {
      ++out.dropped;
    }
    out.failures.insert(out.failures.end(), s.failures.begin(), s.failures.end());
  }
  return out;
}

}  // namespace drama::augment
