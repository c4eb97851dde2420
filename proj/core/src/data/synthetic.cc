#include "drama/data/synthetic.h"

#include <cstdio>

#include "drama/data/pseudo_words.h"
#include "drama/util/error.h"
#include "drama/util/json_config.h"

namespace drama::data {
namespace {

std::string doc_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "doc%05zu", i);
  return buf;
}

std::string query_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%04zu", i);
  return buf;
}

struct DocPlan {
  std::size_t topic;
  std::vector<std::string> entities;
};

}  // namespace

void SynthSpec::validate() const {
  if (num_docs < 2) throw ConfigError("synth.num_docs: must be >= 2");
  if (num_topics < 1 || num_topics > num_docs) throw ConfigError("synth.num_topics: must lie in [1, num_docs]");
  if (doc_tokens < 8) throw ConfigError("synth.doc_tokens: must be >= 8");
  if (topic_words < 2) throw ConfigError("synth.topic_words: must be >= 2");
  if (background_words < 2) throw ConfigError("synth.background_words: must be >= 2");
  if (entities_per_doc < 1) throw ConfigError("synth.entities_per_doc: must be >= 1");
  if (eval_queries + train_queries > num_docs)
    throw ConfigError("synth: eval_queries + train_queries exceeds num_docs");
}

Json to_json(const SynthSpec& s) {
  return Json{{"num_docs", s.num_docs},
              {"doc_tokens", s.doc_tokens},
              {"num_topics", s.num_topics},
              {"topic_words", s.topic_words},
              {"background_words", s.background_words},
              {"entities_per_doc", s.entities_per_doc},
              {"eval_queries", s.eval_queries},
              {"train_queries", s.train_queries},
              {"train_negatives", s.train_negatives},
              {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const Json& j, const SynthSpec& defaults) {
  if (!j.is_object()) throw ConfigError("synth: expected an object");
  reject_unknown_keys(j,
                      {"num_docs", "doc_tokens", "num_topics", "topic_words", "background_words",
                       "entities_per_doc", "eval_queries", "train_queries", "train_negatives", "seed"},
                      "synth");
  SynthSpec s = defaults;
  read_opt(j, "num_docs", s.num_docs, "synth");
  read_opt(j, "doc_tokens", s.doc_tokens, "synth");
  read_opt(j, "num_topics", s.num_topics, "synth");
  read_opt(j, "topic_words", s.topic_words, "synth");
  read_opt(j, "background_words", s.background_words, "synth");
  read_opt(j, "entities_per_doc", s.entities_per_doc, "synth");
  read_opt(j, "eval_queries", s.eval_queries, "synth");
  read_opt(j, "train_queries", s.train_queries, "synth");
  read_opt(j, "train_negatives", s.train_negatives, "synth");
  read_opt(j, "seed", s.seed, "synth");
  s.validate();
  return s;
}

SynthData gen_synthetic(const SynthSpec& spec) {
  spec.validate();
  PseudoWordGen words(make_rng(spec.seed, "synth.words"));
  Rng rng = make_rng(spec.seed, "synth.docs");
  const auto background = words.batch(spec.background_words, 1, 2);
  std::vector<std::vector<std::string>> topics(spec.num_topics);
  for (auto& t : topics) t = words.batch(spec.topic_words, 2, 3);
  const ZipfSampler bg_zipf(background.size());
  const ZipfSampler topic_zipf(spec.topic_words, 0.7);

  SynthData out;
  std::vector<DocPlan> plans(spec.num_docs);
  std::vector<std::vector<std::size_t>> by_topic(spec.num_topics);
  for (std::size_t i = 0; i < spec.num_docs; ++i) {
    DocPlan& p = plans[i];
    p.topic = i % spec.num_topics;
    by_topic[p.topic].push_back(i);
    p.entities = words.batch(spec.entities_per_doc, 3, 3);

    std::vector<std::string> pieces;
    pieces.reserve(spec.doc_tokens);
    std::size_t sentence_len = 0;
    const std::size_t target_len = 6 + uniform_index(rng, 7);
    std::size_t next_end = target_len;
    while (pieces.size() < spec.doc_tokens) {
      const double u = uniform_open(rng);
      std::string w;
      if (u < 0.15) {
        w = p.entities[uniform_index(rng, p.entities.size())];
      } else if (u < 0.5) {
        w = topics[p.topic][topic_zipf(rng)];
      } else {
        w = background[bg_zipf(rng)];
      }
      ++sentence_len;
      if (sentence_len == next_end || pieces.size() + 1 == spec.doc_tokens) {
        w += ".";
        sentence_len = 0;
        next_end = 6 + uniform_index(rng, 7);
      }
      pieces.push_back(std::move(w));
    }
    // Make sure every entity occurs at least once.
    for (std::size_t e = 0; e < p.entities.size(); ++e) {
      bool present = false;
      for (const auto& w : pieces) present = present || w == p.entities[e] || w == p.entities[e] + ".";
      if (!present) {
        std::size_t slot = uniform_index(rng, pieces.size());
        const bool dot = !pieces[slot].empty() && pieces[slot].back() == '.';
        pieces[slot] = p.entities[e] + (dot ? "." : "");
      }
    }
    std::string text;
    for (std::size_t k = 0; k < pieces.size(); ++k) text += (k ? " " : "") + pieces[k];
    out.corpus.push_back({doc_id(i), std::move(text), "en"});
  }

  // Query targets: a seeded permutation; eval first, then train.
  std::vector<std::size_t> order(spec.num_docs);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng qrng = make_rng(spec.seed, "synth.queries");
  shuffle(order, qrng);
  auto make_query = [&](std::size_t d) {
    const DocPlan& p = plans[d];
    std::vector<std::string> q;
    const std::size_t n_ent = std::min<std::size_t>(2, p.entities.size());
    std::vector<std::string> ents = p.entities;
    shuffle(ents, qrng);
    for (std::size_t e = 0; e < n_ent; ++e) q.push_back(ents[e]);
    for (int t = 0; t < 2; ++t) q.push_back(topics[p.topic][topic_zipf(qrng)]);
    q.push_back(background[bg_zipf(qrng)]);
    shuffle(q, qrng);
    std::string text;
    for (std::size_t k = 0; k < q.size(); ++k) text += (k ? " " : "") + q[k];
    return text;
  };
  for (std::size_t i = 0; i < spec.eval_queries; ++i) {
    const std::size_t d = order[i];
    out.eval_queries.push_back({query_id(i), make_query(d)});
    out.eval_qrels.emplace_back(query_id(i), doc_id(d), 1);
  }
  for (std::size_t i = 0; i < spec.train_queries; ++i) {
    const std::size_t d = order[spec.eval_queries + i];
    objective::TrainingTriplet t;
    t.query = make_query(d);
    t.positive = out.corpus[d].text;
    t.source = objective::Source::kSft;
    const auto& pool = by_topic[plans[d].topic];
    for (std::size_t n = 0; n < spec.train_negatives && pool.size() > 1; ++n) {
      std::size_t pick = d;
      while (pick == d) pick = pool[uniform_index(qrng, pool.size())];
      t.negatives.push_back(out.corpus[pick].text);
    }
    out.train.push_back(std::move(t));
  }
  return out;
}

}  // namespace drama::data
