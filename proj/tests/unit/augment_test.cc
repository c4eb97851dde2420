#include <gtest/gtest.h>

#include <set>

#include "drama/augment/chunk.h"
#include "drama/augment/mining.h"
#include "drama/augment/mix.h"
#include "drama/augment/pipeline.h"
#include "drama/data/synthetic.h"
#include "drama/encoder/tokenizer.h"
#include "drama/eval/lexical.h"
#include "drama/eval/runner.h"
#include "drama/llm/mock.h"
#include "drama/util/error.h"
#include "oracles/search_oracle.h"

namespace drama::augment {
namespace {

std::string words(std::size_t n, const std::string& stem = "w") {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

TEST(Chunk, SixHundredTokens) {
  const auto chunks = chunk_corpus({{"d", words(600), "en"}}, 256);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].token_count, 256u);
  EXPECT_EQ(chunks[1].token_count, 256u);
  EXPECT_EQ(chunks[2].token_count, 88u);
  EXPECT_EQ(chunks[0].id, "d#0");
  EXPECT_EQ(chunks[2].id, "d#2");
}

TEST(Chunk, ShortDocAndEmptyDoc) {
  const auto chunks = chunk_corpus({{"a", words(10), "de"}, {"b", "   ", "en"}}, 256);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].token_count, 10u);
  EXPECT_EQ(chunks[0].lang, "de");
  EXPECT_THROW(chunk_corpus({}, 0), ConfigError);
}

TEST(Chunk, ConcatenationReconstructsPieces) {
  const std::string doc = "  one two\tthree\n four five six seven  eight nine ";
  for (std::size_t max : {1u, 2u, 3u, 4u, 9u, 50u}) {
    std::vector<std::string> joined;
    for (const auto& c : chunk_corpus({{"x", doc, "en"}}, max)) {
      EXPECT_LE(c.token_count, max);
      for (auto& p : encoder::split_pieces(c.text)) joined.push_back(p);
    }
    EXPECT_EQ(joined, encoder::split_pieces(doc));
  }
}

TEST(Crop, Examples) {
  const std::string c = "A. B. C.";
  EXPECT_EQ(crop_query(c, 1, 1), "B.");
  EXPECT_EQ(crop_query(c, 2, 5), "C.");
  EXPECT_EQ(crop_query(c, 0, 2), "A. B.");
  EXPECT_EQ(crop_query("Just one sentence here.", 3, 2), "Just one sentence here.");
  EXPECT_EQ(crop_query("no terminal mark", 0, 1), "no terminal mark");
}

TEST(Crop, SplitRules) {
  EXPECT_EQ(split_sentences("Why? Because! Fine. tail"),
            (std::vector<std::string>{"Why?", "Because!", "Fine.", "tail"}));
  EXPECT_EQ(split_sentences("\xE4\xBD\xA0\xE5\xA5\xBD\xE3\x80\x82 \xE5\x86\x8D\xE8\xA7\x81\xEF\xBC\x81").size(), 2u);
  EXPECT_EQ(split_sentences("e.g.x stays").size(), 1u);
}

TEST(Crop, RandomLengthBetweenOneAndThree) {
  const std::string c = "s1. s2. s3. s4. s5. s6. s7.";
  Rng rng(3);
  std::set<std::size_t> lens;
  for (int i = 0; i < 200; ++i) {
    const auto q = crop_query_random(c, rng);
    const std::size_t n = split_sentences(q).size();
    EXPECT_GE(n, 1u);
    EXPECT_LE(n, 3u);
    EXPECT_NE(c.find(q), std::string::npos);
    lens.insert(n);
  }
  EXPECT_EQ(lens.size(), 3u);
}

struct Corpus200 {
  std::vector<Chunk> chunks;
  std::unique_ptr<eval::LexicalEmbedder> teacher;
  eval::ExactIndex index;
  std::vector<std::pair<std::string, std::vector<double>>> rows;

  Corpus200() {
    data::SynthSpec s;
    s.num_docs = 200;
    s.num_topics = 10;
    s.eval_queries = 0;
    s.train_queries = 0;
    chunks = chunk_corpus(data::gen_synthetic(s).corpus, 256);
    std::vector<std::string> texts;
    for (const auto& c : chunks) texts.push_back(c.text);
    teacher = std::make_unique<eval::LexicalEmbedder>(texts);
    for (const auto& c : chunks) rows.emplace_back(c.id, teacher->embed(c.text));
    index = eval::ExactIndex::build(rows);
  }
};

const Corpus200& corpus200() {
  static const Corpus200 c;
  return c;
}

void verify_ranks(const MinedExample& ex, const Corpus200& c) {
  const auto oracle = oracle::full_sort_search(c.rows, c.teacher->embed(ex.query));
  for (const auto& [id, rank] : ex.retrieval_ranks) {
    ASSERT_LE(rank, oracle.size());
    EXPECT_EQ(oracle[rank - 1].first, id) << "rank " << rank;
  }
  std::set<std::string> pos(ex.positives.begin(), ex.positives.end());
  for (const auto& n : ex.negatives) EXPECT_EQ(pos.count(n), 0u);
}

TEST(Mine, PaperBandsOnSyntheticCorpus) {
  const auto& c = corpus200();
  ASSERT_EQ(c.chunks.size(), 200u);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto& chunk = c.chunks[uniform_index(rng, c.chunks.size())];
    const auto ex = mine_from_index(crop_query_random(chunk.text, rng), c.index, *c.teacher, 50, 10, 20);
    ASSERT_EQ(ex.positives.size(), 10u);
    ASSERT_EQ(ex.negatives.size(), 21u);
    for (std::size_t r = 0; r < 10; ++r) EXPECT_EQ(ex.retrieval_ranks.at(ex.positives[r]), r + 1);
    for (std::size_t r = 0; r < 21; ++r) EXPECT_EQ(ex.retrieval_ranks.at(ex.negatives[r]), 30 + r);
    verify_ranks(ex, c);
  }
}

// Fixed-vector embedder for hand-built corpora.
class TableEmbedder final : public encoder::TextEmbedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> t) : t_(std::move(t)) {}
  std::size_t dim() const override { return t_.begin()->second.size(); }
  encoder::Embedding embed(std::string_view text, bool* truncated) const override {
    if (truncated) *truncated = false;
    return t_.at(std::string(text));
  }

 private:
  std::map<std::string, std::vector<double>> t_;
};

TEST(Mine, FiveDocKnownEmbeddings) {
  std::vector<std::pair<std::string, std::vector<double>>> docs{
      {"a", {1, 0, 0}}, {"b", {0.9, 0.1, 0}}, {"c", {0, 1, 0}}, {"d", {0.5, 0.5, 0}}, {"e", {0, 0, 1}}};
  const auto index = eval::ExactIndex::build(docs);
  TableEmbedder emb({{"q", {1, 0.2, 0}}});
  const auto ex = mine_from_index("q", index, emb, 3, 1, 1);
  const auto oracle = oracle::full_sort_search(docs, {1, 0.2, 0});
  EXPECT_EQ(ex.positives, std::vector<std::string>{oracle[0].first});
  EXPECT_EQ(ex.negatives, (std::vector<std::string>{oracle[1].first, oracle[2].first}));
}

TEST(Mine, QueryEqualToDocumentIsRankOne) {
  const auto& c = corpus200();
  const auto hits = c.index.search_topk(c.teacher->embed(c.chunks[17].text), 5);
  EXPECT_EQ(hits[0].id, c.chunks[17].id);
  EXPECT_NEAR(hits[0].score, 1.0, 1e-12);
}

TEST(Mine, BandErrors) {
  const auto& c = corpus200();
  EXPECT_THROW(mine_from_index("x", c.index, *c.teacher, 50, 30, 20), ConfigError);
  EXPECT_THROW(mine_from_index("x", c.index, *c.teacher, 201, 10, 20), ConfigError);
  EXPECT_THROW(mine_from_index("x", c.index, *c.teacher, 50, 0, 20), ConfigError);
}

TEST(Mine, InsertionOrderInvariant) {
  const auto& c = corpus200();
  auto rev = c.rows;
  std::reverse(rev.begin(), rev.end());
  const auto idx2 = eval::ExactIndex::build(rev);
  const std::string q = crop_query(c.chunks[3].text, 0, 1);
  EXPECT_EQ(mine_from_index(q, c.index, *c.teacher, 50, 10, 20), mine_from_index(q, idx2, *c.teacher, 50, 10, 20));
}

std::vector<eval::Hit> twenty_hits() {
  std::vector<eval::Hit> hits;
  for (int i = 1; i <= 20; ++i) hits.push_back({"c" + std::to_string(100 + i), 1.0 - 0.01 * i});
  return hits;
}

TEST(RerankRefine, IdentityAndReverse) {
  const auto hits = twenty_hits();
  std::vector<std::size_t> id(20);
  for (std::size_t i = 0; i < 20; ++i) id[i] = i + 1;
  auto ex = rerank_refine("q", hits, id, 10);
  EXPECT_EQ(ex.positives, std::vector<std::string>{"c101"});
  ASSERT_EQ(ex.negatives.size(), 11u);
  EXPECT_EQ(ex.negatives.front(), "c110");
  EXPECT_EQ(ex.negatives.back(), "c120");

  std::vector<std::size_t> rev(id.rbegin(), id.rend());
  ex = rerank_refine("q", hits, rev, 10);
  EXPECT_EQ(ex.positives, std::vector<std::string>{"c120"});
  EXPECT_EQ(ex.retrieval_ranks.at("c120"), 20u);
  EXPECT_EQ(ex.reranked_ranks.at("c120"), 1u);
  EXPECT_EQ(ex.negatives.size(), 11u);
  EXPECT_EQ(ex.negatives.front(), "c111");
}

TEST(RerankRefine, InvalidPermutationRejected) {
  const auto hits = twenty_hits();
  std::vector<std::size_t> bad(20, 1);
  EXPECT_THROW(rerank_refine("q", hits, bad, 10), ConfigError);
}

llm::Client mock_client(llm::MockFaults faults = {}) {
  return llm::Client({}, llm::TemplateSet::load(llm::TemplateSet::default_dir()),
                     std::make_shared<llm::MockBackend>(faults));
}

TEST(Synthetic, DeterministicWithOnePositiveOneNegative) {
  const auto client = mock_client();
  const auto a = gen_synthetic_triplet(42, client);
  const auto b = gen_synthetic_triplet(42, client);
  ASSERT_TRUE(a.triplet);
  EXPECT_EQ(*a.triplet, *b.triplet);
  EXPECT_EQ(a.triplet->negatives.size(), 1u);
  EXPECT_FALSE(a.triplet->positive.empty());
  EXPECT_EQ(a.triplet->source, objective::Source::kTriplet);
  a.triplet->validate();
  EXPECT_NE(gen_synthetic_triplet(43, client).triplet->query, a.triplet->query);
}

TEST(Synthetic, MalformedRepliesAreDropped) {
  const auto client = mock_client({.malformed = true});
  auto backend = std::make_shared<llm::MockBackend>(llm::MockFaults{.malformed = true});
  const llm::Client counted({}, llm::TemplateSet::load(llm::TemplateSet::default_dir()), backend);
  const auto r = gen_synthetic_triplet(1, counted);
  EXPECT_FALSE(r.triplet);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(backend->calls(), 2u);  // one retry
  AugmentConfig cfg;
  cfg.num_queries = 3;
  const auto out = run_triplet(client, cfg);
  EXPECT_EQ(out.dropped, 3u);
  EXPECT_TRUE(out.triplets.empty());
  EXPECT_EQ(out.failures.size(), 3u);
}

objective::TrainingTriplet tagged(const std::string& q) {
  objective::TrainingTriplet t;
  t.query = q;
  t.positive = q + " pos";
  t.negatives = {q + " neg"};
  return t;
}

std::vector<objective::TrainingTriplet> shard(const std::string& tag, std::size_t n) {
  std::vector<objective::TrainingTriplet> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(tagged(tag + std::to_string(i)));
  return out;
}

TEST(Mix, TwoOneOne) {
  MixSpec spec{{{"a", 2}, {"b", 1}, {"c", 1}}, 8, 0};
  const auto r = mix_sources({{"a", shard("a", 10)}, {"b", shard("b", 10)}, {"c", shard("c", 10)}}, spec);
  EXPECT_EQ(r.counts, (std::map<std::string, std::size_t>{{"a", 4}, {"b", 2}, {"c", 2}}));
  EXPECT_EQ(r.triplets.size(), 8u);
  std::set<std::string> qs;
  for (const auto& t : r.triplets) qs.insert(t.query);
  EXPECT_EQ(qs.size(), 8u);
}

TEST(Mix, LargestRemainder) {
  MixSpec spec{{{"a", 1}, {"b", 1}, {"c", 1}}, 10, 0};
  const auto q = mix_quotas(spec, {{"a", 99}, {"b", 99}, {"c", 99}});
  EXPECT_EQ(q, (std::map<std::string, std::size_t>{{"a", 4}, {"b", 3}, {"c", 3}}));
}

TEST(Mix, SingleSourceIsShuffledCopy) {
  MixSpec spec{{{"only", 1}}, 6, 5};
  const auto src = shard("x", 6);
  const auto r = mix_sources({{"only", src}}, spec);
  auto a = r.triplets;
  auto key = [](const auto& x, const auto& y) { return x.query < y.query; };
  std::sort(a.begin(), a.end(), key);
  auto b = src;
  std::sort(b.begin(), b.end(), key);
  EXPECT_EQ(a, b);
  EXPECT_NE(r.triplets, src);
}

TEST(Mix, ShortfallRedistributed) {
  MixSpec spec{{{"a", 2}, {"b", 1}, {"c", 1}}, 8, 0};
  std::vector<std::string> log;
  const auto q = mix_quotas(spec, {{"a", 1}, {"b", 10}, {"c", 10}}, &log);
  EXPECT_EQ(q, (std::map<std::string, std::size_t>{{"a", 1}, {"b", 4}, {"c", 3}}));
  EXPECT_FALSE(log.empty());
  const auto all_short = mix_quotas(spec, {{"a", 1}, {"b", 1}, {"c", 1}}, &log);
  EXPECT_EQ(all_short, (std::map<std::string, std::size_t>{{"a", 1}, {"b", 1}, {"c", 1}}));
}

TEST(Mix, DeterministicAndValidated) {
  MixSpec spec{{{"a", 2}, {"b", 1}}, 9, 3};
  const std::map<std::string, std::vector<objective::TrainingTriplet>> shards{{"a", shard("a", 20)},
                                                                             {"b", shard("b", 20)}};
  EXPECT_EQ(mix_sources(shards, spec).triplets, mix_sources(shards, spec).triplets);
  EXPECT_THROW(mix_sources({{"a", shard("a", 3)}}, spec), ConfigError);
  EXPECT_THROW((MixSpec{{{"a", 0}}, 1, 0}).validate(), ConfigError);
  EXPECT_THROW(mix_spec_from_json(Json{{"ratios", {{"a", 1}}}, {"total", 2}, {"weird", 1}}), ConfigError);
}

TEST(Pipelines, SentMinesAndIsDeterministic) {
  const auto& c = corpus200();
  AugmentConfig cfg;
  cfg.num_queries = 15;
  cfg.seed = 4;
  const auto a = run_sent(c.chunks, c.index, *c.teacher, cfg);
  const auto b = run_sent(c.chunks, c.index, *c.teacher, cfg);
  ASSERT_EQ(a.examples.size(), 15u);
  EXPECT_EQ(a.examples, b.examples);
  EXPECT_EQ(a.triplets, b.triplets);
  for (const auto& ex : a.examples) {
    EXPECT_EQ(ex.positives.size(), 10u);
    EXPECT_EQ(ex.negatives.size(), 21u);
    verify_ranks(ex, c);
  }
  EXPECT_GE(a.triplets.size(), 140u);
  for (const auto& t : a.triplets) t.validate();
}

TEST(Pipelines, QgenAndRerankWithMock) {
  const auto& c = corpus200();
  const auto client = mock_client();
  AugmentConfig cfg;
  cfg.num_queries = 10;
  const auto q = run_qgen(c.chunks, c.index, *c.teacher, client, cfg);
  EXPECT_EQ(q.examples.size(), 10u);
  for (const auto& ex : q.examples) {
    EXPECT_EQ(ex.kind, QueryKind::kGenerated);
    verify_ranks(ex, c);
  }
  const auto r1 = run_rerank(c.chunks, c.index, *c.teacher, client, cfg);
  const auto r2 = run_rerank(c.chunks, c.index, *c.teacher, client, cfg);
  EXPECT_EQ(r1.triplets, r2.triplets);
  ASSERT_EQ(r1.examples.size(), 10u);
  for (const auto& ex : r1.examples) {
    EXPECT_EQ(ex.positives.size(), 1u);
    EXPECT_EQ(ex.negatives.size(), 11u);
    verify_ranks(ex, c);
  }
}

TEST(Pipelines, ClientFailuresLogged) {
  const auto& c = corpus200();
  llm::ClientConfig cc;
  cc.max_retries = 0;
  const llm::Client client(cc, llm::TemplateSet::load(llm::TemplateSet::default_dir()),
                           std::make_shared<llm::MockBackend>(llm::MockFaults{.transient_failures = 1000}));
  AugmentConfig cfg;
  cfg.num_queries = 4;
  const auto q = run_qgen(c.chunks, c.index, *c.teacher, client, cfg);
  EXPECT_TRUE(q.examples.empty());
  EXPECT_EQ(q.dropped, 4u);
  EXPECT_EQ(q.failures.size(), 4u);
}

}  // namespace
}  // namespace drama::augment
