// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// nonzero if any criterion fails. `--only 2,3` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "drama/augment/chunk.h"
#include "drama/augment/mining.h"
#include "drama/augment/mix.h"
#include "drama/augment/pipeline.h"
#include "drama/data/synthetic.h"
#include "drama/encoder/embedder.h"
#include "drama/encoder/model.h"
#include "drama/encoder/parameters.h"
#include "drama/eval/lexical.h"
#include "drama/eval/metrics.h"
#include "drama/eval/needle.h"
#include "drama/eval/runner.h"
#include "drama/llm/client.h"
#include "drama/llm/template.h"
#include "drama/objective/loss.h"
#include "drama/objective/trainer.h"
#include "drama/pruning/pruner.h"
#include "drama/util/hash.h"
#include "drama/util/parallel.h"
#include "drama/util/rng.h"
#include "gradcheck_suite.h"
#include "oracles/infonce_oracle.h"
#include "oracles/ndcg_oracle.h"
#include "oracles/search_oracle.h"

namespace fs = std::filesystem;
using namespace drama;
using encoder::EncoderConfig;
using encoder::ParameterSet;
using encoder::TokenSequence;
using numerics::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::string join_values(const std::vector<double>& v, const char* fmt_spec = "{:.4f}") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "/" : "") + fmt::format(fmt::runtime(fmt_spec), v[i]);
  return s;
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness

Outcome criterion1() {
  constexpr double kTol = 1e-5;
  constexpr double kBudgetS = 60.0;
  const auto t0 = std::chrono::steady_clock::now();
  cli::GradCheckOptions opt;
  opt.points = 3;
  opt.coords = 120;
  opt.seed = 2024;
  const auto s = cli::run_gradcheck_suite(encoder::desk_config(), opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::map<std::string, double> worst;
  for (const auto& c : s.cases) worst[c.target] = std::max(worst[c.target], c.max_rel_error);
  std::string d;
  for (const auto& [t, e] : worst) d += fmt::format("{} {:.2e}, ", t, e);
  d += fmt::format("{} points each, {:.1f}s (tol {:.0e}, budget {:.0f}s)", opt.points, secs, kTol, kBudgetS);
  return {s.max_rel_error <= kTol && secs < kBudgetS, d};
}

// ---------------------------------------------------------------------------
// 2. Contrastive loss against enumeration

Outcome criterion2() {
  constexpr double kTol = 1e-10;
  Rng rng = make_rng(2, "acceptance.loss");
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t B = 1 + uniform_index(rng, 8), N = uniform_index(rng, 8), d = 2 + uniform_index(rng, 15);
    const double tau = 0.02 + 0.98 * uniform_open(rng);
    Tensor q({B, d}), c({B * (1 + N), d});
    for (double& x : q.data()) x = normal(rng);
    for (double& x : c.data()) x = normal(rng);
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < B; ++i) pos.push_back(i * (1 + N));
    numerics::Tape tape(false);
    objective::Batch b{tape.constant(q), tape.constant(c), pos, 0};
    objective::LossConfig cfg;
    cfg.temperature = tau;
    cfg.num_hard_negatives = N;
    const double got = objective::batch_loss(b, cfg).item();
    worst = std::max(worst, std::abs(got - oracle::enumerate_batch_loss(q, c, pos, tau)));
  }
  return {worst <= kTol, fmt::format("50 batches, max |diff| {:.2e} (tol {:.0e})", worst, kTol)};
}

// ---------------------------------------------------------------------------
// 3. nDCG against brute force

Outcome criterion3() {
  constexpr double kTol = 1e-12;
  Rng rng = make_rng(3, "acceptance.ndcg");
  double worst = 0.0;
  std::size_t scored = 0, agree_unscorable = 0, disagree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t pool = 3 + uniform_index(rng, 12);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pool; ++i) ids.push_back("d" + std::to_string(i));
    std::map<std::string, int> grades;
    const std::size_t judged = uniform_index(rng, 8);
    for (std::size_t i = 0; i < judged; ++i) grades[ids[uniform_index(rng, pool)]] = static_cast<int>(uniform_index(rng, 4));
    shuffle(ids, rng);
    ids.resize(1 + uniform_index(rng, pool));
    const std::size_t k = 1 + uniform_index(rng, 12);
    eval::Run run;
    run["q"] = eval::RankedList{ids, std::vector<double>(ids.size(), 0.0)};
    eval::Qrels qrels;
    qrels["q"] = grades;
    const auto res = eval::ndcg_at_k(run, qrels, k);
    const double want = oracle::brute_ndcg(ids, grades, k);
    auto it = res.per_query.find("q");
    if (want < 0) {
      (it == res.per_query.end() ? agree_unscorable : disagree)++;
      continue;
    }
    if (it == res.per_query.end()) {
      ++disagree;
      continue;
    }
    ++scored;
    worst = std::max(worst, std::abs(it->second - want));
  }
  // Closed forms: one relevant document at rank 1, then at rank 2.
  eval::Qrels one{{"q", {{"a", 1}}}};
  const double at1 = eval::ndcg_at_k({{"q", {{"a", "b"}, {2, 1}}}}, one).mean;
  const double at2 = eval::ndcg_at_k({{"q", {{"b", "a"}, {2, 1}}}}, one).mean;
  const double inv_log3 = 1.0 / std::log2(3.0);
  const bool closed = std::abs(at1 - 1.0) <= kTol && std::abs(at2 - inv_log3) <= kTol;
  return {worst <= kTol && disagree == 0 && closed,
          fmt::format("1000 instances ({} scored, {} unscorable agree, {} disagree), max |diff| {:.2e}; "
                      "closed forms {:.5f} and {:.5f} (tol {:.0e})",
                      scored, agree_unscorable, disagree, worst, at1, at2, kTol)};
}

// ---------------------------------------------------------------------------
// 4. Pruning constraints, snap, and mask-zero equivalence

std::vector<TokenSequence> prune_corpus(std::uint64_t seed, const EncoderConfig& c) {
  Rng rng = make_rng(seed, "acceptance.prune_corpus");
  std::vector<TokenSequence> corpus;
  for (int i = 0; i < 64; ++i) {
    TokenSequence s;
    const std::size_t base = 2 + uniform_index(rng, 100);
    for (std::size_t t = 0; t < 24; ++t) {
      s.ids.push_back(static_cast<std::int32_t>(2 + (base + t * 3 + uniform_index(rng, 3)) % (c.vocab_size - 2)));
      s.mask.push_back(1);
    }
    corpus.push_back(std::move(s));
  }
  return corpus;
}

pruning::MaskSet binarize(const EncoderConfig& c, const pruning::SnapResult& snap) {
  pruning::MaskSet m = pruning::MaskSet::init(c, -20.0, {});
  for (std::size_t j = 0; j < snap.kept_layers.size(); ++j) {
    const std::size_t l = snap.kept_layers[j];
    m.layer.log_alpha[l] = 20.0;
    for (std::size_t h : snap.kept_heads[j]) m.head[l].log_alpha[h] = 20.0;
    for (std::size_t i : snap.kept_intermediate[j]) m.intermediate[l].log_alpha[i] = 20.0;
  }
  for (std::size_t h : snap.kept_hidden) m.hidden.log_alpha[h] = 20.0;
  return m;
}

double mask_vs_physical(const EncoderConfig& c, const ParameterSet& params, const pruning::MaskSet& masks,
                        const pruning::PruneTarget& target) {
  const auto snapped = pruning::snap_architecture(c, params, masks, target);
  const TokenSequence seq{{3, 9, 17, 5, 30, 44, 0}, {1, 1, 1, 1, 1, 1, 0}};
  numerics::Tape tape(false);
  encoder::BoundParameters b(tape, params, false);
  encoder::StructureMasks sm;
  for (const auto& h : masks.head) sm.head.push_back(tape.constant(pruning::mask_deterministic(h)));
  for (const auto& i : masks.intermediate) sm.intermediate.push_back(tape.constant(pruning::mask_deterministic(i)));
  sm.layer = tape.constant(pruning::mask_deterministic(masks.layer));
  sm.hidden = tape.constant(pruning::mask_deterministic(masks.hidden));
  const Tensor masked = encoder::forward_states(c, b, seq, &sm).value();
  encoder::BoundParameters bs(tape, snapped.params, false);
  const Tensor physical = encoder::forward_states(snapped.config, bs, seq).value();
  const std::size_t d = snapped.config.hidden_dim;
  double worst = 0.0;
  for (std::size_t r = 0; r < seq.size(); ++r)
    for (std::size_t k = 0; k < d; ++k)
      worst = std::max(worst, std::abs(masked[r * c.hidden_dim + snapped.kept_hidden[k]] - physical[r * d + k]));
  return worst;
}

Outcome criterion4() {
  constexpr double kSumTol = 0.5;
  constexpr double kEquivTol = 1e-12;
  constexpr double kBudgetS = 300.0;
  const auto t0 = std::chrono::steady_clock::now();
  const EncoderConfig c = encoder::desk_config();
  pruning::PruneConfig pc;
  pc.target = {2, 32, 3, 128};
  int within = 0;
  bool snap_ok = true;
  double equiv = 0.0, worst_gap = 0.0;
  std::vector<double> seed_gaps;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto corpus = prune_corpus(seed, c);
    pruning::PruneState st = pruning::PruneState::init(c, encoder::init_parameters(c, seed), pc);
    Rng rng = make_rng(seed, "acceptance.prune");
    for (std::size_t step = 0; step < 500; ++step) {
      std::vector<TokenSequence> batch;
      for (std::size_t i = 0; i < 4; ++i) batch.push_back(corpus[(step * 4 + i) % corpus.size()]);
      pruning::prune_step(st, batch, pc.target, pruning::rates_at(pc, step), rng);
    }
    const auto sums = pruning::deterministic_sums(st.masks);
    double gap = std::abs(sums.layer - pc.target.num_layers);
    gap = std::max(gap, std::abs(sums.hidden - pc.target.hidden_dim));
    for (double h : sums.head) gap = std::max(gap, std::abs(h - pc.target.heads_per_layer));
    for (double i : sums.intermediate) gap = std::max(gap, std::abs(i - pc.target.intermediate_dim));
    seed_gaps.push_back(gap);
    worst_gap = std::max(worst_gap, gap);
    if (gap <= kSumTol) ++within;

    const auto snap = pruning::snap_architecture(c, st.params, st.masks, pc.target);
    snap_ok = snap_ok && snap.config.num_heads == pc.target.heads_per_layer &&
              snap.config.hidden_dim == pc.target.hidden_dim && snap.config.num_layers == pc.target.num_layers &&
              snap.config.intermediate_dim == pc.target.intermediate_dim;
    equiv = std::max(equiv, mask_vs_physical(c, st.params, binarize(c, snap), pc.target));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {within >= 2 && snap_ok && equiv <= kEquivTol && secs < kBudgetS,
          fmt::format("{}/3 seeds within {} (max gap per seed {}), snap config {}, mask-zero vs removal {:.2e} "
                      "(tol {:.0e}), {:.0f}s (budget {:.0f}s)",
                      within, kSumTol, join_values(seed_gaps, "{:.3f}"), snap_ok ? "equals target" : "MISMATCH",
                      equiv, kEquivTol, secs, kBudgetS)};
}

// ---------------------------------------------------------------------------
// 5. Augmentation bands, rank verification, determinism

std::string serialize(const augment::AugmentOutput& o) {
  std::string s;
  for (const auto& t : o.triplets) s += canonical_dump(objective::to_json(t)) + "\n";
  for (const auto& f : o.failures) s += canonical_dump(augment::to_json(f)) + "\n";
  return s;
}

Outcome criterion5() {
  data::SynthSpec sp;
  sp.num_docs = 200;
  sp.eval_queries = 20;
  sp.train_queries = 20;
  sp.seed = 5;
  const auto sd = data::gen_synthetic(sp);
  const auto chunks = augment::chunk_corpus(sd.corpus, 256);
  const auto docs = augment::to_documents(chunks);
  std::vector<std::string> texts;
  for (const auto& d : docs) texts.push_back(d.text);
  const eval::LexicalEmbedder teacher(texts);
  const eval::ExactIndex index = eval::build_index(teacher, docs);
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (const auto& d : docs) rows.emplace_back(d.id, teacher.embed(d.text));

  augment::AugmentConfig ac;
  ac.k = 50;
  ac.m = 10;
  ac.n = 20;
  ac.rerank_k = 20;
  ac.rerank_n = 10;
  ac.seed = 55;
  const auto client =
      llm::Client::from_config(llm::ClientConfig{}, llm::TemplateSet::load(llm::TemplateSet::default_dir()));

  set_max_threads(1);
  const auto sent = augment::run_sent(chunks, index, teacher, ac);
  const auto qgen = augment::run_qgen(chunks, index, teacher, client, ac);
  const auto rerank = augment::run_rerank(chunks, index, teacher, client, ac);
  ac.num_queries = 20;
  const auto trip = augment::run_triplet(client, ac);

  std::size_t mined = 0, band_bad = 0, rank_bad = 0;
  for (const auto* out : {&sent, &qgen}) {
    for (const auto& ex : out->examples) {
      ++mined;
      if (ex.positives.size() != 10 || ex.negatives.size() != 21) ++band_bad;
      const auto fresh = oracle::full_sort_search(rows, teacher.embed(ex.query));
      std::map<std::string, std::size_t> rank;
      for (std::size_t r = 0; r < fresh.size(); ++r) rank[fresh[r].first] = r + 1;
      bool ok = true;
      for (std::size_t i = 0; i < ex.positives.size(); ++i)
        ok = ok && rank.at(ex.positives[i]) == i + 1 && ex.retrieval_ranks.at(ex.positives[i]) == i + 1;
      for (std::size_t i = 0; i < ex.negatives.size(); ++i)
        ok = ok && rank.at(ex.negatives[i]) == 30 + i && ex.retrieval_ranks.at(ex.negatives[i]) == 30 + i;
      if (!ok) ++rank_bad;
    }
  }
  std::size_t rr_bad = 0;
  for (const auto& ex : rerank.examples) {
    bool ok = ex.negatives.size() == 11 && ex.positives.size() == 1 && ex.reranked_ranks.at(ex.positives[0]) == 1;
    for (std::size_t i = 0; ok && i < ex.negatives.size(); ++i) ok = ex.reranked_ranks.at(ex.negatives[i]) == 10 + i;
    if (!ok) ++rr_bad;
  }

  // Re-run under the same seed, and again with four workers.
  bool det = true;
  for (std::size_t threads : {1, 4}) {
    set_max_threads(threads);
    ac.num_queries = 0;
    det = det && serialize(augment::run_sent(chunks, index, teacher, ac)) == serialize(sent);
    det = det && serialize(augment::run_qgen(chunks, index, teacher, client, ac)) == serialize(qgen);
    det = det && serialize(augment::run_rerank(chunks, index, teacher, client, ac)) == serialize(rerank);
    ac.num_queries = 20;
    det = det && serialize(augment::run_triplet(client, ac)) == serialize(trip);
  }
  set_max_threads(1);
  const bool counts = sent.examples.size() == chunks.size() && qgen.examples.size() == chunks.size() &&
                      rerank.examples.size() == chunks.size() && !trip.triplets.empty();
  return {chunks.size() == 200 && counts && band_bad == 0 && rank_bad == 0 && rr_bad == 0 && det,
          fmt::format("{} chunks; {} mined examples, {} with wrong band sizes, {} failing rank check; {} rerank "
                      "examples, {} without 11 negatives; {} synthetic triplets; byte-deterministic: {}",
                      chunks.size(), mined, band_bad, rank_bad, rerank.examples.size(), rr_bad,
                      trip.triplets.size(), det ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------
// 6-8. Desk-scale directional runs on a 2k-chunk synthetic corpus

struct DirectionalSetup {
  static constexpr std::size_t kSteps = 300;
  static constexpr std::size_t kBatch = 8;
  static constexpr std::size_t kNegatives = 3;
  static constexpr double kLr = 3e-3;
  static constexpr std::size_t kAugQueries = 400;
};

struct DirectionalResults {
  std::vector<double> sft, augmented, unidirectional, augmented_quarter;
  bool mrl_bitwise = false;
  std::size_t chunks = 0, queries = 0;
  double secs = 0.0;
};

EncoderConfig directional_encoder(encoder::AttentionMode mode) {
  EncoderConfig c;
  c.num_layers = 2;
  c.hidden_dim = 32;
  c.num_heads = 4;
  c.head_dim = 8;
  c.intermediate_dim = 64;
  c.vocab_size = 2048;
  c.max_positions = 128;
  c.attention_mode = mode;
  c.pooling = encoder::Pooling::kMean;
  return c;
}

const DirectionalResults& directional() {
  static std::optional<DirectionalResults> cache;
  if (cache) return *cache;
  DirectionalResults r;
  const auto t0 = std::chrono::steady_clock::now();
  data::SynthSpec sp;
  sp.num_docs = 2000;
  sp.eval_queries = 200;
  sp.seed = 42;
  const auto sd = data::gen_synthetic(sp);
  const auto chunks = augment::chunk_corpus(sd.corpus, 256);
  const auto docs = augment::to_documents(chunks);
  r.chunks = chunks.size();
  r.queries = sd.eval_queries.size();
  std::vector<std::string> texts;
  for (const auto& d : docs) texts.push_back(d.text);
  const eval::LexicalEmbedder teacher(texts);
  const eval::ExactIndex index = eval::build_index(teacher, docs);
  eval::Qrels qrels;
  for (const auto& [q, d, g] : sd.eval_qrels) qrels[q][d] = g;

  augment::AugmentConfig ac;
  ac.num_queries = DirectionalSetup::kAugQueries;
  ac.seed = 7;
  const auto client =
      llm::Client::from_config(llm::ClientConfig{}, llm::TemplateSet::load(llm::TemplateSet::default_dir()));
  const auto sent = augment::run_sent(chunks, index, teacher, ac);
  const auto qgen = augment::run_qgen(chunks, index, teacher, client, ac);
  const auto rerank = augment::run_rerank(chunks, index, teacher, client, ac);
  augment::MixSpec ms;
  ms.ratios = {{"sft", 1}, {"sent", 1}, {"qgen", 1}, {"rerank", 1}};
  ms.total = 4 * sd.train.size();
  ms.seed = 1;
  const auto mixed = augment::mix_sources(
                         {{"sft", sd.train}, {"sent", sent.triplets}, {"qgen", qgen.triplets}, {"rerank", rerank.triplets}},
                         ms)
                         .triplets;

  // One vocabulary for every run, built from the corpus and all training text.
  std::vector<std::string> vt = texts;
  for (const auto* set : {&sd.train, &mixed})
    for (const auto& t : *set) {
      vt.push_back(t.query);
      vt.push_back(t.positive);
      for (const auto& n : t.negatives) vt.push_back(n);
    }
  const auto tok = std::make_shared<encoder::WordTokenizer>(2048, encoder::WordTokenizer::build_vocab(vt, 1000));

  auto train_eval = [&](const std::vector<objective::TrainingTriplet>& data, encoder::AttentionMode mode,
                        std::uint64_t seed, double* quarter) {
    const EncoderConfig c = directional_encoder(mode);
    ParameterSet p = encoder::init_parameters(c, 100 + seed);
    objective::TrainConfig tc;
    tc.steps = DirectionalSetup::kSteps;
    tc.batch_size = DirectionalSetup::kBatch;
    tc.lr = DirectionalSetup::kLr;
    tc.seed = seed;
    tc.loss.num_hard_negatives = DirectionalSetup::kNegatives;
    tc.loss.mrl_dims = {c.hidden_dim / 4, c.hidden_dim};
    objective::Adam opt(p);
    objective::train_retriever(c, p, *tok, data, tc, opt);
    if (quarter) {
      const encoder::EncoderEmbedder q(c, p, tok, c.hidden_dim / 4);
      *quarter = eval::run_eval(q, sd.corpus, sd.eval_queries, qrels).ndcg.mean;
    }
    const encoder::EncoderEmbedder e(c, std::move(p), tok);
    return eval::run_eval(e, sd.corpus, sd.eval_queries, qrels).ndcg.mean;
  };

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    double quarter = 0.0;
    r.sft.push_back(train_eval(sd.train, encoder::AttentionMode::kBidirectional, seed, nullptr));
    r.augmented.push_back(train_eval(mixed, encoder::AttentionMode::kBidirectional, seed, &quarter));
    r.augmented_quarter.push_back(quarter);
    r.unidirectional.push_back(train_eval(mixed, encoder::AttentionMode::kUnidirectional, seed, nullptr));
    std::cerr << fmt::format("  directional seed {}: sft {:.4f} aug {:.4f} (dim/4 {:.4f}) uni {:.4f}\n", seed,
                             r.sft.back(), r.augmented.back(), quarter, r.unidirectional.back());
  }

  // mrl_loss with only the full width is the plain batch loss, bit for bit.
  Rng rng = make_rng(8, "acceptance.mrl");
  bool bitwise = true;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t B = 1 + uniform_index(rng, 8), N = uniform_index(rng, 8), d = 4 + uniform_index(rng, 29);
    Tensor q({B, d}), c({B * (1 + N), d});
    for (double& x : q.data()) x = normal(rng);
    for (double& x : c.data()) x = normal(rng);
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < B; ++i) pos.push_back(i * (1 + N));
    numerics::Tape tape(false);
    objective::Batch b{tape.constant(q), tape.constant(c), pos, 0};
    objective::LossConfig plain, full;
    full.mrl_dims = {d};
    const double x = objective::batch_loss(b, plain).item(), y = objective::mrl_loss(b, full).item();
    bitwise = bitwise && std::memcmp(&x, &y, sizeof x) == 0;
  }
  r.mrl_bitwise = bitwise;
  r.secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  cache = std::move(r);
  return *cache;
}

Outcome criterion6() {
  constexpr double kBudgetS = 1800.0;
  const auto& r = directional();
  const double a = median3(r.augmented), s = median3(r.sft);
  return {r.chunks == 2000 && r.queries == 200 && a > s && r.secs < kBudgetS,
          fmt::format("median nDCG@10 SFT+Sent+QGen+Rerank {:.4f} vs SFT-only {:.4f} (seeds {} vs {}); {} chunks, "
                      "{} queries, {:.0f}s (budget {:.0f}s)",
                      a, s, join_values(r.augmented), join_values(r.sft), r.chunks, r.queries, r.secs, kBudgetS)};
}

Outcome criterion7() {
  const auto& r = directional();
  const double b = median3(r.augmented), u = median3(r.unidirectional);
  return {b >= u, fmt::format("median nDCG@10 bidirectional+mean {:.4f} vs unidirectional+mean {:.4f} (seeds {} vs {})",
                              b, u, join_values(r.augmented), join_values(r.unidirectional))};
}

Outcome criterion8() {
  const auto& r = directional();
  const double full = median3(r.augmented), quarter = median3(r.augmented_quarter);
  return {full >= quarter && r.mrl_bitwise,
          fmt::format("median nDCG@10 at full dim {:.4f} vs dim/4 {:.4f} (seeds {} vs {}); mrl_loss(full) == "
                      "batch_loss bitwise: {}",
                      full, quarter, join_values(r.augmented), join_values(r.augmented_quarter),
                      r.mrl_bitwise ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------
// 9. Needle harness

void needle_train_and_eval(std::uint64_t seed, std::map<std::size_t, double>& by_length) {
  eval::NeedleTaskSpec tr;
  tr.lengths = {64};
  tr.tasks_per_length = 400;
  tr.distractors = 3;
  tr.seed = 1000 + seed;
  const auto ts = eval::gen_needle_corpus(tr)[0];
  std::vector<objective::TrainingTriplet> trips;
  std::vector<std::string> texts;
  for (const auto& d : ts.corpus) texts.push_back(d.text);
  const std::size_t per_task = tr.distractors + 1;
  for (std::size_t t = 0; t < ts.queries.size(); ++t) {
    objective::TrainingTriplet x;
    x.query = ts.queries[t].text;
    const auto& rel = ts.qrels.at(ts.queries[t].id);
    for (std::size_t j = 0; j < per_task; ++j) {
      const auto& d = ts.corpus[t * per_task + j];
      if (rel.count(d.id)) x.positive = d.text;
      else x.negatives.push_back(d.text);
    }
    trips.push_back(std::move(x));
  }
  EncoderConfig c;
  c.num_layers = 2;
  c.hidden_dim = 32;
  c.num_heads = 4;
  c.head_dim = 8;
  c.intermediate_dim = 64;
  c.vocab_size = 1024;
  c.max_positions = 256;
  ParameterSet p = encoder::init_parameters(c, seed);
  const auto tok = std::make_shared<encoder::WordTokenizer>(1024, encoder::WordTokenizer::build_vocab(texts, 500));
  objective::TrainConfig tc;
  tc.steps = 200;
  tc.batch_size = 8;
  tc.lr = 3e-3;
  tc.seed = seed;
  tc.loss.num_hard_negatives = 3;
  objective::Adam opt(p);
  objective::train_retriever(c, p, *tok, trips, tc, opt);
  const encoder::EncoderEmbedder emb(c, std::move(p), tok);
  eval::NeedleTaskSpec s;
  s.seed = seed;
  const auto rep = eval::run_needle_eval(emb, eval::gen_needle_corpus(s));
  for (const auto& [len, r] : rep.per_length) by_length[len] = r.ndcg.mean;
}

Outcome criterion9() {
  eval::NeedleTaskSpec spec;
  spec.seed = 9;
  const auto sets = eval::gen_needle_corpus(spec);
  std::vector<std::string> all;
  for (const auto& s : sets)
    for (const auto& d : s.corpus) all.push_back(d.text);
  const eval::LexicalEmbedder lex(all);
  const auto lex_rep = eval::run_needle_eval(lex, sets);
  bool oracle_ok = lex_rep.per_length.size() == 3;
  std::string oracle_detail;
  for (const auto& [len, r] : lex_rep.per_length) {
    oracle_ok = oracle_ok && r.ndcg.mean == 1.0;
    oracle_detail += fmt::format("{}:{:.3f} ", len, r.ndcg.mean);
  }
  std::vector<double> at256, at512, at1024;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::map<std::size_t, double> by;
    needle_train_and_eval(seed, by);
    at256.push_back(by.at(256));
    at512.push_back(by.at(512));
    at1024.push_back(by.at(1024));
  }
  const double m256 = median3(at256), m1024 = median3(at1024);
  return {oracle_ok && m1024 < m256,
          fmt::format("lexical oracle {}; toy encoder (max_positions 256) median nDCG@10 at 256/512/1024 = "
                      "{:.4f}/{:.4f}/{:.4f} (seeds 256: {}, 1024: {})",
                      oracle_detail, m256, median3(at512), m1024, join_values(at256), join_values(at1024))};
}

// ---------------------------------------------------------------------------
// 10. CLI determinism

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / "drama_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  write_text_file(root / "cfg.json", R"({
  "seed": 10,
  "synth": {"num_docs": 150, "eval_queries": 20, "train_queries": 40},
  "encoder": {"num_layers": 2, "hidden_dim": 32, "num_heads": 4, "intermediate_dim": 64, "vocab_size": 1024},
  "train": {"steps": 20, "batch_size": 4, "lr": 0.003},
  "loss": {"num_hard_negatives": 3, "mrl_dims": [8, 32]},
  "augment": {"num_queries": 15},
  "mix": {"ratios": {"sft": 2, "sent": 1, "qgen": 1, "rerank": 1}, "total": 60},
  "prune": {"target": {"heads_per_layer": 2, "hidden_dim": 16, "num_layers": 1, "intermediate_dim": 32},
            "prune_steps": 10, "pretrain_steps": 5},
  "needle": {"tasks_per_length": 2, "distractors": 9}
})");
  const std::string d = "'" DRAMA_CLI_PATH "' ";
  const std::string c = " -c ../cfg.json --log-level error";
  const std::vector<std::string> steps = {
      "synth" + c + " --out-dir data",
      "chunk" + c + " --corpus data/corpus.jsonl -o data/chunks.jsonl",
      "augment" + c + " --mode sent --chunks data/chunks.jsonl -o aug/sent.jsonl",
      "augment" + c + " --mode qgen --chunks data/chunks.jsonl -o aug/qgen.jsonl",
      "augment" + c + " --mode rerank --chunks data/chunks.jsonl -o aug/rerank.jsonl",
      "augment" + c + " --mode triplet -o aug/triplet.jsonl",
      "mix" + c + " --shard sft=data/train.jsonl --shard sent=aug/sent.jsonl --shard qgen=aug/qgen.jsonl"
          " --shard rerank=aug/rerank.jsonl -o mixed.jsonl",
      "train" + c + " --triplets mixed.jsonl -o model.ckpt --threads 4",
      "encode" + c + " --checkpoint model.ckpt --corpus data/corpus.jsonl -o emb.jsonl",
      "index" + c + " --embeddings emb.jsonl -o index.bin",
      "search" + c + " --checkpoint model.ckpt --index index.bin --queries data/queries.jsonl -o run.trec",
      "eval" + c + " --checkpoint model.ckpt --corpus data/corpus.jsonl --queries data/queries.jsonl"
          " --qrels data/qrels.tsv --report eval.json",
      "prune" + c + " --checkpoint model.ckpt --corpus data/chunks.jsonl -o pruned.ckpt",
      "snap" + c + " --checkpoint pruned.ckpt -o snapped.ckpt",
      "pretrain" + c + " --checkpoint snapped.ckpt --corpus data/chunks.jsonl -o pretrained.ckpt",
      "needle" + c + " --checkpoint model.ckpt --out-dir needle --report needle/report.json",
  };
  for (const char* run : {"a", "b"}) {
    fs::create_directories(root / run);
    for (const auto& s : steps) {
      const int code = shell("cd '" + (root / run).string() + "' && " + d + s + " > /dev/null");
      if (code != 0) return {false, fmt::format("run {}: `drama {}` exited {}", run, s, code)};
    }
  }
  std::size_t manifests = 0, outputs = 0, diffs = 0, stale = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file() || e.path().filename().string().find("manifest.json") == std::string::npos) continue;
    ++manifests;
    const fs::path rel = fs::relative(e.path(), root / "a");
    const std::string ma = read_text_file(e.path()), mb = read_text_file(root / "b" / rel);
    if (ma != mb) ++diffs;
    const Json manifest = Json::parse(ma);
    for (const auto& [path, hash] : manifest.at("outputs").items()) {
      ++outputs;
      if (sha256_file(root / "a" / path) != hash || sha256_file(root / "b" / path) != hash) ++stale;
    }
  }
  fs::remove_all(root);
  return {manifests == steps.size() && outputs > 0 && diffs == 0 && stale == 0,
          fmt::format("{} subcommands run twice in separate directories; {} manifests, {} differ; {} declared "
                      "outputs, {} not matching their manifest hash",
                      steps.size(), manifests, diffs, outputs, stale)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    }
  }
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  int failed = 0;
  for (const auto& [n, fn] : criteria) {
    if (!only.empty() && !only.count(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << fmt::format("criterion {}: {} - {} [{:.1f}s]", n, o.pass ? "PASS" : "FAIL", o.detail, secs)
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
